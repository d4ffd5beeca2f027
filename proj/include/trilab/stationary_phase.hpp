#pragma once

#include <cstdint>
#include <vector>

#include "trilab/common.hpp"

namespace trilab::sp {

// Chart coordinates (u1, u', v') near the base triangle
// x0 = (0, 0', 1), y0 = (sqrt3/2, 0', 1/2); ambient vectors are ordered
// (first, middle block of d-2, last).
struct LocalCoords {
    double u1 = 0.0;
    std::vector<double> u_prime;  // d-2 entries
    std::vector<double> v_prime;  // d-2 entries

    int dim() const { return int(u_prime.size()) + 2; }
    double norm() const;
};

inline constexpr double kChartWindow = 0.1;

struct ChartPointPair {
    std::vector<double> x, y;
    double res_x = 0.0;   // |x| - 1
    double res_y = 0.0;   // |y| - 1
    double res_xy = 0.0;  // |x - y| - 1
};

// Quadratic chart: x(u) = (u, 1 - |u|^2/2) and y assembled from the displayed
// parametrization with
//   v1 = u1/2 - (sqrt3/4) u1^2 - (sqrt3/12)|u'|^2 - |v'|^2/sqrt3 + (u'.v')/sqrt3.
// Constraint residuals are cubic in |coords|.
ChartPointPair chart(const LocalCoords& coords);

// Exact chart with the same 2-jet: x on the sphere via the graph map, y
// solved on the true constraint set {|y| = 1, x.y = 1/2} with y' = v' fixed
// (line-circle intersection, root near y0).  Backs the finite-difference
// oracles so they are not polluted by the cubic truncation.
ChartPointPair chart_exact(const LocalCoords& coords);

// quadratic-order inverse of a1 s + a2 s^2 = t
double implicit_solve(double a1, double a2, double t);

// gradient of the phase U(u1,u',v') . (xi,eta) from the closed-form displays;
// layout: [d/du1, d/du'_i ..., d/dv'_i ...], size 2d-3
std::vector<double> phase_gradient(const LocalCoords& coords, const std::vector<double>& xi,
                                   const std::vector<double>& eta);

// exact-chart phase value, the finite-difference reference
double phase_exact(const LocalCoords& coords, const std::vector<double>& xi,
                   const std::vector<double>& eta);

// central-difference gradient/Hessian of phase_exact at coords = 0, with one
// Richardson refinement at h/2
std::vector<double> gradient_fd(const std::vector<double>& xi, const std::vector<double>& eta,
                                double h);
std::vector<double> hessian_fd(const std::vector<double>& xi, const std::vector<double>& eta,
                               double h);  // (2d-3)^2 row-major

double det_fd(const std::vector<double>& xi, const std::vector<double>& eta, double h);

// residual of the critical-point conditions: (xi1 + eta1/2 - (sqrt3/2) eta_d,
// xi', eta'), returned as its max-abs entry
double critical_residual(const std::vector<double>& xi, const std::vector<double>& eta);

struct HessianClosedForm {
    double block1 = 0.0;               // -xi_d - (sqrt3/2) eta1 - eta_d/2
    double b2_uu = 0.0, b2_uv = 0.0, b2_vv = 0.0;  // the repeated 2x2 block
    double det = 0.0;                  // block1 * det(2x2)^{d-2}
    double det_factored = 0.0;         // |block1| |(2/sqrt3)(eta1 xi_d - xi1 eta_d)|^{d-2}
    double det_sin_form = 0.0;         // |block1| ((2/sqrt3)|xi||eta| sin<xi,eta>)^{d-2}
    double first_factor = 0.0;         // |block1|
    double gpi3_explicit = 0.0;        // |xi + g_{pi/3} eta|, explicit 2-plane CCW rotation
};

// requires an admissible pair (critical_residual below 1e-10 * scale)
HessianClosedForm hessian_closed_form(const std::vector<double>& xi,
                                      const std::vector<double>& eta);

// seeded admissible pair generator (xi' = eta' = 0, xi1 from the critical
// equation), normalized to |(xi,eta)| = 1
void random_admissible_pair(int d, Rng& rng, std::vector<double>& xi, std::vector<double>& eta);

struct LemmaIntResult {
    double value = 0.0;
    double stderr_est = 0.0;
    double ratio = 0.0;               // value / rho^{d-1}
    bool stratum_underflow = false;
};

// integral over {rho <= |xi| < 2 rho} of |xi + g_{pi/3} eta|^{-1}
// sin(<xi,eta>)^{-(d-2)}; polar importance sampling around the eta axis
// cancels the angular singularity analytically, a second stratum refines the
// |xi + g eta| ~ 0 neighborhoods
LemmaIntResult lemma_int_quadrature(const std::vector<double>& eta, double rho, int d,
                                    long mc_samples, std::uint64_t seed);

}  // namespace trilab::sp
