#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trilab/common.hpp"
#include "trilab/config_surface.hpp"

namespace trilab::frac {

// Self-similar keep-pattern construction.  subdiv is the refinement factor
// per axis (2 = the half-scale subdivision; 4 gives quarter-scale patterns so
// that s = log 2 / log 4 = 1/2 and s = 3/2 are reachable).  keep lists
// subcell linear indices in [0, subdiv^d); s_nominal = log(#keep)/log(subdiv).
struct CantorSpec {
    int d = 1;
    int N = 64;              // grid cells per axis, power of subdiv^depth
    int subdiv = 2;
    std::vector<int> keep;
    int depth = 1;
};

// Discretized measure: nonnegative cell masses on the N^d lattice of [0,1)^d,
// atoms at k/N, total mass 1 within 1e-12.
struct GridMeasure {
    int d = 0, N = 0;
    std::vector<double> weights;
    double s_nominal = 0.0;
    double c_mu_estimate = 0.0;
    double delta = 0.0;      // mollification scale, 0 when raw
    // provenance (serialized to the file header)
    int subdiv = 0, depth = 0;
    std::vector<int> keep;

    std::size_t cells() const { return weights.size(); }
    void check_mass() const;  // throws if sum deviates from 1 by > 1e-12
    double sup_density() const;  // max weight * N^d
};

struct SpectrumGrid {
    int d = 0, N = 0;
    std::vector<std::complex<double>> values;  // DFT index order
    double s_nominal = 0.0;

    int signed_freq(int idx) const { return idx <= (N - 1) / 2 ? idx : idx - N; }
};

GridMeasure build_cantor(const CantorSpec& spec);
GridMeasure uniform_measure(int d, int N);
GridMeasure point_mass(int d, int N);

struct BallScanReport {
    FitReport fit;                      // sup_x mu(B(x,r)) against r
    double c_mu = 0.0;                  // sup ratio mu(B)/r^s at s_nominal
    std::vector<double> radii;
    std::vector<double> sup_mass;
};

BallScanReport ball_condition_scan(const GridMeasure& mu, const std::vector<double>& radii,
                                   std::optional<double> s_override = std::nullopt);

std::vector<double> default_ball_radii(int N);

// Exact DFT of the weight array; SpectrumGrid invariants are verified before
// returning.
SpectrumGrid grid_fourier(const GridMeasure& mu);

// sum over lattice points with R <= |xi| < 2R of |mu_hat|^2
double annulus_energy(const SpectrumGrid& spec, double R);

// Convolution with the polynomial bump (1 - |x/delta|^2)^2 sampled on the
// grid (torus), renormalized to unit mass.
GridMeasure mollify(const GridMeasure& mu, double delta);

struct NuEstimate {
    double total_mass = 0.0;
    std::vector<double> t_grid;
    std::vector<double> densities;      // t^{d-1} A(t), the t-integrand
    double t0 = 0.0;
    double delta = 0.0;
    double tail_R = 0.0;                // frequency cutoff used
    double imag_total = 0.0;            // diagnostic, |imag| of the t-integral
    double err_estimate = 0.0;
};

// Frequency-side configuration measure
//   nu(t0) = int_{t0}^1 t^{d-1} sum_{|eta|,|zeta|<=Rcut}
//            mu_hat(eta) mu_hat(zeta) mu_hat(-eta-zeta) sigma_hat(-t eta, -t zeta) dt
// with a 32-point trapezoid in t.  Refuses when the sigma cache cannot cover
// t * Rcut.
NuEstimate triple_correlation_freq(const SpectrumGrid& spec, const surf::SigmaHatCache& cache,
                                   double r_cut, double t0, int nt = 32);

// Spatial oracle for the same functional: direct sum over z and annulus
// offsets x with |x| in [t0, 1], partner point gx rotated by pi/3 around the
// S^{d-2} family (exact two-point family at d=2, seeded Haar samples for
// d >= 3), trilinear lookups on the torus.  Normalized by the S^{d-1} area so
// that it estimates the same nu(t0).
double triple_correlation_space(const GridMeasure& mu_delta, double t0, int rotation_samples,
                                std::uint64_t seed);

struct TailScanReport {
    std::vector<double> r_list;
    std::vector<double> tail_sums;      // both |eta|,|zeta| > R (nested, nonincreasing)
    std::vector<double> block_sums;     // both in [R, 2R) -- the dyadic blocks of the proof
    std::optional<FitReport> block_fit; // over the positive block sums
    bool all_zero = false;
    double fitted_slope = 0.0;          // -inf stand-in when all_zero
    double predicted_exponent = 0.0;    // -(3s - 2d - 3)/2 at s_nominal
    double t = 0.0;
};

// The decay scan behind the tail estimate.  The cumulative tails are nested
// absolute sums (nonincreasing by construction); the slope is fitted on the
// dyadic block sums, which is the quantity the dyadic decomposition actually
// bounds by (R 2^j)^{-(3s-2d-3)/2}.
TailScanReport tail_bound_scan(const SpectrumGrid& spec, const surf::SigmaHatCache& cache,
                               const std::vector<double>& r_list, double t);

struct PositivityRow {
    double delta = 0.0;
    double spatial = 0.0;     // I
    double nu_freq = 0.0;
    double gap = 0.0;         // |nu_freq - I|
    double err_estimate = 0.0;
    bool positive = false;    // nu_freq > 3 * err_estimate
};

std::vector<PositivityRow> positivity_report(const GridMeasure& mu,
                                             const std::vector<double>& delta_list, double t0,
                                             const surf::SigmaHatCache& cache, double r_cut,
                                             int rotation_samples = 8, std::uint64_t seed = 17);

// flat binary payload with a one-line JSON header {d, N, s_nominal,
// keep_pattern, depth, subdiv, delta, checksum}
void save_measure(const GridMeasure& mu, const std::string& path);
GridMeasure load_measure(const std::string& path);

}  // namespace trilab::frac
