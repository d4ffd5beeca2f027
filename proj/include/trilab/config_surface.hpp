#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "trilab/common.hpp"

namespace trilab::surf {

using cdouble = std::complex<double>;

// Frequency pair (xi, eta) for sigma_hat; zeta = xi + eta is derived on demand.
struct FreqPair {
    std::vector<double> xi, eta;

    int dim() const {
        if (xi.size() != eta.size() || xi.size() < 2)
            throw std::invalid_argument("FreqPair: xi/eta dim mismatch or d < 2");
        return int(xi.size());
    }
};

struct QuadratureSpec {
    int sphere_nodes = 0;       // nodes per angle for the outer integral; 0 = auto
    long mc_samples = 100000;   // Haar oracle sample count
    std::uint64_t seed = 1;
};

// Thrown when a fixed node budget cannot resolve the requested frequencies.
struct nyquist_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct McValue {
    cdouble mean;
    double se_re = 0.0, se_im = 0.0;
    double se() const { return std::sqrt(se_re * se_re + se_im * se_im); }
};

// Ground-truth oracle: Haar average over O(d) of exp(-2pi i (g x0 . xi + g y0 . eta)).
McValue sigma_hat_mc(const FreqPair& pair, const QuadratureSpec& spec);

// Deterministic evaluator.  Reduction to the 2-plane spanned by (xi + eta/2, eta):
//   sigma_hat(xi,eta) = E_{x in S^{d-1}} e^{-2pi i x.(xi+eta/2)}
//                          * sphere_ft(d-1, (sqrt3/2)|eta - (x.eta)x|)
// The partner set of a fixed x is the sphere x/2 + (sqrt3/2) S^{d-2}(x-perp).
// Validated against sigma_hat_mc in the test suite before anything trusts it.
cdouble sigma_hat_quad(const FreqPair& pair, const QuadratureSpec& spec);

// Same, with an injectable inner transform (used by the acceptance suite's
// mutation check).
using SphereFtFn = double (*)(int, double);
cdouble sigma_hat_quad_with(const FreqPair& pair, const QuadratureSpec& spec, SphereFtFn ft);

// d=2 closed form: (J0(2pi|xi + R_{pi/3} eta|) + J0(2pi|xi + R_{-pi/3} eta|)) / 2.
double sigma_hat_closed2(double xi0, double xi1, double eta0, double eta1);

// Final-display bound of the stationary-phase lemma:
//   |xi + g_{pi/3} eta|^{-1/2} |xi|^{-(d-2)/2} |eta|^{-(d-2)/2} sin(<xi,eta>)^{-(d-2)/2}
// g_{pi/3} rotates eta by pi/3 inside span{xi,eta}, orientation chosen to
// minimize |xi + g eta|.  Empty when |xi|/|eta| ratio exceeds 4, either
// vanishes, or the pair is (anti)parallel.
std::optional<double> sigma_hat_bound(const FreqPair& pair);

// |xi + g_{+-pi/3} eta| for both in-plane orientations (min first).
struct Gpi3Lengths { double len_min, len_max; };
std::optional<Gpi3Lengths> gpi3_lengths(const FreqPair& pair);

// |sigma_hat_quad(R xi, R eta)| on an ascending grid, log-log slope.
FitReport decay_exponent_fit(const FreqPair& direction, const std::vector<double>& r_grid,
                             const QuadratureSpec& spec);

// Interpolation table over (|a|, |b|, angle) -- sigma_hat is real and
// rotation-invariant, so three parameters suffice.  d=2 uses the closed form
// through a cubic J0 table; d>=3 a tricubic table built once.  eval() refuses
// radii beyond the validated range.
class SigmaHatCache {
public:
    SigmaHatCache(int d, double r1max, double r2max);

    double eval(double r1, double r2, double cos_angle) const;
    double eval_pair(const double* a, const double* b, int d) const;

    int dim() const { return d_; }
    double r1max() const { return r1max_; }
    double r2max() const { return r2max_; }
    // validated absolute error budget: |err| <= tol_rel * (|value| + floor)
    static constexpr double kTolRel = 1e-4;
    static constexpr double kTolFloor = 1e-2;
    double validated_error() const { return validated_error_; }

private:
    int d_;
    double r1max_, r2max_;
    double validated_error_ = 0.0;
    // d == 2: 1-D J0 table
    std::vector<double> j0tab_;
    double j0_h_ = 0.0;
    double j0_rmax_ = 0.0;
    // d >= 3: (r1, r2, theta) table
    int nr1_ = 0, nr2_ = 0, nth_ = 0;
    double h1_ = 0.0, h2_ = 0.0, hth_ = 0.0;
    std::vector<double> tab_;

    void build_table();
    void validate();
    double j0_lookup(double r) const;
    double table_lookup(double r1, double r2, double th) const;
};

}  // namespace trilab::surf
