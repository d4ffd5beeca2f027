#include "trilab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "trilab/common.hpp"
#include "trilab/ff.hpp"
#include "trilab/fractal.hpp"
#include "trilab/sphere_quad.hpp"
#include "trilab/stationary_phase.hpp"

namespace trilab::accept {

namespace {

using surf::FreqPair;
using surf::QuadratureSpec;

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<double> rand_unit(int d, Rng& rng) {
    std::vector<double> v(d);
    double n = 0;
    do {
        n = 0;
        for (auto& x : v) {
            x = rng.normal();
            n += x * x;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    for (auto& x : v) x /= n;
    return v;
}

FreqPair seeded_pair(int d, Rng& rng, double rmin, double rmax) {
    FreqPair p;
    p.xi = rand_unit(d, rng);
    p.eta = rand_unit(d, rng);
    const double r1 = rng.uniform(rmin, rmax), r2 = rng.uniform(rmin, rmax);
    for (auto& x : p.xi) x *= r1;
    for (auto& x : p.eta) x *= r2;
    return p;
}

// --- criterion 1: normalization and the Case-2 symmetry -------------------

CriterionResult criterion1() {
    CriterionResult r;
    r.id = 1;
    r.name = "sigma_hat normalization and (xi,eta)->(-xi,xi+eta) symmetry";
    QuadratureSpec qs;
    double worst_norm = 0.0, worst_sym = 0.0;
    for (int d : {2, 3, 4}) {
        FreqPair zero;
        zero.xi.assign(d, 0.0);
        zero.eta.assign(d, 0.0);
        worst_norm = std::max(worst_norm, std::abs(surf::sigma_hat_quad(zero, qs) - 1.0));
        Rng rng(1000 + d);
        for (int k = 0; k < 50; ++k) {
            FreqPair p = seeded_pair(d, rng, 0.5, 16.0);
            FreqPair q;
            q.xi.resize(d);
            q.eta.resize(d);
            for (int i = 0; i < d; ++i) {
                q.xi[i] = -p.xi[i];
                q.eta[i] = p.xi[i] + p.eta[i];
            }
            const double diff =
                std::abs(surf::sigma_hat_quad(p, qs) - surf::sigma_hat_quad(q, qs));
            worst_sym = std::max(worst_sym, diff);
        }
    }
    r.pass = worst_norm <= 1e-8 && worst_sym <= 1e-4;
    r.detail = "|sigma_hat(0,0)-1| max " + fmt("%.2e", worst_norm) +
               ", symmetry defect max " + fmt("%.2e", worst_sym) + " (tol 1e-8 / 1e-4)";
    return r;
}

// --- criterion 2: baseline decay -------------------------------------------

CriterionResult criterion2() {
    CriterionResult r;
    r.id = 2;
    r.name = "baseline decay exponent -(d-1)/2";
    // The baseline exponent is sharp on the parallel family eta = xi, where
    // sigma_hat(R u, R u) is the radius-sqrt3 sphere transform; independent
    // generic pairs decay at the faster anisotropic rate and are reported
    // informationally below.
    const std::vector<double> grid{4, 8, 16, 32, 64};
    QuadratureSpec qs;
    bool ok = true;
    std::ostringstream det;
    for (int d : {3, 4}) {
        const double target = -0.5 * (d - 1);
        Rng rng(2000 + d);
        for (int k = 0; k < 5; ++k) {
            FreqPair dir;
            dir.xi = rand_unit(d, rng);
            dir.eta = dir.xi;
            FitReport fit = surf::decay_exponent_fit(dir, grid, qs);
            if (std::fabs(fit.slope - target) > 0.15) ok = false;
            if (k == 0)
                det << "d=" << d << " slope " << fmt("%.3f", fit.slope) << " (target "
                    << fmt("%.2f", target) << "+-0.15) ";
        }
        // informational: independent pairs decay at about -(2d-3)/2
        FreqPair gen;
        gen.xi = rand_unit(d, rng);
        gen.eta = rand_unit(d, rng);
        FitReport gfit = surf::decay_exponent_fit(gen, grid, qs);
        det << "[generic-pair d=" << d << ": " << fmt("%.2f", gfit.slope) << "] ";
    }
    r.pass = ok;
    r.detail = det.str();
    return r;
}

// --- criterion 3 ------------------------------------------------------------

CriterionResult run_oracle_agreement(surf::SphereFtFn ft, long mc_samples) {
    CriterionResult r;
    r.id = 3;
    r.name = "deterministic quadrature vs Haar Monte Carlo oracle";
    int n_total = 0, n_ok = 0;
    double worst_ratio = 0.0;
    for (int d : {2, 3, 4}) {
        Rng rng(3000 + d);
        for (int k = 0; k < 50; ++k) {
            FreqPair p = seeded_pair(d, rng, 0.5, 8.0);
            QuadratureSpec qs;
            qs.mc_samples = mc_samples;
            qs.seed = std::uint64_t(d) * 977 + std::uint64_t(k);
            const auto mc = surf::sigma_hat_mc(p, qs);
            const auto quad = surf::sigma_hat_quad_with(p, qs, ft);
            const double diff = std::abs(quad - mc.mean);
            const double lim = 3.0 * mc.se();
            ++n_total;
            if (diff <= lim) ++n_ok;
            if (lim > 0) worst_ratio = std::max(worst_ratio, diff / lim);
        }
    }
    const double frac = double(n_ok) / double(n_total);
    r.pass = frac >= 0.95;
    r.detail = fmt("%.1f", 100.0 * frac) +
               "% of pairs within 3x stderr (need >= 95%), worst diff/limit " +
               fmt("%.2f", worst_ratio);
    return r;
}

// --- criterion 4 ------------------------------------------------------------

CriterionResult criterion4() {
    CriterionResult r;
    r.id = 4;
    r.name = "stationary-phase algebra (gradient, Hessian, first factor)";
    bool ok = true;
    double worst_det = 0.0, worst_ff = 0.0;
    std::ostringstream det;
    for (int d : {2, 3, 4}) {
        Rng rng(4000 + d);
        // gradient-zero <=> critical-equation residual
        for (int k = 0; k < 50; ++k) {
            std::vector<double> xi = rand_unit(d, rng), eta = rand_unit(d, rng);
            const double scale = norm2(xi) + norm2(eta);
            auto g = sp::gradient_fd(xi, eta, 1e-4);
            double gn = 0;
            for (double v : g) gn = std::max(gn, std::fabs(v));
            const double res = sp::critical_residual(xi, eta);
            if (res <= 1e-10 && gn > 1e-8 * scale) ok = false;
            if (res > 1e-6 && gn <= 1e-8 * scale) ok = false;
        }
        for (int k = 0; k < 50; ++k) {
            std::vector<double> xi, eta;
            sp::random_admissible_pair(d, rng, xi, eta);
            const double scale = norm2(xi) + norm2(eta);
            auto g = sp::gradient_fd(xi, eta, 1e-4);
            double gn = 0;
            for (double v : g) gn = std::max(gn, std::fabs(v));
            if (gn > 1e-8 * scale) ok = false;
            auto h = sp::hessian_closed_form(xi, eta);
            const double dfd = sp::det_fd(xi, eta, 1e-3);
            const double rel = std::fabs(dfd - h.det) / std::fabs(h.det);
            worst_det = std::max(worst_det, rel);
            worst_ff = std::max(worst_ff, std::fabs(h.first_factor - h.gpi3_explicit));
        }
    }
    if (worst_det > 1e-4 || worst_ff > 1e-12) ok = false;
    r.pass = ok;
    r.detail = "det rel err max " + fmt("%.2e", worst_det) + " (tol 1e-4), first-factor gap max " +
               fmt("%.2e", worst_ff) + " (tol 1e-12)";
    return r;
}

// --- criterion 5 ------------------------------------------------------------

CriterionResult criterion5(long samples) {
    CriterionResult r;
    r.id = 5;
    r.name = "Lemma-int scaling value ~ rho^{d-1}";
    bool ok = true;
    std::ostringstream det;
    for (int d : {3, 4}) {
        Rng rng(5000 + d);
        std::vector<double> rhos{8, 16, 32, 64}, vals, ratios;
        for (double rho : rhos) {
            std::vector<double> edir = rand_unit(d, rng);
            for (auto& v : edir) v *= rho;
            auto res = sp::lemma_int_quadrature(edir, rho, d, samples, 50 + std::uint64_t(rho));
            if (res.stratum_underflow) ok = false;
            vals.push_back(res.value);
            ratios.push_back(res.ratio);
        }
        const double spread = *std::max_element(ratios.begin(), ratios.end()) /
                              *std::min_element(ratios.begin(), ratios.end());
        FitReport fit = fit_loglog(rhos, vals);
        if (spread >= 3.0 || std::fabs(fit.slope - double(d - 1)) > 0.2) ok = false;
        det << "d=" << d << " exponent " << fmt("%.3f", fit.slope) << " (target " << d - 1
            << "+-0.2), ratio spread " << fmt("%.2f", spread) << " (<3) ";
    }
    r.pass = ok;
    r.detail = det.str();
    return r;
}

// --- criterion 6 ------------------------------------------------------------

CriterionResult criterion6() {
    CriterionResult r;
    r.id = 6;
    r.name = "Frostman battery (ball, annulus energy, mollified sup-norm)";
    bool ok = true;
    std::ostringstream det;

    struct Case {
        frac::CantorSpec spec;
        double s;
    };
    std::vector<Case> cases;
    cases.push_back({frac::CantorSpec{1, 64, 4, {0, 3}, 3}, 0.5});
    cases.push_back({frac::CantorSpec{2, 64, 2, {0, 3}, 6}, 1.0});

    for (const auto& c : cases) {
        const int d = c.spec.d;
        frac::GridMeasure mu = frac::build_cantor(c.spec);
        auto ball = frac::ball_condition_scan(mu, frac::default_ball_radii(mu.N));
        if (std::fabs(ball.fit.slope - c.s) > 0.2) ok = false;

        frac::SpectrumGrid sp = frac::grid_fourier(mu);
        std::vector<double> rs{4, 8, 16}, es;
        for (double R : rs) es.push_back(frac::annulus_energy(sp, R));
        FitReport efit = fit_loglog(rs, es);
        if (std::fabs(efit.slope - (d - c.s)) > 0.3) ok = false;

        std::vector<double> deltas{1.0 / 16, 1.0 / 8, 1.0 / 4}, sups;
        for (double dl : deltas) sups.push_back(frac::mollify(mu, dl).sup_density());
        FitReport mfit = fit_loglog(deltas, sups);
        if (std::fabs(mfit.slope - (c.s - d)) > 0.3) ok = false;

        det << "d=" << d << " s=" << fmt("%.1f", c.s) << ": ball " << fmt("%.2f", ball.fit.slope)
            << " energy " << fmt("%.2f", efit.slope) << " sup-norm " << fmt("%.2f", mfit.slope)
            << "; ";
    }
    r.pass = ok;
    r.detail = det.str() + "targets s / d-s / s-d within 0.2 / 0.3 / 0.3";
    return r;
}

// --- criterion 7 ------------------------------------------------------------

CriterionResult criterion7() {
    CriterionResult r;
    r.id = 7;
    r.name = "triple correlation: frequency side vs spatial oracle (10%)";
    frac::CantorSpec cs{2, 16, 2, {0, 3}, 4};
    frac::GridMeasure mu = frac::mollify(frac::build_cantor(cs), 0.25);
    frac::SpectrumGrid sp = frac::grid_fourier(mu);
    surf::SigmaHatCache cache(2, 8.0, 8.0);
    frac::NuEstimate nu = frac::triple_correlation_freq(sp, cache, 8.0, 0.25);
    const double spatial = frac::triple_correlation_space(mu, 0.25, 2, 7);
    const double rel = std::fabs(nu.total_mass - spatial) / std::fabs(spatial);
    r.pass = rel <= 0.10;
    r.detail = "nu_freq " + fmt("%.6f", nu.total_mass) + " vs spatial " + fmt("%.6f", spatial) +
               ", rel gap " + fmt("%.3f", rel) + " (tol 0.10)";
    return r;
}

// --- criterion 8 ------------------------------------------------------------

CriterionResult criterion8() {
    CriterionResult r;
    r.id = 8;
    r.name = "positivity sanity at s = d (uniform, d=2, N=32)";
    frac::GridMeasure mu = frac::uniform_measure(2, 32);
    surf::SigmaHatCache cache(2, 16.0, 16.0);
    auto rows = frac::positivity_report(mu, {0.25, 0.125, 0.0625}, 0.25, cache, 16.0);
    bool ok = rows.back().positive;
    // mollifying the uniform measure is the identity, so the gaps should be
    // flat; "decreasing" is enforced up to 10% slack
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].gap > rows[i - 1].gap * 1.10 + 1e-12) ok = false;
    std::ostringstream det;
    for (const auto& row : rows)
        det << "delta=" << fmt("%.4g", row.delta) << " nu=" << fmt("%.6f", row.nu_freq)
            << " I=" << fmt("%.6f", row.spatial) << " gap=" << fmt("%.2e", row.gap) << "; ";
    det << "err*3=" << fmt("%.2e", 3.0 * rows.back().err_estimate);
    r.pass = ok;
    r.detail = det.str();
    return r;
}

// --- criterion 9 ------------------------------------------------------------

CriterionResult criterion9() {
    CriterionResult r;
    r.id = 9;
    r.name = "finite-field exactness (F_5^2, F_13^2, F_5^4)";
    using namespace trilab::ff;
    bool ok = true;
    std::ostringstream det;

    auto c5 = equilateral_census(FFSubset::full_space(PrimeField(5), 2));
    if (c5.status != ScanStatus::ok || c5.total != 0) ok = false;
    det << "F_5^2 total " << c5.total << " (want 0; zero-class bucket " << c5.zero_class << "); ";

    auto c13 = equilateral_census(FFSubset::full_space(PrimeField(13), 2));
    if (c13.status != ScanStatus::ok || c13.total == 0) ok = false;
    det << "F_13^2 total " << c13.total << " (> 0); ";

    auto c54 = equilateral_census(FFSubset::full_space(PrimeField(5), 4));
    if (c54.status != ScanStatus::ok) ok = false;
    bool all = true;
    for (std::uint32_t rr = 1; rr < 5; ++rr)
        if (!c54.counts_by_side.count(rr)) all = false;
    if (!all) ok = false;
    det << "F_5^4 nonzero classes realized " << c54.counts_by_side.size() << "/4";
    r.pass = ok;
    r.detail = det.str();
    return r;
}

// --- criterion 10 -----------------------------------------------------------

CriterionResult criterion10() {
    CriterionResult r;
    r.id = 10;
    r.name = "tail-exponent sign bracket at d=4, N=8 (s=4 vs s=3)";
    const std::vector<double> rlist{1.0, 1.5, 2.0, 3.0};
    const double t = 0.5;
    surf::SigmaHatCache cache(4, 4.05, 4.05);

    // s = 4: the exact uniform measure is band-limited to DC, so the tail is
    // identically zero -- reported as maximal decay (slope -inf)
    frac::GridMeasure uni = frac::uniform_measure(4, 8);
    frac::SpectrumGrid spu = frac::grid_fourier(uni);
    auto scan_u = frac::tail_bound_scan(spu, cache, rlist, t);
    const bool neg_u = scan_u.all_zero || scan_u.fitted_slope < 0.0;

    frac::CantorSpec c3{4, 8, 2, {0, 1, 2, 4, 7, 11, 13, 14}, 3};
    frac::GridMeasure m3 = frac::build_cantor(c3);
    frac::SpectrumGrid sp3 = frac::grid_fourier(m3);
    auto scan_3 = frac::tail_bound_scan(sp3, cache, rlist, t);
    const bool nonneg_3 = !scan_3.all_zero && scan_3.fitted_slope >= 0.0;

    // informational: a nearly full-dimensional pattern with a generic
    // spectrum decays clearly
    frac::CantorSpec c15{4, 8, 2, {}, 3};
    for (int k = 0; k < 15; ++k) c15.keep.push_back(k);
    auto scan_15 = frac::tail_bound_scan(frac::grid_fourier(frac::build_cantor(c15)), cache, rlist, t);

    std::ostringstream det;
    det << "s=4 uniform: " << (scan_u.all_zero ? "tail identically zero (slope -inf)"
                                               : "slope " + fmt("%.3f", scan_u.fitted_slope))
        << "; s=3 block slope " << fmt("%.3f", scan_3.fitted_slope) << " (predicted "
        << fmt("%.2f", scan_3.predicted_exponent) << "); s=3.91 info slope "
        << fmt("%.3f", scan_15.fitted_slope)
        << ". Note: the paper's d>=4 theorem is probed only at this coarse grid.";
    r.pass = neg_u && nonneg_3;
    r.detail = det.str();
    return r;
}

}  // namespace

CriterionResult criterion_oracle_agreement(surf::SphereFtFn ft, long mc_samples) {
    return run_oracle_agreement(ft, mc_samples);
}

std::vector<CriterionResult> run_acceptance(Profile profile, std::ostream& log, int only) {
    const long lemma_samples = profile == Profile::full ? 500000 : 200000;
    std::vector<CriterionResult> out;
    auto run = [&](int id, auto&& fn) {
        if (only != 0 && only != id) return;
        const double t0 = now_s();
        CriterionResult res = fn();
        res.seconds = now_s() - t0;
        log << (res.pass ? "[PASS] " : "[FAIL] ") << res.id << ": " << res.name << " -- "
            << res.detail << " (" << fmt("%.1f", res.seconds) << " s)\n";
        log.flush();
        out.push_back(res);
    };
    run(1, criterion1);
    run(2, criterion2);
    run(3, [&] { return run_oracle_agreement(&sphere_ft, 100000); });
    run(4, criterion4);
    run(5, [&] { return criterion5(lemma_samples); });
    run(6, criterion6);
    run(7, criterion7);
    run(8, criterion8);
    run(9, criterion9);
    run(10, criterion10);
    int fails = 0;
    for (const auto& c : out)
        if (!c.pass) ++fails;
    log << (fails == 0 ? "ALL CRITERIA PASSED" : std::to_string(fails) + " CRITERIA FAILED")
        << "\n";
    return out;
}

}  // namespace trilab::accept
