// trilab: numerical and combinatorial verification lab for equilateral-triangle
// configuration machinery -- finite-field censuses, the configuration-surface
// Fourier transform and its decay, discretized Frostman measures and the
// triple-correlation measure, and the stationary-phase algebra checks.

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "trilab/acceptance.hpp"
#include "trilab/common.hpp"
#include "trilab/config_surface.hpp"
#include "trilab/ff.hpp"
#include "trilab/fractal.hpp"
#include "trilab/report.hpp"
#include "trilab/sphere_quad.hpp"
#include "trilab/stationary_phase.hpp"

using nlohmann::json;
using namespace trilab;

namespace {

// exit codes: 0 ok, 2 parse error, 3 precondition violation, 4 budget/refusal
constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitRefusal = 4;

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

json base_report(const std::string& sub, const json& config) {
    json j;
    j["subcommand"] = sub;
    j["config"] = config;
    j["version"] = kVersion;
    j["status"] = "ok";
    j["warnings"] = json::array();
    return j;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

int run_ff_census(std::uint32_t q, int d, const std::string& mode, std::size_t size, int trials,
                  std::uint64_t seed, const std::string& out) {
    ff::PrimeField field(q);
    std::string csv = report::csv_row({"q", "d", "size", "seed", "side_class", "count"});
    auto emit = [&](const ff::TriangleCensus& c, std::size_t sz, std::uint64_t sd) {
        if (c.status == ff::ScanStatus::aborted)
            throw surf::nyquist_error("census budget exceeded (search aborted)");
        if (c.zero_class)
            csv += report::csv_row({std::to_string(q), std::to_string(d), std::to_string(sz),
                                    std::to_string(sd), "0", std::to_string(c.zero_class)});
        for (const auto& [r, n] : c.counts_by_side)
            csv += report::csv_row({std::to_string(q), std::to_string(d), std::to_string(sz),
                                    std::to_string(sd), std::to_string(r), std::to_string(n)});
    };
    if (mode == "full") {
        auto e = ff::FFSubset::full_space(field, d);
        emit(ff::equilateral_census(e), e.size(), seed);
    } else {
        for (int t = 0; t < trials; ++t) {
            auto e = ff::FFSubset::random_subset(field, d, size, seed + std::uint64_t(t));
            emit(ff::equilateral_census(e), size, seed + std::uint64_t(t));
        }
    }
    report::write_text(out, csv);
    return kExitOk;
}

int run_ff_obstruction(std::uint32_t qmax, int d, const std::string& out) {
    std::string csv = report::csv_row({"q", "d", "sqrt3_exists", "triangle_exists", "status"});
    for (std::uint32_t q : ff::primes_up_to(qmax)) {
        if (q < 3) continue;
        auto rep = ff::obstruction_check(ff::PrimeField(q), d);
        csv += report::csv_row({std::to_string(q), std::to_string(d),
                                rep.sqrt3_exists ? "1" : "0",
                                rep.status == ff::ScanStatus::ok ? (rep.triangle_exists ? "1" : "0") : "",
                                ff::to_string(rep.status)});
    }
    report::write_text(out, csv);
    return kExitOk;
}

int run_ff_threshold(std::uint32_t q, int d, const std::string& sizes_s, int trials,
                     std::uint64_t seed, const std::string& out) {
    ff::PrimeField field(q);
    std::vector<std::size_t> sizes;
    for (double v : parse_list(sizes_s)) sizes.push_back(std::size_t(v));
    auto rows = ff::threshold_experiment(field, d, sizes, trials, seed);
    std::string csv = report::csv_row({"q", "d", "size", "trials", "seed", "mean_fraction",
                                       "realizable_classes", "threshold", "above_threshold",
                                       "status"});
    for (const auto& r : rows) {
        char frac[32], thr[32];
        std::snprintf(frac, sizeof frac, "%.6f", r.mean_fraction);
        std::snprintf(thr, sizeof thr, "%.3f", r.threshold);
        csv += report::csv_row({std::to_string(q), std::to_string(d), std::to_string(r.size),
                                std::to_string(r.trials), std::to_string(r.seed), frac,
                                std::to_string(r.realizable_classes), thr,
                                r.above_threshold ? "1" : "0", ff::to_string(r.status)});
    }
    report::write_text(out, csv);
    return kExitOk;
}

int run_sigma_hat(int d, std::vector<double> xi, std::vector<double> eta, bool oracle, int nodes,
                  long mc_samples, std::uint64_t seed, const std::string& out) {
    if (int(xi.size()) != d || int(eta.size()) != d)
        throw std::invalid_argument("sigma-hat: xi/eta must each have d entries");
    surf::FreqPair pair{std::move(xi), std::move(eta)};
    surf::QuadratureSpec qs;
    qs.sphere_nodes = nodes;
    qs.mc_samples = mc_samples;
    qs.seed = seed;
    json config{{"d", d}, {"xi", pair.xi}, {"eta", pair.eta}, {"oracle", oracle},
                {"nodes", nodes}, {"mc_samples", mc_samples}, {"seed", seed}};
    json j = base_report("sigma-hat", config);
    const double t0 = now_s();
    if (oracle) {
        auto mc = surf::sigma_hat_mc(pair, qs);
        j["value_re"] = mc.mean.real();
        j["value_im"] = mc.mean.imag();
        j["stderr"] = mc.se();
    } else {
        auto v = surf::sigma_hat_quad(pair, qs);
        j["value_re"] = v.real();
        j["value_im"] = v.imag();
        j["nodes_used"] = nodes > 0 ? nodes
                                     : sphere_nodes_required(norm2(pair.xi) + norm2(pair.eta));
    }
    j["wall_time_s"] = now_s() - t0;
    report::write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_decay_fit(int d, std::uint64_t dir_seed, double rmin, double rmax, int npoints,
                  const std::string& pair_mode, const std::string& out,
                  const std::string& csv_out) {
    Rng rng(dir_seed);
    surf::FreqPair dir;
    dir.xi.resize(d);
    double n = 0;
    for (auto& v : dir.xi) { v = rng.normal(); n += v * v; }
    n = std::sqrt(n);
    for (auto& v : dir.xi) v /= n;
    if (pair_mode == "parallel") {
        dir.eta = dir.xi;
    } else {
        dir.eta.resize(d);
        n = 0;
        for (auto& v : dir.eta) { v = rng.normal(); n += v * v; }
        n = std::sqrt(n);
        for (auto& v : dir.eta) v /= n;
    }
    std::vector<double> grid(npoints);
    for (int i = 0; i < npoints; ++i)
        grid[i] = rmin * std::pow(rmax / rmin, double(i) / double(npoints - 1));
    surf::QuadratureSpec qs;
    const double t0 = now_s();
    FitReport fit = surf::decay_exponent_fit(dir, grid, qs);
    json config{{"d", d}, {"dir_seed", dir_seed}, {"rmin", rmin}, {"rmax", rmax},
                {"npoints", npoints}, {"pair", pair_mode}};
    json j = base_report("decay-fit", config);
    j["direction_xi"] = dir.xi;
    j["direction_eta"] = dir.eta;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["max_residual"] = fit.max_residual;
    j["r_grid"] = fit.grid;
    j["values"] = fit.values;
    j["wall_time_s"] = now_s() - t0;
    report::write_text(out, j.dump(2) + "\n");
    if (!csv_out.empty()) {
        std::string csv = report::csv_row({"R", "abs_sigma_hat"});
        for (std::size_t i = 0; i < fit.grid.size(); ++i) {
            char a[32], b[32];
            std::snprintf(a, sizeof a, "%.9g", fit.grid[i]);
            std::snprintf(b, sizeof b, "%.12g", fit.values[i]);
            csv += report::csv_row({a, b});
        }
        report::write_text(csv_out, csv);
    }
    return kExitOk;
}

int run_fractal_build(int d, int N, std::uint64_t keep_mask, int depth, int subdiv,
                      const std::string& out) {
    frac::CantorSpec spec;
    spec.d = d;
    spec.N = N;
    spec.subdiv = subdiv;
    spec.depth = depth;
    const std::size_t ncells = [&] {
        std::size_t r = 1;
        for (int i = 0; i < d; ++i) r *= std::size_t(subdiv);
        return r;
    }();
    for (std::size_t k = 0; k < ncells; ++k)
        if (keep_mask & (std::uint64_t(1) << k)) spec.keep.push_back(int(k));
    frac::GridMeasure mu = frac::build_cantor(spec);
    frac::save_measure(mu, out);
    json j = base_report("fractal-build", json{{"d", d}, {"n", N}, {"keep", keep_mask},
                                               {"depth", depth}, {"subdiv", subdiv}});
    j["s_nominal"] = mu.s_nominal;
    j["c_mu_estimate"] = mu.c_mu_estimate;
    j["cells"] = mu.cells();
    j["path"] = out;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_triple_corr(const std::string& measure, double rcut, double t0, double delta, int nt,
                    bool spatial, int rot_samples, std::uint64_t seed, const std::string& out) {
    frac::GridMeasure mu = frac::load_measure(measure);
    if (delta > 0.0) mu = frac::mollify(mu, delta);
    frac::SpectrumGrid sp = frac::grid_fourier(mu);
    surf::SigmaHatCache cache(mu.d, rcut, rcut);
    const double tstart = now_s();
    frac::NuEstimate nu = frac::triple_correlation_freq(sp, cache, rcut, t0, nt);
    json config{{"measure", measure}, {"rcut", rcut}, {"t0", t0}, {"delta", delta},
                {"nt", nt}, {"spatial", spatial}, {"rot_samples", rot_samples}, {"seed", seed}};
    json j = base_report("triple-corr", config);
    j["total_mass"] = nu.total_mass;
    j["t_grid"] = nu.t_grid;
    j["densities"] = nu.densities;
    j["imag_total"] = nu.imag_total;
    j["err_estimate"] = nu.err_estimate;
    j["cache_error"] = cache.validated_error();
    if (spatial) j["spatial_oracle"] = frac::triple_correlation_space(mu, t0, rot_samples, seed);
    j["wall_time_s"] = now_s() - tstart;
    report::write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_tail_scan(const std::string& measure, double t, const std::string& rlist_s,
                  const std::string& out) {
    frac::GridMeasure mu = frac::load_measure(measure);
    frac::SpectrumGrid sp = frac::grid_fourier(mu);
    std::vector<double> rlist = parse_list(rlist_s);
    double maxnorm = std::sqrt(double(mu.d)) * (mu.N / 2.0);
    surf::SigmaHatCache cache(mu.d, t * maxnorm + 0.05, t * maxnorm + 0.05);
    auto scan = frac::tail_bound_scan(sp, cache, rlist, t);
    json j = base_report("tail-scan", json{{"measure", measure}, {"t", t}, {"r_list", rlist}});
    j["tail_sums"] = scan.tail_sums;
    j["block_sums"] = scan.block_sums;
    j["fitted_slope"] = scan.all_zero ? json("-inf") : json(scan.fitted_slope);
    j["predicted_exponent"] = scan.predicted_exponent;
    j["s_nominal"] = mu.s_nominal;
    j["note"] = "d >= 4 regime probed only at coarse desk-scale grids";
    report::write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_positivity(const std::string& measure, const std::string& deltas_s, double t0,
                   double rcut, int rot_samples, std::uint64_t seed, const std::string& out) {
    frac::GridMeasure mu = frac::load_measure(measure);
    if (rcut <= 0.0) rcut = mu.N / 2.0;
    surf::SigmaHatCache cache(mu.d, rcut, rcut);
    auto rows = frac::positivity_report(mu, parse_list(deltas_s), t0, cache, rcut, rot_samples,
                                        seed);
    std::string csv = report::csv_row(
        {"delta", "spatial_I", "nu_freq", "gap", "err_estimate", "positive"});
    for (const auto& r : rows) {
        char b[5][40];
        std::snprintf(b[0], 40, "%.8g", r.delta);
        std::snprintf(b[1], 40, "%.10g", r.spatial);
        std::snprintf(b[2], 40, "%.10g", r.nu_freq);
        std::snprintf(b[3], 40, "%.6g", r.gap);
        std::snprintf(b[4], 40, "%.6g", r.err_estimate);
        csv += report::csv_row({b[0], b[1], b[2], b[3], b[4], r.positive ? "1" : "0"});
    }
    report::write_text(out, csv);
    return kExitOk;
}

int run_sp_verify(int d, std::uint64_t seed, int trials, const std::string& out) {
    Rng rng(seed);
    json inv = json::array();
    bool all = true;
    auto add = [&](const std::string& name, bool pass, double worst) {
        inv.push_back({{"name", name}, {"pass", pass}, {"worst_residual", worst}});
        all = all && pass;
    };

    double worst_chart = 0.0;
    for (int k = 0; k < trials; ++k) {
        sp::LocalCoords c;
        const int m = d - 2;
        c.u_prime.resize(m);
        c.v_prime.resize(m);
        do {
            c.u1 = rng.uniform(-0.07, 0.07);
            for (auto& v : c.u_prime) v = rng.uniform(-0.05, 0.05);
            for (auto& v : c.v_prime) v = rng.uniform(-0.05, 0.05);
        } while (c.norm() >= sp::kChartWindow);
        auto p = sp::chart(c);
        const double nc = c.norm();
        if (nc < 1e-6) continue;
        const double res = std::max({std::fabs(p.res_x), std::fabs(p.res_y), std::fabs(p.res_xy)});
        worst_chart = std::max(worst_chart, res / (nc * nc * nc));
    }
    add("chart residuals are O(|coords|^3) (<= 10)", worst_chart <= 10.0, worst_chart);

    bool iff_ok = true;
    double worst_grad = 0.0;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> xi(d), eta(d);
        for (auto& v : xi) v = rng.normal();
        for (auto& v : eta) v = rng.normal();
        const double scale = norm2(xi) + norm2(eta);
        auto g = sp::gradient_fd(xi, eta, 1e-4);
        double gn = 0;
        for (double v : g) gn = std::max(gn, std::fabs(v));
        const double res = sp::critical_residual(xi, eta);
        if (res <= 1e-10 && gn > 1e-8 * scale) iff_ok = false;
        if (res > 1e-6 && gn <= 1e-8 * scale) iff_ok = false;
    }
    double worst_det = 0.0, worst_ff = 0.0;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> xi, eta;
        sp::random_admissible_pair(d, rng, xi, eta);
        auto g = sp::gradient_fd(xi, eta, 1e-4);
        double gn = 0;
        for (double v : g) gn = std::max(gn, std::fabs(v));
        worst_grad = std::max(worst_grad, gn);
        if (gn > 1e-8 * (norm2(xi) + norm2(eta))) iff_ok = false;
        auto h = sp::hessian_closed_form(xi, eta);
        worst_det = std::max(worst_det,
                             std::fabs(sp::det_fd(xi, eta, 1e-3) - h.det) / std::fabs(h.det));
        worst_ff = std::max(worst_ff, std::fabs(h.first_factor - h.gpi3_explicit));
    }
    add("gradient vanishes iff the critical equations hold", iff_ok, worst_grad);
    add("closed-form Hessian det vs finite differences (<= 1e-4)", worst_det <= 1e-4, worst_det);
    add("first-factor identity (<= 1e-12)", worst_ff <= 1e-12, worst_ff);

    json j = base_report("sp-verify", json{{"d", d}, {"seed", seed}, {"trials", trials}});
    j["invariants"] = inv;
    j["all_pass"] = all;
    report::write_text(out, j.dump(2) + "\n");
    return all ? kExitOk : 1;
}

int run_lemma_int(int d, const std::string& rho_s, long samples, std::uint64_t seed,
                  const std::string& out) {
    std::string csv = report::csv_row({"rho", "value", "stderr", "ratio"});
    Rng rng(seed);
    std::vector<double> edir(d);
    double n = 0;
    for (auto& v : edir) { v = rng.normal(); n += v * v; }
    n = std::sqrt(n);
    for (auto& v : edir) v /= n;
    for (double rho : parse_list(rho_s)) {
        std::vector<double> eta(edir);
        for (auto& v : eta) v *= rho;
        auto res = sp::lemma_int_quadrature(eta, rho, d, samples, seed + std::uint64_t(rho));
        char b[4][40];
        std::snprintf(b[0], 40, "%.6g", rho);
        std::snprintf(b[1], 40, "%.8g", res.value);
        std::snprintf(b[2], 40, "%.4g", res.stderr_est);
        std::snprintf(b[3], 40, "%.8g", res.ratio);
        csv += report::csv_row({b[0], b[1], b[2], b[3]});
    }
    report::write_text(out, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trilab -- equilateral-triangle configuration laboratory"};
    app.require_subcommand(1);

    // ff-census
    auto* census = app.add_subcommand("ff-census", "census of equilateral triangles in F_q^d");
    std::uint32_t q = 5;
    int d = 2;
    std::string mode = "full", out, measure;
    std::size_t size = 0;
    int trials = 1;
    std::uint64_t seed = 1;
    census->add_option("--q", q, "odd prime modulus")->required();
    census->add_option("--d", d, "dimension")->required();
    census->add_option("--mode", mode)->check(CLI::IsMember({"full", "random"}));
    census->add_option("--size", size, "subset size (random mode)");
    census->add_option("--trials", trials);
    census->add_option("--seed", seed);
    census->add_option("--out", out, "output CSV path (default stdout)");

    auto* obs = app.add_subcommand("ff-obstruction", "sqrt(3) obstruction scan over primes");
    std::uint32_t qmax = 30;
    int obs_d = 2;
    std::string obs_out;
    obs->add_option("--qmax", qmax)->required();
    obs->add_option("--d", obs_d);
    obs->add_option("--out", obs_out);

    auto* thr = app.add_subcommand("ff-threshold", "random-subset side-class realization sweep");
    std::uint32_t tq = 5;
    int td = 4, ttrials = 5;
    std::string tsizes = "50,150,400,625", tout;
    std::uint64_t tseed = 1;
    thr->add_option("--q", tq)->required();
    thr->add_option("--d", td)->required();
    thr->add_option("--sizes", tsizes);
    thr->add_option("--trials", ttrials);
    thr->add_option("--seed", tseed);
    thr->add_option("--out", tout);

    auto* sig = app.add_subcommand("sigma-hat", "configuration-surface Fourier transform");
    int sd = 3, nodes = 0;
    std::vector<double> xi, eta;
    bool oracle = false;
    long mc_samples = 100000;
    std::uint64_t sseed = 1;
    std::string sout;
    sig->add_option("--d", sd)->required();
    sig->add_option("--xi", xi, "xi components")->expected(-1);
    sig->add_option("--eta", eta, "eta components")->expected(-1);
    sig->add_flag("--oracle", oracle, "use the Haar Monte Carlo oracle");
    sig->add_option("--nodes", nodes, "fixed nodes per angle (0 = auto)");
    sig->add_option("--mc-samples", mc_samples);
    sig->add_option("--seed", sseed);
    sig->add_option("--out", sout);

    auto* dec = app.add_subcommand("decay-fit", "log-log decay fit of |sigma_hat| along a ray");
    int dd = 3, npoints = 5;
    std::uint64_t dir_seed = 1;
    double rmin = 4.0, rmax = 64.0;
    std::string pair_mode = "parallel", dout, dcsv;
    dec->add_option("--d", dd)->required();
    dec->add_option("--dir-seed", dir_seed);
    dec->add_option("--rmin", rmin);
    dec->add_option("--rmax", rmax);
    dec->add_option("--npoints", npoints);
    dec->add_option("--pair", pair_mode)->check(CLI::IsMember({"parallel", "independent"}));
    dec->add_option("--out", dout);
    dec->add_option("--csv-out", dcsv);

    auto* fb = app.add_subcommand("fractal-build", "build a keep-pattern Cantor measure");
    int fd = 2, fn = 64, fdepth = 4, fsub = 2;
    std::uint64_t fkeep = 9;
    std::string fout = "measure.bin";
    fb->add_option("--d", fd)->required();
    fb->add_option("--n", fn)->required();
    fb->add_option("--keep", fkeep, "bitmask over the subdiv^d subcells")->required();
    fb->add_option("--depth", fdepth)->required();
    fb->add_option("--subdiv", fsub)->check(CLI::IsMember({2, 4}));
    fb->add_option("--out", fout);

    auto* tc = app.add_subcommand("triple-corr", "frequency-side configuration measure");
    double rcut = 8.0, tc_t0 = 0.25, tc_delta = 0.0;
    int nt = 32, rot = 8;
    bool tc_spatial = false;
    std::uint64_t tc_seed = 17;
    std::string tc_out;
    tc->add_option("--measure", measure, "GridMeasure file")->required();
    tc->add_option("--rcut", rcut);
    tc->add_option("--t0", tc_t0);
    tc->add_option("--delta", tc_delta, "mollify before the run (0 = as stored)");
    tc->add_option("--nt", nt);
    tc->add_flag("--spatial", tc_spatial, "also run the spatial oracle");
    tc->add_option("--rot-samples", rot);
    tc->add_option("--seed", tc_seed);
    tc->add_option("--out", tc_out);

    auto* ts = app.add_subcommand("tail-scan", "eq-goal tail/block decay scan");
    std::string ts_measure, ts_rlist = "1,1.5,2,3", ts_out;
    double ts_t = 0.5;
    ts->add_option("--measure", ts_measure)->required();
    ts->add_option("--t", ts_t);
    ts->add_option("--r-list", ts_rlist);
    ts->add_option("--out", ts_out);

    auto* pos = app.add_subcommand("positivity", "spatial vs frequency positivity table");
    std::string pos_measure, pos_deltas = "0.25,0.125,0.0625", pos_out;
    double pos_t0 = 0.25, pos_rcut = 0.0;
    int pos_rot = 8;
    std::uint64_t pos_seed = 17;
    pos->add_option("--measure", pos_measure)->required();
    pos->add_option("--deltas", pos_deltas, "descending mollification scales");
    pos->add_option("--t0", pos_t0);
    pos->add_option("--rcut", pos_rcut, "frequency cutoff (0 = N/2)");
    pos->add_option("--rot-samples", pos_rot);
    pos->add_option("--seed", pos_seed);
    pos->add_option("--out", pos_out);

    auto* spv = app.add_subcommand("sp-verify", "stationary-phase invariant battery");
    int vd = 3, vtrials = 50;
    std::uint64_t vseed = 1;
    std::string vout;
    spv->add_option("--d", vd)->required();
    spv->add_option("--seed", vseed);
    spv->add_option("--trials", vtrials);
    spv->add_option("--out", vout);

    auto* li = app.add_subcommand("lemma-int", "stratified Monte Carlo for the annulus integral");
    int ld = 3;
    long lsamples = 200000;
    std::uint64_t lseed = 1;
    std::string lrho = "8,16,32,64", lout;
    li->add_option("--d", ld)->required();
    li->add_option("--rho-grid", lrho);
    li->add_option("--samples", lsamples);
    li->add_option("--seed", lseed);
    li->add_option("--out", lout);

    auto* acc = app.add_subcommand("accept", "run the acceptance criteria battery");
    std::string profile = "quick";
    int only = 0;
    acc->add_option("--profile", profile)->check(CLI::IsMember({"quick", "full"}));
    acc->add_option("--only", only, "run a single criterion (1-10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (census->parsed())
            return run_ff_census(q, d, mode, size, trials, seed, out);
        if (obs->parsed()) return run_ff_obstruction(qmax, obs_d, obs_out);
        if (thr->parsed()) return run_ff_threshold(tq, td, tsizes, ttrials, tseed, tout);
        if (sig->parsed())
            return run_sigma_hat(sd, xi, eta, oracle, nodes, mc_samples, sseed, sout);
        if (dec->parsed())
            return run_decay_fit(dd, dir_seed, rmin, rmax, npoints, pair_mode, dout, dcsv);
        if (fb->parsed()) return run_fractal_build(fd, fn, fkeep, fdepth, fsub, fout);
        if (tc->parsed())
            return run_triple_corr(measure, rcut, tc_t0, tc_delta, nt, tc_spatial, rot, tc_seed,
                                   tc_out);
        if (ts->parsed()) return run_tail_scan(ts_measure, ts_t, ts_rlist, ts_out);
        if (pos->parsed())
            return run_positivity(pos_measure, pos_deltas, pos_t0, pos_rcut, pos_rot, pos_seed,
                                  pos_out);
        if (spv->parsed()) return run_sp_verify(vd, vseed, vtrials, vout);
        if (li->parsed()) return run_lemma_int(ld, lrho, lsamples, lseed, lout);
        if (acc->parsed()) {
            auto prof = profile == "full" ? accept::Profile::full : accept::Profile::quick;
            auto res = accept::run_acceptance(prof, std::cout, only);
            int fails = 0;
            for (const auto& c : res)
                if (!c.pass) ++fails;
            return fails == 0 ? kExitOk : 1;
        }
    } catch (const surf::nyquist_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitRefusal;
    } catch (const std::out_of_range& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitRefusal;
    } catch (const std::invalid_argument& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::domain_error& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitParse;
}
