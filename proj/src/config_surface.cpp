#include "trilab/config_surface.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "trilab/sphere_quad.hpp"

namespace trilab::surf {

namespace {

// orthonormal u1,u2 with span{a,b} inside span{u1,u2}
void plane_frame(const std::vector<double>& a, const std::vector<double>& b,
                 std::vector<double>& u1, std::vector<double>& u2) {
    const int d = int(a.size());
    u1.assign(d, 0.0);
    u2.assign(d, 0.0);
    double na = norm2(a);
    double nb = norm2(b);
    if (na > 1e-14) {
        for (int i = 0; i < d; ++i) u1[i] = a[i] / na;
    } else if (nb > 1e-14) {
        for (int i = 0; i < d; ++i) u1[i] = b[i] / nb;
    } else {
        u1[0] = 1.0;
    }
    double bp = dot(b, u1);
    std::vector<double> w(d);
    for (int i = 0; i < d; ++i) w[i] = b[i] - bp * u1[i];
    double nw = norm2(w);
    if (nw > 1e-10 * std::max(1.0, nb)) {
        for (int i = 0; i < d; ++i) u2[i] = w[i] / nw;
        return;
    }
    for (int axis = 0; axis < d; ++axis) {
        for (int i = 0; i < d; ++i) w[i] = (i == axis ? 1.0 : 0.0) - u1[axis] * u1[i];
        nw = norm2(w);
        if (nw > 0.5) {
            for (int i = 0; i < d; ++i) u2[i] = w[i] / nw;
            return;
        }
    }
    throw std::logic_error("plane_frame: no orthogonal completion");
}

int resolve_nodes(const FreqPair& pair, const QuadratureSpec& spec) {
    const double fsum = norm2(pair.xi) + norm2(pair.eta);
    const int need = sphere_nodes_required(fsum);
    if (spec.sphere_nodes == 0) return need;
    if (spec.sphere_nodes < need)
        throw nyquist_error("sigma_hat_quad: " + std::to_string(spec.sphere_nodes) +
                            " nodes per angle < required " + std::to_string(need) +
                            " for |xi|+|eta| = " + std::to_string(fsum));
    return spec.sphere_nodes;
}

}  // namespace

McValue sigma_hat_mc(const FreqPair& pair, const QuadratureSpec& spec) {
    const int d = pair.dim();
    if (spec.mc_samples < 1000)
        throw std::invalid_argument("sigma_hat_mc: mc_samples < 1e3");
    Rng rng(spec.seed);
    // base pair x0 = (0,...,0,1), y0 = (sqrt3/2, 0,...,0, 1/2)
    std::vector<double> g(std::size_t(d) * d);
    double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
    const long n = spec.mc_samples;
    for (long s = 0; s < n; ++s) {
        for (auto& v : g) v = rng.normal();
        // modified Gram-Schmidt on columns; R_ii > 0 makes this Haar on O(d)
        for (int c = 0; c < d; ++c) {
            for (int p = 0; p < c; ++p) {
                double pr = 0;
                for (int r = 0; r < d; ++r) pr += g[r * d + c] * g[r * d + p];
                for (int r = 0; r < d; ++r) g[r * d + c] -= pr * g[r * d + p];
            }
            double nn = 0;
            for (int r = 0; r < d; ++r) nn += g[r * d + c] * g[r * d + c];
            nn = std::sqrt(nn);
            if (nn < 1e-300) { c--; for (auto& v : g) v = rng.normal(); continue; }
            for (int r = 0; r < d; ++r) g[r * d + c] /= nn;
        }
        double phase = 0.0;
        const double rt3h = std::sqrt(3.0) / 2.0;
        for (int r = 0; r < d; ++r) {
            double gx = g[r * d + (d - 1)];
            double gy = rt3h * g[r * d + 0] + 0.5 * g[r * d + (d - 1)];
            phase += gx * pair.xi[r] + gy * pair.eta[r];
        }
        double re = std::cos(-2.0 * M_PI * phase);
        double im = std::sin(-2.0 * M_PI * phase);
        sum_re += re; sum_im += im;
        sq_re += re * re; sq_im += im * im;
    }
    McValue out;
    out.mean = cdouble(sum_re / n, sum_im / n);
    double var_re = std::max(0.0, sq_re / n - (sum_re / n) * (sum_re / n));
    double var_im = std::max(0.0, sq_im / n - (sum_im / n) * (sum_im / n));
    out.se_re = std::sqrt(var_re / n);
    out.se_im = std::sqrt(var_im / n);
    return out;
}

cdouble sigma_hat_quad_with(const FreqPair& pair, const QuadratureSpec& spec, SphereFtFn ft) {
    const int d = pair.dim();
    const int nodes = resolve_nodes(pair, spec);

    std::vector<double> a(d), u1, u2;
    for (int i = 0; i < d; ++i) a[i] = pair.xi[i] + 0.5 * pair.eta[i];
    plane_frame(a, pair.eta, u1, u2);
    const double a1 = dot(a, u1), a2 = dot(a, u2);
    const double b1 = dot(pair.eta, u1), b2 = dot(pair.eta, u2);
    const double bn2 = dot(pair.eta, pair.eta);
    const double rt3h = std::sqrt(3.0) / 2.0;

    const SphereRule rule = make_sphere_rule(d, nodes);
    double acc_re = 0.0, acc_im = 0.0;
    for (std::size_t k = 0; k < rule.w.size(); ++k) {
        const double xa = rule.c1[k] * a1 + rule.c2[k] * a2;
        const double xb = rule.c1[k] * b1 + rule.c2[k] * b2;
        const double perp = std::sqrt(std::max(bn2 - xb * xb, 0.0));
        const double amp = ft(d - 1, rt3h * perp) * rule.w[k];
        acc_re += amp * std::cos(2.0 * M_PI * xa);
        acc_im -= amp * std::sin(2.0 * M_PI * xa);
    }
    return cdouble(acc_re / rule.wsum, acc_im / rule.wsum);
}

cdouble sigma_hat_quad(const FreqPair& pair, const QuadratureSpec& spec) {
    return sigma_hat_quad_with(pair, spec, &sphere_ft);
}

double sigma_hat_closed2(double xi0, double xi1, double eta0, double eta1) {
    const double c = 0.5, s = std::sqrt(3.0) / 2.0;
    const double p0 = xi0 + (c * eta0 - s * eta1), p1 = xi1 + (s * eta0 + c * eta1);
    const double m0 = xi0 + (c * eta0 + s * eta1), m1 = xi1 + (-s * eta0 + c * eta1);
    const double lp = std::hypot(p0, p1), lm = std::hypot(m0, m1);
    return 0.5 * (sphere_ft(2, lp) + sphere_ft(2, lm));
}

std::optional<Gpi3Lengths> gpi3_lengths(const FreqPair& pair) {
    const double r1 = norm2(pair.xi), r2 = norm2(pair.eta);
    if (r1 < 1e-14 || r2 < 1e-14) return std::nullopt;
    double c = dot(pair.xi, pair.eta) / (r1 * r2);
    c = std::clamp(c, -1.0, 1.0);
    const double th = std::acos(c);
    const double lp = std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 + 2 * r1 * r2 * std::cos(th - M_PI / 3)));
    const double lm = std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 + 2 * r1 * r2 * std::cos(th + M_PI / 3)));
    Gpi3Lengths out{std::min(lp, lm), std::max(lp, lm)};
    return out;
}

std::optional<double> sigma_hat_bound(const FreqPair& pair) {
    const int d = pair.dim();
    const double r1 = norm2(pair.xi), r2 = norm2(pair.eta);
    if (r1 < 1e-14 || r2 < 1e-14) return std::nullopt;
    if (std::max(r1, r2) / std::min(r1, r2) > 4.0) return std::nullopt;
    double c = std::clamp(dot(pair.xi, pair.eta) / (r1 * r2), -1.0, 1.0);
    const double sinang = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (sinang < 1e-9) return std::nullopt;
    auto lens = gpi3_lengths(pair);
    if (!lens || lens->len_min < 1e-14) return std::nullopt;
    const double p = 0.5 * (d - 2);
    return std::pow(lens->len_min, -0.5) * std::pow(r1 * r2, -p) * std::pow(sinang, -p);
}

FitReport decay_exponent_fit(const FreqPair& direction, const std::vector<double>& r_grid,
                             const QuadratureSpec& spec) {
    if (r_grid.size() < 4)
        throw std::invalid_argument("decay_exponent_fit: need >= 4 radii");
    if (!std::is_sorted(r_grid.begin(), r_grid.end()))
        throw std::invalid_argument("decay_exponent_fit: radii must ascend");
    const double n1 = norm2(direction.xi), n2 = norm2(direction.eta);
    if (std::fabs(n1 - 1.0) > 1e-9 || std::fabs(n2 - 1.0) > 1e-9)
        throw std::invalid_argument("decay_exponent_fit: direction must have |xi| = |eta| = 1");
    const int d = direction.dim();
    std::vector<double> vals;
    vals.reserve(r_grid.size());
    for (double r : r_grid) {
        FreqPair p;
        p.xi.resize(d);
        p.eta.resize(d);
        for (int i = 0; i < d; ++i) {
            p.xi[i] = r * direction.xi[i];
            p.eta[i] = r * direction.eta[i];
        }
        vals.push_back(std::abs(sigma_hat_quad(p, spec)));
    }
    return fit_loglog(r_grid, vals);
}

// ---------------------------------------------------------------------------
// SigmaHatCache

namespace {

// Catmull-Rom on a uniform table, clamped ends.  t = index units.
inline double catmull(const double* f, int n, double t) {
    if (t <= 0.0) return f[0];
    if (t >= n - 1) return f[n - 1];
    int i = int(t);
    double x = t - i;
    auto at = [&](int k) { return f[std::clamp(k, 0, n - 1)]; };
    double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * x * (p2 - p0 + x * (2 * p0 - 5 * p1 + 4 * p2 - p3 + x * (3 * (p1 - p2) + p3 - p0)));
}

}  // namespace

SigmaHatCache::SigmaHatCache(int d, double r1max, double r2max)
    : d_(d), r1max_(r1max), r2max_(r2max) {
    if (d < 2 || d > 6) throw std::invalid_argument("SigmaHatCache: d out of range");
    if (r1max <= 0 || r2max <= 0) throw std::invalid_argument("SigmaHatCache: nonpositive range");
    build_table();
    validate();
}

double SigmaHatCache::j0_lookup(double r) const {
    return catmull(j0tab_.data(), int(j0tab_.size()), r / j0_h_);
}

void SigmaHatCache::build_table() {
    if (d_ == 2) {
        j0_rmax_ = r1max_ + r2max_ + 1.0;
        j0_h_ = 0.005;
        int n = int(std::ceil(j0_rmax_ / j0_h_)) + 4;
        j0tab_.resize(n);
        for (int i = 0; i < n; ++i) j0tab_[i] = sphere_ft(2, i * j0_h_);
        return;
    }

    h1_ = 0.02;
    h2_ = 0.02;
    hth_ = M_PI / 192.0;
    nr1_ = int(std::ceil(r1max_ / h1_)) + 3;
    nr2_ = int(std::ceil(r2max_ / h2_)) + 3;
    nth_ = int(std::ceil(M_PI / hth_)) + 1;
    tab_.assign(std::size_t(nr1_) * nr2_ * nth_, 0.0);

    // Build rule: the phase splits as -2pi(c1*a1 + sin(th_i) cos(phi_j) * a2),
    // so the phi sum is K(B) = sum_j w_j cos(B cos phi_j), a single 1-D
    // function shared by every table entry.
    const int n = sphere_nodes_required(r1max_ + r2max_);
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    std::vector<double> cth(n), sth(n), wth(n), wph(n), cph(n);
    for (int i = 0; i < n; ++i) {
        double th = 0.5 * M_PI * (gx[i] + 1.0);
        cth[i] = std::cos(th);
        sth[i] = std::sin(th);
        wth[i] = gw[i] * std::pow(sth[i], double(d_ - 2));
        double ph = 0.5 * M_PI * (gx[i] + 1.0);
        cph[i] = std::cos(ph);
        wph[i] = (d_ == 3) ? gw[i] : gw[i] * std::pow(std::sin(ph), double(d_ - 3));
    }
    const double bmax = 2.0 * M_PI * r1max_ + 1.0;
    const double hk = 0.01;
    const int nk = int(std::ceil(bmax / hk)) + 4;
    std::vector<double> ktab(nk);
    for (int m = 0; m < nk; ++m) {
        double B = m * hk, s = 0;
        for (int j = 0; j < n; ++j) s += wph[j] * std::cos(B * cph[j]);
        ktab[m] = s;
    }
    const double k0 = ktab[0];
    double wsum = 0;
    for (int i = 0; i < n; ++i) wsum += wth[i];

    // inner sphere transform factor depends on (i, r2) only
    const double rt3h = std::sqrt(3.0) / 2.0;
    auto worker = [&](int i1_lo, int i1_hi) {
        std::vector<double> fi(n);
        for (int i1 = i1_lo; i1 < i1_hi; ++i1) {
            const double r1 = i1 * h1_;
            for (int i2 = 0; i2 < nr2_; ++i2) {
                const double r2 = i2 * h2_;
                for (int i = 0; i < n; ++i) fi[i] = sphere_ft(d_ - 1, rt3h * r2 * sth[i]);
                double* row = &tab_[(std::size_t(i1) * nr2_ + i2) * nth_];
                for (int it = 0; it < nth_; ++it) {
                    const double tha = it * hth_;
                    const double aa1 = r1 * std::cos(tha) + 0.5 * r2;
                    const double aa2 = r1 * std::sin(tha);
                    double acc = 0;
                    for (int i = 0; i < n; ++i) {
                        const double A = 2.0 * M_PI * cth[i] * aa1;
                        const double B = std::fabs(2.0 * M_PI * sth[i] * aa2);
                        acc += wth[i] * fi[i] * catmull(ktab.data(), nk, B / hk) * std::cos(A);
                    }
                    row[it] = acc / (k0 * wsum);
                }
            }
        }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw == 1 || nr1_ < 8) {
        worker(0, nr1_);
    } else {
        std::vector<std::thread> pool;
        int chunk = (nr1_ + int(hw) - 1) / int(hw);
        for (unsigned t = 0; t < hw; ++t) {
            int lo = int(t) * chunk, hi = std::min(nr1_, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
}

double SigmaHatCache::table_lookup(double r1, double r2, double th) const {
    const double t1 = r1 / h1_, t2 = r2 / h2_, tt = th / hth_;
    const int i1 = std::clamp(int(t1), 0, nr1_ - 1);
    const int i2 = std::clamp(int(t2), 0, nr2_ - 1);
    double vals1[4];
    for (int a = -1; a <= 2; ++a) {
        const int j1 = std::clamp(i1 + a, 0, nr1_ - 1);
        double vals2[4];
        for (int b = -1; b <= 2; ++b) {
            const int j2 = std::clamp(i2 + b, 0, nr2_ - 1);
            const double* row = &tab_[(std::size_t(j1) * nr2_ + j2) * nth_];
            vals2[b + 1] = catmull(row, nth_, tt);
        }
        // cubic across r2 at fractional position
        double x = t2 - i2;
        vals1[a + 1] = vals2[1] + 0.5 * x * (vals2[2] - vals2[0] +
                          x * (2 * vals2[0] - 5 * vals2[1] + 4 * vals2[2] - vals2[3] +
                               x * (3 * (vals2[1] - vals2[2]) + vals2[3] - vals2[0])));
    }
    double x = t1 - i1;
    return vals1[1] + 0.5 * x * (vals1[2] - vals1[0] +
              x * (2 * vals1[0] - 5 * vals1[1] + 4 * vals1[2] - vals1[3] +
                   x * (3 * (vals1[1] - vals1[2]) + vals1[3] - vals1[0])));
}

double SigmaHatCache::eval(double r1, double r2, double cos_angle) const {
    if (r1 < -1e-12 || r2 < -1e-12)
        throw std::invalid_argument("SigmaHatCache::eval: negative radius");
    if (r1 > r1max_ + 1e-9 || r2 > r2max_ + 1e-9)
        throw std::out_of_range("SigmaHatCache::eval: radius beyond validated range");
    r1 = std::max(r1, 0.0);
    r2 = std::max(r2, 0.0);
    const double th = std::acos(std::clamp(cos_angle, -1.0, 1.0));
    if (d_ == 2) {
        const double lp = std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 + 2 * r1 * r2 * std::cos(th - M_PI / 3)));
        const double lm = std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 + 2 * r1 * r2 * std::cos(th + M_PI / 3)));
        return 0.5 * (j0_lookup(lp) + j0_lookup(lm));
    }
    return table_lookup(r1, r2, th);
}

double SigmaHatCache::eval_pair(const double* a, const double* b, int d) const {
    if (d != d_) throw std::invalid_argument("SigmaHatCache::eval_pair: dimension mismatch");
    double r1 = 0, r2 = 0, dp = 0;
    for (int i = 0; i < d; ++i) {
        r1 += a[i] * a[i];
        r2 += b[i] * b[i];
        dp += a[i] * b[i];
    }
    r1 = std::sqrt(r1);
    r2 = std::sqrt(r2);
    const double c = (r1 < 1e-14 || r2 < 1e-14) ? 1.0 : dp / (r1 * r2);
    return eval(r1, r2, c);
}

void SigmaHatCache::validate() {
    // sigma is a probability measure, |sigma_hat| <= 1, so the 1e-4 relative
    // budget is enforced against that unit scale.
    Rng rng(0x5167a7u + d_);
    const int probes = (d_ == 2) ? 120 : 300;
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        const double r1 = rng.uniform01() * r1max_;
        const double r2 = rng.uniform01() * r2max_;
        const double th = rng.uniform01() * M_PI;
        FreqPair fp;
        fp.xi.assign(d_, 0.0);
        fp.eta.assign(d_, 0.0);
        fp.eta[0] = r2;
        fp.xi[0] = r1 * std::cos(th);
        fp.xi[1] = r1 * std::sin(th);
        QuadratureSpec qs;
        const double truth = sigma_hat_quad(fp, qs).real();
        const double got = eval(r1, r2, std::cos(th));
        worst = std::max(worst, std::fabs(got - truth));
    }
    validated_error_ = worst;
    if (worst > kTolRel)
        throw std::runtime_error("SigmaHatCache: validation failed, max error " +
                                 std::to_string(worst));
}

}  // namespace trilab::surf
