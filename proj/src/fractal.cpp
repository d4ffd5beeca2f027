#include "trilab/fractal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace trilab::frac {

namespace {

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= std::size_t(base);
    return r;
}

// decode cell index -> per-axis coordinates (row-major)
void decode(std::size_t idx, int d, int N, int* out) {
    for (int k = d - 1; k >= 0; --k) {
        out[k] = int(idx % std::size_t(N));
        idx /= std::size_t(N);
    }
}

std::uint64_t fnv1a(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

void GridMeasure::check_mass() const {
    double s = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::logic_error("GridMeasure: negative weight");
        s += w;
    }
    if (std::fabs(s - 1.0) > 1e-12)
        throw std::logic_error("GridMeasure: total mass " + std::to_string(s));
}

double GridMeasure::sup_density() const {
    double m = 0.0;
    for (double w : weights) m = std::max(m, w);
    return m * std::pow(double(N), d);
}

GridMeasure build_cantor(const CantorSpec& spec) {
    if (spec.d < 1 || spec.d > 4) throw std::invalid_argument("build_cantor: d out of range");
    if (spec.subdiv != 2 && spec.subdiv != 4)
        throw std::invalid_argument("build_cantor: subdiv must be 2 or 4");
    if (spec.keep.empty()) throw std::invalid_argument("build_cantor: empty keep pattern");
    const std::size_t ncells_sub = ipow(spec.subdiv, spec.d);
    for (int k : spec.keep)
        if (k < 0 || std::size_t(k) >= ncells_sub)
            throw std::invalid_argument("build_cantor: keep index out of range");
    std::size_t scale = ipow(spec.subdiv, spec.depth);
    if (spec.N < int(scale) || spec.N % int(scale) != 0)
        throw std::invalid_argument("build_cantor: N too small for depth (need subdiv^depth | N)");

    GridMeasure mu;
    mu.d = spec.d;
    mu.N = spec.N;
    mu.subdiv = spec.subdiv;
    mu.depth = spec.depth;
    mu.keep = spec.keep;
    mu.s_nominal = std::log(double(spec.keep.size())) / std::log(double(spec.subdiv));
    mu.weights.assign(ipow(spec.N, spec.d), 0.0);

    std::vector<int> sub(spec.d);
    std::function<void(std::vector<int>&, int, double)> fill =
        [&](std::vector<int>& origin, int level, double mass) {
            if (level == spec.depth) {
                const int sz = spec.N / int(ipow(spec.subdiv, level));
                const double w = mass / double(ipow(sz, spec.d));
                // iterate the sz^d block at origin
                std::vector<int> ofs(spec.d, 0);
                while (true) {
                    std::size_t idx = 0;
                    for (int k = 0; k < spec.d; ++k)
                        idx = idx * std::size_t(spec.N) + std::size_t(origin[k] + ofs[k]);
                    mu.weights[idx] += w;
                    int k = spec.d - 1;
                    for (; k >= 0; --k) {
                        if (++ofs[k] < sz) break;
                        ofs[k] = 0;
                    }
                    if (k < 0) break;
                }
                return;
            }
            const int child = spec.N / int(ipow(spec.subdiv, level + 1));
            for (int kp : spec.keep) {
                int v = kp;
                for (int k = spec.d - 1; k >= 0; --k) {
                    sub[k] = v % spec.subdiv;
                    v /= spec.subdiv;
                }
                std::vector<int> o2(spec.d);
                for (int k = 0; k < spec.d; ++k) o2[k] = origin[k] + sub[k] * child;
                fill(o2, level + 1, mass / double(spec.keep.size()));
            }
        };
    std::vector<int> origin(spec.d, 0);
    fill(origin, 0, 1.0);
    mu.check_mass();
    mu.c_mu_estimate = ball_condition_scan(mu, default_ball_radii(spec.N)).c_mu;
    return mu;
}

GridMeasure uniform_measure(int d, int N) {
    GridMeasure mu;
    mu.d = d;
    mu.N = N;
    mu.s_nominal = double(d);
    mu.weights.assign(ipow(N, d), 1.0 / double(ipow(N, d)));
    return mu;
}

GridMeasure point_mass(int d, int N) {
    GridMeasure mu;
    mu.d = d;
    mu.N = N;
    mu.s_nominal = 0.0;
    mu.weights.assign(ipow(N, d), 0.0);
    mu.weights[0] = 1.0;
    return mu;
}

std::vector<double> default_ball_radii(int N) {
    std::vector<double> rs;
    for (double r = 0.5; r >= 2.0 / N - 1e-12; r *= 0.5) rs.push_back(r);
    std::sort(rs.begin(), rs.end());
    return rs;
}

BallScanReport ball_condition_scan(const GridMeasure& mu, const std::vector<double>& radii,
                                   std::optional<double> s_override) {
    const int d = mu.d, N = mu.N;
    for (double r : radii)
        if (r < 2.0 / N - 1e-12 || r > 0.5 + 1e-12)
            throw std::invalid_argument("ball_condition_scan: radius outside [2/N, 1/2]");
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < mu.cells(); ++i)
        if (mu.weights[i] > 0.0) support.push_back(i);

    BallScanReport rep;
    rep.radii = radii;
    const double s = s_override.value_or(mu.s_nominal);
    std::vector<int> ci(d), cj(d);
    for (double r : radii) {
        // offsets with |o/N| <= r (balls in R^d, no torus wrap: mass outside
        // [0,1)^d is zero and wrapped cells must not be counted)
        const int rad = int(std::floor(r * N + 1e-9));
        std::vector<std::vector<int>> offsets;
        std::vector<int> ofs(d, -rad);
        while (true) {
            double n2 = 0;
            for (int k = 0; k < d; ++k) n2 += double(ofs[k]) * ofs[k];
            if (n2 <= double(r * N) * (r * N) + 1e-9) offsets.push_back(ofs);
            int k = d - 1;
            for (; k >= 0; --k) {
                if (++ofs[k] <= rad) break;
                ofs[k] = -rad;
            }
            if (k < 0) break;
        }
        double sup = 0.0;
        for (std::size_t c : support) {
            decode(c, d, N, ci.data());
            double ball = 0.0;
            for (const auto& o : offsets) {
                bool in = true;
                std::size_t idx = 0;
                for (int k = 0; k < d; ++k) {
                    cj[k] = ci[k] + o[k];
                    if (cj[k] < 0 || cj[k] >= N) { in = false; break; }
                    idx = idx * std::size_t(N) + std::size_t(cj[k]);
                }
                if (in) ball += mu.weights[idx];
            }
            sup = std::max(sup, ball);
        }
        rep.sup_mass.push_back(sup);
        if (sup > 0.0) rep.c_mu = std::max(rep.c_mu, sup / std::pow(r, s));
    }
    rep.fit = fit_loglog(rep.radii, rep.sup_mass);
    return rep;
}

SpectrumGrid grid_fourier(const GridMeasure& mu) {
    const int d = mu.d, N = mu.N;
    SpectrumGrid out;
    out.d = d;
    out.N = N;
    out.s_nominal = mu.s_nominal;
    out.values.assign(mu.cells(), {0.0, 0.0});
    for (std::size_t i = 0; i < mu.cells(); ++i) out.values[i] = mu.weights[i];

    // separable DFT, one axis at a time
    std::vector<std::complex<double>> tw(std::size_t(N) * N);
    for (int k = 0; k < N; ++k)
        for (int f = 0; f < N; ++f) {
            double ang = -2.0 * M_PI * double(k) * double(f) / double(N);
            tw[std::size_t(k) * N + f] = {std::cos(ang), std::sin(ang)};
        }
    std::vector<std::complex<double>> line(N), res(N);
    const std::size_t total = mu.cells();
    for (int axis = 0; axis < d; ++axis) {
        const std::size_t stride = ipow(N, d - 1 - axis);
        const std::size_t lines = total / std::size_t(N);
        for (std::size_t ln = 0; ln < lines; ++ln) {
            // base index of this line
            const std::size_t outer = ln / stride, inner = ln % stride;
            const std::size_t base = outer * stride * std::size_t(N) + inner;
            for (int k = 0; k < N; ++k) line[k] = out.values[base + std::size_t(k) * stride];
            for (int f = 0; f < N; ++f) {
                std::complex<double> acc = 0;
                for (int k = 0; k < N; ++k) acc += line[k] * tw[std::size_t(k) * N + f];
                res[f] = acc;
            }
            for (int f = 0; f < N; ++f) out.values[base + std::size_t(f) * stride] = res[f];
        }
    }

    // invariants: mu_hat(0) = 1, |mu_hat| <= 1, Hermitian symmetry
    if (std::abs(out.values[0] - std::complex<double>(1.0, 0.0)) > 1e-9)
        throw std::logic_error("grid_fourier: mu_hat(0) != 1");
    std::vector<int> ci(d);
    for (std::size_t i = 0; i < total; ++i) {
        if (std::abs(out.values[i]) > 1.0 + 1e-9)
            throw std::logic_error("grid_fourier: |mu_hat| > 1");
        decode(i, d, N, ci.data());
        std::size_t j = 0;
        for (int k = 0; k < d; ++k) j = j * std::size_t(N) + std::size_t((N - ci[k]) % N);
        if (std::abs(out.values[i] - std::conj(out.values[j])) > 1e-9)
            throw std::logic_error("grid_fourier: Hermitian symmetry violated");
    }
    return out;
}

double annulus_energy(const SpectrumGrid& spec, double R) {
    if (R < 2.0 || R > spec.N / 4.0 + 1e-9)
        throw std::invalid_argument("annulus_energy: need 2 <= R <= N/4");
    const int d = spec.d, N = spec.N;
    std::vector<int> ci(d);
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        decode(i, d, N, ci.data());
        double n2 = 0;
        for (int k = 0; k < d; ++k) {
            int f = ci[k] <= (N - 1) / 2 ? ci[k] : ci[k] - N;
            n2 += double(f) * f;
        }
        if (n2 >= R * R && n2 < 4.0 * R * R) acc += std::norm(spec.values[i]);
    }
    return acc;
}

GridMeasure mollify(const GridMeasure& mu, double delta) {
    const int d = mu.d, N = mu.N;
    const double rad = delta * N;
    if (rad < 2.0 - 1e-9) throw std::invalid_argument("mollify: delta below grid resolution 2/N");
    // sampled bump (1 - (|o|/rad)^2)^2, torus convolution
    const int irad = int(std::ceil(rad)) - 1;
    std::vector<std::vector<int>> offsets;
    std::vector<double> kernel;
    std::vector<int> ofs(d, -irad);
    double ksum = 0.0;
    while (true) {
        double n2 = 0;
        for (int k = 0; k < d; ++k) n2 += double(ofs[k]) * ofs[k];
        if (n2 < rad * rad) {
            double u = 1.0 - n2 / (rad * rad);
            offsets.push_back(ofs);
            kernel.push_back(u * u);
            ksum += u * u;
        }
        int k = d - 1;
        for (; k >= 0; --k) {
            if (++ofs[k] <= irad) break;
            ofs[k] = -irad;
        }
        if (k < 0) break;
    }
    for (double& kv : kernel) kv /= ksum;

    GridMeasure out = mu;
    out.delta = delta;
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    std::vector<int> ci(d);
    for (std::size_t i = 0; i < mu.cells(); ++i) {
        const double w = mu.weights[i];
        if (w == 0.0) continue;
        decode(i, d, N, ci.data());
        for (std::size_t m = 0; m < offsets.size(); ++m) {
            std::size_t idx = 0;
            for (int k = 0; k < d; ++k) {
                int c = ci[k] + offsets[m][k];
                c %= N;
                if (c < 0) c += N;
                idx = idx * std::size_t(N) + std::size_t(c);
            }
            out.weights[idx] += w * kernel[m];
        }
    }
    // renormalize away the last rounding dust
    double s = 0.0;
    for (double w : out.weights) s += w;
    for (double& w : out.weights) w /= s;
    out.check_mass();
    return out;
}

namespace {

// shared scaffolding for the frequency-pair sums: lattice points with
// |xi| <= r_cut whose negation is also representable (keeps the sum domain
// symmetric so the imaginary parts cancel structurally)
struct FreqPoints {
    std::vector<std::array<double, 4>> vec;  // signed frequency, d entries used
    std::vector<double> norm;
    std::vector<std::size_t> index;          // DFT index
};

FreqPoints collect_points(const SpectrumGrid& spec, double r_cut, bool symmetric_only) {
    const int d = spec.d, N = spec.N;
    FreqPoints pts;
    std::vector<int> ci(d);
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        decode(i, d, N, ci.data());
        double n2 = 0;
        bool asym = false;
        std::array<double, 4> v{0, 0, 0, 0};
        for (int k = 0; k < d; ++k) {
            int f = ci[k] <= (N - 1) / 2 ? ci[k] : ci[k] - N;
            if (f == -N / 2) asym = true;
            v[std::size_t(k)] = f;
            n2 += double(f) * f;
        }
        if (symmetric_only && asym) continue;
        if (n2 > r_cut * r_cut + 1e-12) continue;
        pts.vec.push_back(v);
        pts.norm.push_back(std::sqrt(n2));
        pts.index.push_back(i);
    }
    return pts;
}

}  // namespace

NuEstimate triple_correlation_freq(const SpectrumGrid& spec, const surf::SigmaHatCache& cache,
                                   double r_cut, double t0, int nt) {
    const int d = spec.d, N = spec.N;
    if (cache.dim() != d) throw std::invalid_argument("triple_correlation_freq: cache dimension");
    if (r_cut > N / 2.0 + 1e-9) throw std::invalid_argument("triple_correlation_freq: r_cut > N/2");
    if (t0 < 0.0 || t0 >= 1.0) throw std::invalid_argument("triple_correlation_freq: t0 outside [0,1)");
    if (nt < 4) throw std::invalid_argument("triple_correlation_freq: nt < 4");
    if (cache.r1max() + 1e-9 < r_cut || cache.r2max() + 1e-9 < r_cut)
        throw std::out_of_range("triple_correlation_freq: sigma cache does not cover t * r_cut");

    NuEstimate nu;
    nu.t0 = t0;
    nu.tail_R = r_cut;
    nu.t_grid.resize(nt);
    for (int i = 0; i < nt; ++i) nu.t_grid[i] = t0 + (1.0 - t0) * double(i) / double(nt - 1);

    const FreqPoints pts = collect_points(spec, r_cut, true);
    const std::size_t m = pts.vec.size();

    std::vector<double> dens_re(nt, 0.0), dens_im(nt, 0.0);
    double abs_scale = 0.0;  // sum |mu mu mu|, for the cache-error budget
    for (std::size_t a = 0; a < m; ++a) {
        const auto& ea = pts.vec[a];
        const std::complex<double> mua = spec.values[pts.index[a]];
        if (std::abs(mua) < 1e-15) continue;
        for (std::size_t b = 0; b < m; ++b) {
            const auto& eb = pts.vec[b];
            const std::complex<double> mub = spec.values[pts.index[b]];
            if (std::abs(mub) < 1e-15) continue;
            // third frequency -(eta + zeta), reduced mod N
            std::size_t idx3 = 0;
            for (int k = 0; k < d; ++k) {
                int f = -int(ea[std::size_t(k)]) - int(eb[std::size_t(k)]);
                int c = ((f % N) + N) % N;
                idx3 = idx3 * std::size_t(N) + std::size_t(c);
            }
            const std::complex<double> w = mua * mub * spec.values[idx3];
            const double wa = std::abs(w);
            if (wa < 1e-16) continue;
            abs_scale += wa;
            const double r1 = pts.norm[a], r2 = pts.norm[b];
            double c = 1.0;
            if (r1 > 1e-14 && r2 > 1e-14) {
                double dp = 0;
                for (int k = 0; k < d; ++k) dp += ea[std::size_t(k)] * eb[std::size_t(k)];
                c = std::clamp(dp / (r1 * r2), -1.0, 1.0);
            }
            for (int i = 0; i < nt; ++i) {
                const double t = nu.t_grid[i];
                // sigma_hat(-t eta, -t zeta); radii scale with t, angle fixed
                const double sg = cache.eval(t * r1, t * r2, c);
                dens_re[i] += w.real() * sg;
                dens_im[i] += w.imag() * sg;
            }
        }
    }

    nu.densities.resize(nt);
    double total = 0.0, total_im = 0.0, total16 = 0.0, wsum_abs = 0.0;
    const double dt = (1.0 - t0) / double(nt - 1);
    for (int i = 0; i < nt; ++i) {
        const double t = nu.t_grid[i];
        const double td = std::pow(t, d - 1);
        nu.densities[i] = dens_re[i] * td;
        const double trap = (i == 0 || i == nt - 1) ? 0.5 * dt : dt;
        total += nu.densities[i] * trap;
        total_im += dens_im[i] * td * trap;
        wsum_abs += td * trap;
        if (i % 2 == 0) {
            const double trap16 = (i == 0 || i == nt - 1) ? dt : 2.0 * dt;
            total16 += nu.densities[i] * trap16;
        }
    }
    nu.total_mass = total;
    nu.imag_total = std::fabs(total_im);
    nu.err_estimate = cache.validated_error() * abs_scale * wsum_abs + nu.imag_total +
                      std::fabs(total - total16);
    return nu;
}

namespace {

// multilinear interpolation of cell masses at a real-valued lattice position
double interp_weights(const GridMeasure& mu, const double* pos) {
    const int d = mu.d, N = mu.N;
    int base[4];
    double frac[4];
    for (int k = 0; k < d; ++k) {
        double f = std::floor(pos[k]);
        base[k] = int(f);
        frac[k] = pos[k] - f;
    }
    double acc = 0.0;
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = 0;
        for (int k = 0; k < d; ++k) {
            const int bit = (c >> k) & 1;
            w *= bit ? frac[k] : 1.0 - frac[k];
            int cc = base[k] + bit;
            cc %= N;
            if (cc < 0) cc += N;
            idx = idx * std::size_t(N) + std::size_t(cc);
        }
        acc += w * mu.weights[idx];
    }
    return acc;
}

}  // namespace

double triple_correlation_space(const GridMeasure& mu_delta, double t0, int rotation_samples,
                                std::uint64_t seed) {
    const int d = mu_delta.d, N = mu_delta.N;
    if (d < 2) throw std::invalid_argument("triple_correlation_space: d < 2");
    // t0 >= 2 delta keeps mollification clear of the nondegeneracy cutoff;
    // smaller t0 is still a well-defined sum, so it is not rejected here
    if (d > 2 && rotation_samples < 1)
        throw std::invalid_argument("triple_correlation_space: rotation_samples < 1");

    // offsets o with |o|/N in [t0, 1]; boundary cells enter with fractional
    // weight so the annulus quantization error stays subordinate
    const int orad = N;
    std::vector<int> ofs(d, -orad);
    std::vector<int> ci(d);
    Rng master(seed);
    const double rt3h = std::sqrt(3.0) / 2.0;

    double total = 0.0;
    std::size_t oindex = 0;
    while (true) {
        double n2 = 0;
        for (int k = 0; k < d; ++k) n2 += double(ofs[k]) * ofs[k];
        const double r = std::sqrt(n2);
        double wgt = std::min(r - t0 * N + 0.5, 1.0) * std::min(N - r + 0.5, 1.0);
        if (r < 1e-12) wgt = 0.0;
        if (wgt > 0.0) {
            wgt = std::min(wgt, 1.0);
            // partner directions: y = o/2 + (sqrt3/2)|o| w, w unit, w perp o
            std::vector<std::array<double, 4>> partners;
            if (d == 2) {
                partners.push_back({0.5 * ofs[0] - rt3h * ofs[1], 0.5 * ofs[1] + rt3h * ofs[0], 0, 0});
                partners.push_back({0.5 * ofs[0] + rt3h * ofs[1], 0.5 * ofs[1] - rt3h * ofs[0], 0, 0});
            } else {
                Rng rng = master.substream(oindex);
                for (int s = 0; s < rotation_samples; ++s) {
                    double w[4], pr = 0, nn = 0;
                    for (int k = 0; k < d; ++k) w[k] = rng.normal();
                    for (int k = 0; k < d; ++k) pr += w[k] * ofs[k];
                    for (int k = 0; k < d; ++k) {
                        w[k] -= pr * ofs[k] / n2;
                        nn += w[k] * w[k];
                    }
                    nn = std::sqrt(nn);
                    if (nn < 1e-12) { --s; continue; }
                    std::array<double, 4> p{0, 0, 0, 0};
                    for (int k = 0; k < d; ++k)
                        p[std::size_t(k)] = 0.5 * ofs[k] + rt3h * r * w[k] / nn;
                    partners.push_back(p);
                }
            }
            double acc = 0.0;
            for (const auto& p : partners) {
                double sum = 0.0;
                for (std::size_t z = 0; z < mu_delta.cells(); ++z) {
                    const double wz = mu_delta.weights[z];
                    if (wz == 0.0) continue;
                    decode(z, d, N, ci.data());
                    std::size_t idx2 = 0;
                    double pos[4];
                    for (int k = 0; k < d; ++k) {
                        int c = ci[k] + ofs[k];
                        c %= N;
                        if (c < 0) c += N;
                        idx2 = idx2 * std::size_t(N) + std::size_t(c);
                        pos[k] = double(ci[k]) + p[std::size_t(k)];
                    }
                    const double w2 = mu_delta.weights[idx2];
                    if (w2 == 0.0) continue;
                    sum += wz * w2 * interp_weights(mu_delta, pos);
                }
                acc += sum;
            }
            total += wgt * acc / double(partners.size());
        }
        int k = d - 1;
        for (; k >= 0; --k) {
            if (++ofs[k] <= orad) break;
            ofs[k] = -orad;
        }
        ++oindex;
        if (k < 0) break;
    }
    return total * std::pow(double(N), d) / sphere_area(d);
}

TailScanReport tail_bound_scan(const SpectrumGrid& spec, const surf::SigmaHatCache& cache,
                               const std::vector<double>& r_list, double t) {
    const int d = spec.d, N = spec.N;
    if (r_list.size() < 4 || !std::is_sorted(r_list.begin(), r_list.end()))
        throw std::invalid_argument("tail_bound_scan: need >= 4 ascending radii");
    if (r_list.back() > N / 2.0 + 1e-9)
        throw std::invalid_argument("tail_bound_scan: max R > N/2");
    if (t <= 0.0 || t > 1.0) throw std::invalid_argument("tail_bound_scan: t outside (0,1]");

    const FreqPoints pts = collect_points(spec, 2.0 * double(N), false);  // all points
    const std::size_t m = pts.vec.size();
    const double maxnorm = *std::max_element(pts.norm.begin(), pts.norm.end());
    if (t * maxnorm > cache.r1max() + 1e-9 || t * maxnorm > cache.r2max() + 1e-9)
        throw std::out_of_range("tail_bound_scan: sigma cache does not cover t * |xi|max");

    // exact integer |xi|^2 bins
    const int maxn2 = int(std::lround(maxnorm * maxnorm)) + 1;
    std::vector<double> hist(std::size_t(maxn2 + 1) * std::size_t(maxn2 + 1), 0.0);
    auto bin = [&](std::size_t a) { return int(std::lround(pts.norm[a] * pts.norm[a])); };

    for (std::size_t a = 0; a < m; ++a) {
        const std::complex<double> mua = spec.values[pts.index[a]];
        if (std::abs(mua) < 1e-15) continue;
        for (std::size_t b = 0; b < m; ++b) {
            const std::complex<double> mub = spec.values[pts.index[b]];
            if (std::abs(mub) < 1e-15) continue;
            std::size_t idx3 = 0;
            for (int k = 0; k < d; ++k) {
                int f = -int(pts.vec[a][std::size_t(k)]) - int(pts.vec[b][std::size_t(k)]);
                int c = ((f % N) + N) % N;
                idx3 = idx3 * std::size_t(N) + std::size_t(c);
            }
            const double wa = std::abs(mua * mub * spec.values[idx3]);
            if (wa < 1e-16) continue;
            const double r1 = pts.norm[a], r2 = pts.norm[b];
            double c = 1.0;
            if (r1 > 1e-14 && r2 > 1e-14) {
                double dp = 0;
                for (int k = 0; k < d; ++k) dp += pts.vec[a][std::size_t(k)] * pts.vec[b][std::size_t(k)];
                c = std::clamp(dp / (r1 * r2), -1.0, 1.0);
            }
            const double term = wa * std::fabs(cache.eval(t * r1, t * r2, c));
            const int ba = bin(a), bb = bin(b);
            hist[std::size_t(std::min(ba, bb)) * std::size_t(maxn2 + 1) + std::size_t(std::max(ba, bb))] += term;
        }
    }

    TailScanReport rep;
    rep.r_list = r_list;
    rep.t = t;
    rep.predicted_exponent = -(3.0 * spec.s_nominal - 2.0 * d - 3.0) / 2.0;
    for (double R : r_list) {
        const double R2 = R * R, R2hi = 4.0 * R * R;
        double tail = 0.0, block = 0.0;
        for (int i = 0; i <= maxn2; ++i)
            for (int j = i; j <= maxn2; ++j) {
                const double h = hist[std::size_t(i) * std::size_t(maxn2 + 1) + std::size_t(j)];
                if (h == 0.0) continue;
                if (double(i) > R2 + 1e-9) tail += h;
                if (double(i) >= R2 - 1e-9 && double(j) < R2hi - 1e-9) block += h;
            }
        rep.tail_sums.push_back(tail);
        rep.block_sums.push_back(block);
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < r_list.size(); ++i)
        if (rep.block_sums[i] > 0.0) {
            xs.push_back(r_list[i]);
            ys.push_back(rep.block_sums[i]);
        }
    rep.all_zero = ys.empty();
    if (xs.size() >= 2) {
        rep.block_fit = fit_loglog(xs, ys);
        rep.fitted_slope = rep.block_fit->slope;
    } else {
        rep.fitted_slope = -std::numeric_limits<double>::infinity();
    }
    return rep;
}

std::vector<PositivityRow> positivity_report(const GridMeasure& mu,
                                             const std::vector<double>& delta_list, double t0,
                                             const surf::SigmaHatCache& cache, double r_cut,
                                             int rotation_samples, std::uint64_t seed) {
    if (delta_list.empty()) throw std::invalid_argument("positivity_report: empty delta list");
    for (std::size_t i = 1; i < delta_list.size(); ++i)
        if (delta_list[i] >= delta_list[i - 1])
            throw std::invalid_argument("positivity_report: deltas must descend");
    std::vector<PositivityRow> rows;
    for (double delta : delta_list) {
        GridMeasure md = mollify(mu, delta);
        SpectrumGrid sp = grid_fourier(md);
        NuEstimate nu = triple_correlation_freq(sp, cache, r_cut, t0);
        PositivityRow row;
        row.delta = delta;
        row.nu_freq = nu.total_mass;
        row.spatial = triple_correlation_space(md, t0, rotation_samples, seed);
        row.gap = std::fabs(row.nu_freq - row.spatial);
        row.err_estimate = nu.err_estimate;
        row.positive = row.nu_freq > 3.0 * row.err_estimate;
        rows.push_back(row);
    }
    return rows;
}

void save_measure(const GridMeasure& mu, const std::string& path) {
    nlohmann::json hdr;
    hdr["d"] = mu.d;
    hdr["N"] = mu.N;
    hdr["s_nominal"] = mu.s_nominal;
    hdr["keep_pattern"] = mu.keep;
    hdr["depth"] = mu.depth;
    hdr["subdiv"] = mu.subdiv;
    hdr["delta"] = mu.delta;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)fnv1a(mu.weights.data(), mu.weights.size() * sizeof(double)));
    hdr["checksum"] = buf;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_measure: cannot open " + path);
    f << hdr.dump() << '\n';
    f.write(reinterpret_cast<const char*>(mu.weights.data()),
            std::streamsize(mu.weights.size() * sizeof(double)));
    if (!f) throw std::runtime_error("save_measure: write failed");
}

GridMeasure load_measure(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_measure: cannot open " + path);
    std::string line;
    std::getline(f, line);
    nlohmann::json hdr = nlohmann::json::parse(line);
    GridMeasure mu;
    mu.d = hdr.at("d").get<int>();
    mu.N = hdr.at("N").get<int>();
    mu.s_nominal = hdr.at("s_nominal").get<double>();
    mu.keep = hdr.value("keep_pattern", std::vector<int>{});
    mu.depth = hdr.value("depth", 0);
    mu.subdiv = hdr.value("subdiv", 0);
    mu.delta = hdr.value("delta", 0.0);
    mu.weights.resize(ipow(mu.N, mu.d));
    f.read(reinterpret_cast<char*>(mu.weights.data()),
           std::streamsize(mu.weights.size() * sizeof(double)));
    if (!f) throw std::runtime_error("load_measure: truncated payload");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)fnv1a(mu.weights.data(), mu.weights.size() * sizeof(double)));
    if (hdr.at("checksum").get<std::string>() != buf)
        throw std::runtime_error("load_measure: checksum mismatch");
    mu.check_mass();
    return mu;
}

}  // namespace trilab::frac
