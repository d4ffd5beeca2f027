#include "trilab/stationary_phase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trilab/config_surface.hpp"

namespace trilab::sp {

namespace {

const double kRt3 = std::sqrt(3.0);

void check_window(const LocalCoords& c) {
    if (c.u_prime.size() != c.v_prime.size())
        throw std::invalid_argument("LocalCoords: u'/v' size mismatch");
    if (c.norm() >= kChartWindow)
        throw std::domain_error("LocalCoords: outside the chart validity window");
}

void check_dims(const std::vector<double>& xi, const std::vector<double>& eta) {
    if (xi.size() != eta.size() || xi.size() < 2)
        throw std::invalid_argument("xi/eta dimension mismatch or d < 2");
}

double scale_of(const std::vector<double>& xi, const std::vector<double>& eta) {
    return norm2(xi) + norm2(eta);
}

}  // namespace

double LocalCoords::norm() const {
    double s = u1 * u1;
    for (double v : u_prime) s += v * v;
    for (double v : v_prime) s += v * v;
    return std::sqrt(s);
}

ChartPointPair chart(const LocalCoords& coords) {
    check_window(coords);
    const int d = coords.dim();
    const int m = d - 2;
    double up2 = 0.0, vp2 = 0.0, uv = 0.0;
    for (int i = 0; i < m; ++i) {
        up2 += coords.u_prime[i] * coords.u_prime[i];
        vp2 += coords.v_prime[i] * coords.v_prime[i];
        uv += coords.u_prime[i] * coords.v_prime[i];
    }
    const double u1 = coords.u1;
    const double u2 = u1 * u1 + up2;

    ChartPointPair out;
    out.x.assign(d, 0.0);
    out.y.assign(d, 0.0);
    out.x[0] = u1;
    for (int i = 0; i < m; ++i) out.x[1 + i] = coords.u_prime[i];
    out.x[d - 1] = 1.0 - 0.5 * u2;

    const double v1 = 0.5 * u1 - (kRt3 / 4.0) * u1 * u1 - (kRt3 / 12.0) * up2 -
                      vp2 / kRt3 + uv / kRt3;
    out.y[0] = kRt3 / 2.0 + v1;
    for (int i = 0; i < m; ++i) out.y[1 + i] = coords.v_prime[i];
    out.y[d - 1] = 0.5 - (kRt3 / 2.0) * u1 - 0.25 * u1 * u1 + 0.25 * up2 - uv;

    double nx = 0, ny = 0, nxy = 0;
    for (int i = 0; i < d; ++i) {
        nx += out.x[i] * out.x[i];
        ny += out.y[i] * out.y[i];
        nxy += (out.x[i] - out.y[i]) * (out.x[i] - out.y[i]);
    }
    out.res_x = std::sqrt(nx) - 1.0;
    out.res_y = std::sqrt(ny) - 1.0;
    out.res_xy = std::sqrt(nxy) - 1.0;
    return out;
}

ChartPointPair chart_exact(const LocalCoords& coords) {
    check_window(coords);
    const int d = coords.dim();
    const int m = d - 2;
    double up2 = 0.0, vp2 = 0.0, uv = 0.0;
    for (int i = 0; i < m; ++i) {
        up2 += coords.u_prime[i] * coords.u_prime[i];
        vp2 += coords.v_prime[i] * coords.v_prime[i];
        uv += coords.u_prime[i] * coords.v_prime[i];
    }
    const double u1 = coords.u1;

    ChartPointPair out;
    out.x.assign(d, 0.0);
    out.y.assign(d, 0.0);
    out.x[0] = u1;
    for (int i = 0; i < m; ++i) out.x[1 + i] = coords.u_prime[i];
    const double xd = std::sqrt(1.0 - (u1 * u1 + up2));
    out.x[d - 1] = xd;

    // y' = v' fixed; |y| = 1 and x.y = 1/2 pin (y1, yd); root near sqrt3/2
    const double c = uv;  // u'.v'
    const double k = (0.5 - c) / xd;
    const double a = 1.0 + (u1 / xd) * (u1 / xd);
    const double b = -2.0 * (u1 / xd) * k;
    const double cc = k * k - (1.0 - vp2);
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) throw std::domain_error("chart_exact: constraint set empty");
    const double sq = std::sqrt(disc);
    const double r1 = (-b + sq) / (2.0 * a);
    const double r2 = (-b - sq) / (2.0 * a);
    const double y1 = (std::fabs(r1 - kRt3 / 2.0) < std::fabs(r2 - kRt3 / 2.0)) ? r1 : r2;
    const double yd = (0.5 - u1 * y1 - c) / xd;
    out.y[0] = y1;
    for (int i = 0; i < m; ++i) out.y[1 + i] = coords.v_prime[i];
    out.y[d - 1] = yd;

    double nx = 0, ny = 0, nxy = 0;
    for (int i = 0; i < d; ++i) {
        nx += out.x[i] * out.x[i];
        ny += out.y[i] * out.y[i];
        nxy += (out.x[i] - out.y[i]) * (out.x[i] - out.y[i]);
    }
    out.res_x = std::sqrt(nx) - 1.0;
    out.res_y = std::sqrt(ny) - 1.0;
    out.res_xy = std::sqrt(nxy) - 1.0;
    return out;
}

double implicit_solve(double a1, double a2, double t) {
    if (a1 == 0.0) throw std::invalid_argument("implicit_solve: a1 = 0");
    return t / a1 - a2 * t * t / (a1 * a1 * a1);
}

std::vector<double> phase_gradient(const LocalCoords& coords, const std::vector<double>& xi,
                                   const std::vector<double>& eta) {
    check_window(coords);
    check_dims(xi, eta);
    const int d = int(xi.size());
    if (coords.dim() != d) throw std::invalid_argument("phase_gradient: coord/frequency dims");
    const int m = d - 2;
    const double u1 = coords.u1;
    const double xi1 = xi[0], xid = xi[d - 1];
    const double eta1 = eta[0], etad = eta[d - 1];

    std::vector<double> g(std::size_t(2 * d - 3), 0.0);
    g[0] = xi1 - u1 * xid + 0.5 * eta1 - (kRt3 / 2.0) * u1 * eta1 - (kRt3 / 2.0) * etad -
           0.5 * u1 * etad;
    for (int i = 0; i < m; ++i) {
        const double up = coords.u_prime[i], vp = coords.v_prime[i];
        g[1 + std::size_t(i)] = xi[1 + i] - up * xid - up * eta1 / (2.0 * kRt3) +
                                vp * eta1 / kRt3 + 0.5 * up * etad - vp * etad;
        g[1 + std::size_t(m + i)] = -2.0 * vp * eta1 / kRt3 + up * eta1 / kRt3 + eta[1 + i] -
                                    up * etad;
    }
    return g;
}

double phase_exact(const LocalCoords& coords, const std::vector<double>& xi,
                   const std::vector<double>& eta) {
    ChartPointPair p = chart_exact(coords);
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += p.x[i] * xi[i] + p.y[i] * eta[i];
    return s;
}

namespace {

LocalCoords unpack(const std::vector<double>& z, int d) {
    LocalCoords c;
    c.u1 = z[0];
    c.u_prime.assign(z.begin() + 1, z.begin() + 1 + (d - 2));
    c.v_prime.assign(z.begin() + 1 + (d - 2), z.end());
    return c;
}

std::vector<double> gradient_fd_step(const std::vector<double>& xi, const std::vector<double>& eta,
                                     double h) {
    const int d = int(xi.size());
    const int n = 2 * d - 3;
    std::vector<double> g(n);
    std::vector<double> z(n, 0.0);
    for (int i = 0; i < n; ++i) {
        z[i] = h;
        const double fp = phase_exact(unpack(z, d), xi, eta);
        z[i] = -h;
        const double fm = phase_exact(unpack(z, d), xi, eta);
        z[i] = 0.0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::vector<double> hessian_fd_step(const std::vector<double>& xi, const std::vector<double>& eta,
                                    double h) {
    const int d = int(xi.size());
    const int n = 2 * d - 3;
    std::vector<double> hess(std::size_t(n) * n);
    std::vector<double> z(n, 0.0);
    const double f0 = phase_exact(unpack(z, d), xi, eta);
    for (int i = 0; i < n; ++i) {
        z[i] = h;
        const double fp = phase_exact(unpack(z, d), xi, eta);
        z[i] = -h;
        const double fm = phase_exact(unpack(z, d), xi, eta);
        z[i] = 0.0;
        hess[std::size_t(i) * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v[4];
            const double ss[4][2] = {{h, h}, {h, -h}, {-h, h}, {-h, -h}};
            for (int k = 0; k < 4; ++k) {
                z[i] = ss[k][0];
                z[j] = ss[k][1];
                v[k] = phase_exact(unpack(z, d), xi, eta);
                z[i] = z[j] = 0.0;
            }
            const double val = (v[0] - v[1] - v[2] + v[3]) / (4.0 * h * h);
            hess[std::size_t(i) * n + j] = val;
            hess[std::size_t(j) * n + i] = val;
        }
    return hess;
}

}  // namespace

std::vector<double> gradient_fd(const std::vector<double>& xi, const std::vector<double>& eta,
                                double h) {
    check_dims(xi, eta);
    auto g1 = gradient_fd_step(xi, eta, h);
    auto g2 = gradient_fd_step(xi, eta, 0.5 * h);
    for (std::size_t i = 0; i < g1.size(); ++i) g2[i] = (4.0 * g2[i] - g1[i]) / 3.0;
    return g2;
}

std::vector<double> hessian_fd(const std::vector<double>& xi, const std::vector<double>& eta,
                               double h) {
    check_dims(xi, eta);
    if (h < 1e-4 || h > 1e-2) throw std::invalid_argument("hessian_fd: h outside [1e-4, 1e-2]");
    auto h1 = hessian_fd_step(xi, eta, h);
    auto h2 = hessian_fd_step(xi, eta, 0.5 * h);
    for (std::size_t i = 0; i < h1.size(); ++i) h2[i] = (4.0 * h2[i] - h1[i]) / 3.0;
    return h2;
}

double det_fd(const std::vector<double>& xi, const std::vector<double>& eta, double h) {
    auto m = hessian_fd(xi, eta, h);
    return det_inplace(m, 2 * int(xi.size()) - 3);
}

double critical_residual(const std::vector<double>& xi, const std::vector<double>& eta) {
    check_dims(xi, eta);
    const int d = int(xi.size());
    double r = std::fabs(xi[0] + 0.5 * eta[0] - (kRt3 / 2.0) * eta[d - 1]);
    for (int i = 1; i < d - 1; ++i) {
        r = std::max(r, std::fabs(xi[i]));
        r = std::max(r, std::fabs(eta[i]));
    }
    return r;
}

HessianClosedForm hessian_closed_form(const std::vector<double>& xi,
                                      const std::vector<double>& eta) {
    check_dims(xi, eta);
    const int d = int(xi.size());
    const double scale = scale_of(xi, eta);
    if (critical_residual(xi, eta) > 1e-10 * std::max(scale, 1e-30))
        throw std::domain_error("hessian_closed_form: pair is not admissible");
    const double xi1 = xi[0], xid = xi[d - 1];
    const double eta1 = eta[0], etad = eta[d - 1];

    HessianClosedForm out;
    out.block1 = -xid - (kRt3 / 2.0) * eta1 - 0.5 * etad;
    out.b2_uu = -xid - eta1 / (2.0 * kRt3) + 0.5 * etad;
    out.b2_uv = eta1 / kRt3 - etad;
    out.b2_vv = -2.0 * eta1 / kRt3;
    const double det2 = out.b2_uu * out.b2_vv - out.b2_uv * out.b2_uv;
    out.det = out.block1 * std::pow(det2, double(d - 2));
    out.first_factor = std::fabs(out.block1);
    out.det_factored =
        out.first_factor * std::pow(std::fabs((2.0 / kRt3) * (eta1 * xid - xi1 * etad)), double(d - 2));
    const double nxi = norm2(xi), neta = norm2(eta);
    double sinang = 0.0;
    if (nxi > 0 && neta > 0) {
        const double cross = std::fabs(xi1 * etad - xid * eta1);
        sinang = cross / (nxi * neta);
    }
    out.det_sin_form =
        out.first_factor * std::pow((2.0 / kRt3) * nxi * neta * sinang, double(d - 2));
    // explicit counterclockwise pi/3 rotation in the (first,last) plane
    std::vector<double> v(xi);
    v[0] += 0.5 * eta1 - (kRt3 / 2.0) * etad;
    v[d - 1] += (kRt3 / 2.0) * eta1 + 0.5 * etad;
    for (int i = 1; i < d - 1; ++i) v[i] += eta[i];
    out.gpi3_explicit = norm2(v);
    return out;
}

void random_admissible_pair(int d, Rng& rng, std::vector<double>& xi, std::vector<double>& eta) {
    // xi' = eta' = 0, xi1 pinned by the critical equation; reject almost
    // degenerate Hessians so relative determinant comparisons stay meaningful
    for (int attempt = 0; attempt < 1000; ++attempt) {
        xi.assign(std::size_t(d), 0.0);
        eta.assign(std::size_t(d), 0.0);
        eta[0] = rng.normal();
        eta[d - 1] = rng.normal();
        xi[d - 1] = rng.normal();
        xi[0] = (kRt3 / 2.0) * eta[d - 1] - 0.5 * eta[0];
        double s = std::sqrt(dot(xi, xi) + dot(eta, eta));
        if (s < 1e-6) continue;
        for (auto& v : xi) v /= s;
        for (auto& v : eta) v /= s;
        if (norm2(eta) < 0.15 || norm2(xi) < 0.15) continue;
        HessianClosedForm h = hessian_closed_form(xi, eta);
        const double det2 = h.b2_uu * h.b2_vv - h.b2_uv * h.b2_uv;
        if (std::fabs(h.block1) < 0.05) continue;
        if (d > 2 && std::fabs(det2) < 0.05) continue;
        return;
    }
    throw std::runtime_error("random_admissible_pair: rejection sampling failed");
}

LemmaIntResult lemma_int_quadrature(const std::vector<double>& eta, double rho, int d,
                                    long mc_samples, std::uint64_t seed) {
    if (int(eta.size()) != d) throw std::invalid_argument("lemma_int_quadrature: eta dim");
    if (d < 3) throw std::invalid_argument("lemma_int_quadrature: d < 3");
    if (mc_samples < 100000) throw std::invalid_argument("lemma_int_quadrature: mc_samples < 1e5");
    const double neta = norm2(eta);
    if (neta / rho < 0.5 || neta / rho > 2.0)
        throw std::invalid_argument("lemma_int_quadrature: |eta| not comparable to rho");

    std::vector<double> ehat(eta);
    for (auto& v : ehat) v /= neta;
    Rng rng(seed);

    // min-orientation |xi + g_{pi/3} eta| in polar coordinates (r, theta):
    //   L(r, theta)^2 = r^2 + |eta|^2 + 2 r |eta| min(cos(theta - pi/3), cos(theta + pi/3))
    // singular point at r0 = |eta|, theta0 = 2pi/3
    auto L_of = [&](double r, double th) {
        const double c = std::min(std::cos(th - M_PI / 3.0), std::cos(th + M_PI / 3.0));
        return std::sqrt(std::max(0.0, r * r + neta * neta + 2.0 * r * neta * c));
    };
    const double r0 = neta, th0 = 2.0 * M_PI / 3.0;
    const double umax = rho / 8.0;
    auto inside_box = [&](double r, double th) {
        const double a = r - r0, b = rho * (th - th0);
        return a * a + b * b < umax * umax;
    };

    const double wtheta = std::sqrt(M_PI) * std::tgamma(0.5 * (d - 1)) / std::tgamma(0.5 * d);
    const double area_sd2 = sphere_area(d - 1);
    const double zmain = (std::pow(2.0, d) - 1.0) * std::pow(rho, d) / d * wtheta * area_sd2;

    LemmaIntResult out;
    const long n_main = (mc_samples * 7) / 10;
    const long n_box = mc_samples - n_main;

    // main stratum: polar importance (r^{d-1}, sin^{d-2}); the sampling
    // density cancels the sin^{-(d-2)} angular singularity exactly
    double s1 = 0, s2 = 0;
    for (long i = 0; i < n_main; ++i) {
        const double r = rho * std::pow(1.0 + rng.uniform01() * (std::pow(2.0, d) - 1.0), 1.0 / d);
        double ct;
        if (d == 3) {
            // density sin^{d-2} theta d theta = dt in t = cos theta
            ct = rng.uniform(-1.0, 1.0);
        } else {
            // in t = cos theta the density is (1 - t^2)^{(d-3)/2}
            do {
                ct = rng.uniform(-1.0, 1.0);
            } while (rng.uniform01() >= std::pow(1.0 - ct * ct, 0.5 * (d - 3)));
        }
        const double th = std::acos(ct);
        double f = 0.0;
        if (!inside_box(r, th)) f = 1.0 / std::max(L_of(r, th), 1e-300);
        s1 += f;
        s2 += f * f;
    }
    const double mean_main = s1 / double(n_main);
    const double var_main = std::max(0.0, s2 / double(n_main) - mean_main * mean_main);
    const double val_main = zmain * mean_main;
    const double se_main = zmain * std::sqrt(var_main / double(n_main));

    // refinement stratum: 2-D polar around the singular point with density
    // proportional to 1/dist, so the |xi + g eta|^{-1} spike has bounded
    // importance ratio; the omega average is exact (integrand is omega-free)
    double b1 = 0, b2 = 0;
    bool any_box = false;
    for (long i = 0; i < n_box; ++i) {
        const double u = rng.uniform01() * umax;
        const double psi = rng.uniform01() * 2.0 * M_PI;
        const double r = r0 + u * std::cos(psi);
        const double th = th0 + u * std::sin(psi) / rho;
        double f = 0.0;
        if (r >= rho && r < 2.0 * rho && th >= 0.0 && th <= M_PI && inside_box(r, th)) {
            any_box = true;
            // dr dtheta = (u / rho) du dpsi; sample density 1/(umax 2pi)
            const double g = std::pow(r, d - 1) * area_sd2 / std::max(L_of(r, th), 1e-300);
            f = g * (u / rho) * umax * 2.0 * M_PI / std::max(u, 1e-300);
        }
        b1 += f;
        b2 += f * f;
    }
    const double mean_box = n_box > 0 ? b1 / double(n_box) : 0.0;
    const double var_box =
        n_box > 0 ? std::max(0.0, b2 / double(n_box) - mean_box * mean_box) : 0.0;
    const double val_box = mean_box;
    const double se_box = n_box > 0 ? std::sqrt(var_box / double(n_box)) : 0.0;
    out.stratum_underflow = (n_box > 0 && !any_box);

    out.value = val_main + val_box;
    out.stderr_est = std::sqrt(se_main * se_main + se_box * se_box);
    out.ratio = out.value / std::pow(rho, d - 1);
    return out;
}

}  // namespace trilab::sp
