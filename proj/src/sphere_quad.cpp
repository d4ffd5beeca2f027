#include "trilab/sphere_quad.hpp"

#include <cmath>
#include <stdexcept>

namespace trilab {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double sphere_ft(int k, double r) {
    if (k < 1 || k > 6) throw std::invalid_argument("sphere_ft: k out of range");
    if (r < 0.0) throw std::invalid_argument("sphere_ft: negative radius");
    const double x = 2.0 * M_PI * r;
    // series around 0: 1 - x^2/(2k) + x^4/(8k(k+2))
    if (x < 1e-4) {
        double x2 = x * x;
        return 1.0 - x2 / (2.0 * k) + x2 * x2 / (8.0 * k * (k + 2.0));
    }
    switch (k) {
        case 1: return std::cos(x);
        case 2: return std::cyl_bessel_j(0.0, x);
        case 3: return std::sin(x) / x;
        case 4: return 2.0 * std::cyl_bessel_j(1.0, x) / x;
        case 5: return 3.0 * (std::sin(x) / x - std::cos(x)) / (x * x);
        case 6: return 8.0 * std::cyl_bessel_j(2.0, x) / (x * x);
    }
    return 0.0;  // unreachable
}

SphereRule make_sphere_rule(int d, int nodes_per_angle) {
    if (d < 2) throw std::invalid_argument("make_sphere_rule: d < 2");
    if (nodes_per_angle < 4) throw std::invalid_argument("make_sphere_rule: too few nodes");
    SphereRule rule;
    if (d == 2) {
        const int m = nodes_per_angle;
        rule.c1.resize(m);
        rule.c2.resize(m);
        rule.w.assign(m, 1.0);
        for (int j = 0; j < m; ++j) {
            double th = 2.0 * M_PI * j / m;
            rule.c1[j] = std::cos(th);
            rule.c2[j] = std::sin(th);
        }
        rule.wsum = double(m);
        return rule;
    }
    std::vector<double> gx, gw;
    gauss_legendre(nodes_per_angle, gx, gw);
    const int n = nodes_per_angle;
    rule.c1.reserve(std::size_t(n) * n);
    rule.c2.reserve(std::size_t(n) * n);
    rule.w.reserve(std::size_t(n) * n);
    for (int i = 0; i < n; ++i) {
        double th = 0.5 * M_PI * (gx[i] + 1.0);
        double wth = gw[i] * std::pow(std::sin(th), double(d - 2));
        double ct = std::cos(th), st = std::sin(th);
        for (int j = 0; j < n; ++j) {
            double ph = 0.5 * M_PI * (gx[j] + 1.0);
            double wph = (d == 3) ? gw[j] : gw[j] * std::pow(std::sin(ph), double(d - 3));
            rule.c1.push_back(ct);
            rule.c2.push_back(st * std::cos(ph));
            double w = wth * wph;
            rule.w.push_back(w);
            rule.wsum += w;
        }
    }
    return rule;
}

int sphere_nodes_required(double freq_sum) {
    int n = int(std::ceil(8.0 * freq_sum));
    return n < 64 ? 64 : n;
}

}  // namespace trilab
