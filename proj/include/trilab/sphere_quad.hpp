#pragma once

#include <vector>

namespace trilab {

// Gauss-Legendre nodes/weights on [-1,1], Newton on the recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Fourier transform of the uniform probability measure on the unit sphere
// S^{k-1} in R^k, evaluated at radius r >= 0.  k=1 is the two-point measure
// {+-1}.  Closed forms for odd k, std::cyl_bessel_j for k=2,4.  Supports
// k <= 6.
double sphere_ft(int k, double r);

// Product quadrature for integrals over S^{d-1} of functions that depend on
// x only through (x.u1, x.u2) for an orthonormal pair u1,u2:
//   E[F] = sum_i w[i] F(c1[i], c2[i]) / wsum
// Polar angle theta from the u1 pole carries the (sin theta)^{d-2} factor,
// the second angle the (sin phi)^{d-3} factor; both Gauss-Legendre mapped to
// [0,pi].  d=2 uses uniform angles on the circle.
struct SphereRule {
    std::vector<double> c1, c2, w;
    double wsum = 0.0;
};

SphereRule make_sphere_rule(int d, int nodes_per_angle);

// Nyquist-style node budget: 8 nodes per unit frequency per great circle.
int sphere_nodes_required(double freq_sum);

}  // namespace trilab
