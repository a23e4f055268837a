#pragma once

#include <span>
#include <vector>

#include "bnlab/linalg.hpp"

namespace bnlab::bubble {

using Point = std::span<const double>;

// Constants tied to the dimension: alpha_n = [n(n-2)]^{(n-2)/4},
// gamma_n = 1/((n-2) omega_n) with omega_n the surface area of S^{n-1},
// two_star = 2n/(n-2).  b_n is the Kirchhoff-Routh constant, configurable
// and diagnostic only.
struct DimensionConstants {
    int n;
    double alpha_n;
    double gamma_n;
    double omega_n;
    double two_star;
    double b_n;

    static DimensionConstants make(int n, double b_n = 0.0);
};

struct BubbleParams {
    double mu;      // height scale, > 0
    Vec xi;         // center, interior to the domain
    double beta;    // sign, +1 or -1
    int n;          // dimension, 4 or 5

    void validate() const;
};

// Interface the bubble module needs from a domain: the regular part H(x, xi)
// of the Green function and its xi-gradient.
class RegularPartProvider {
public:
    virtual ~RegularPartProvider() = default;
    virtual double regular_part(Point x, Point xi) const = 0;
    virtual Vec regular_part_gradient_xi(Point x, Point xi) const = 0;
};

// U_{mu,xi}(x) = alpha_n mu^{(n-2)/2} (mu^2 + |x-xi|^2)^{-(n-2)/2}
double eval_bubble(Point x, const BubbleParams& p);

// ell = 0: dU/dmu; ell = 1..n: dU/dx_ell.
double eval_bubble_derivative(Point x, const BubbleParams& p, int ell);

// Expansion-form projected bubble W~ = U - alpha_n mu^{(n-2)/2} H(x, xi).
// Satisfies -Lap(W~) = U^{(n+2)/(n-2)} exactly; boundary defect O(mu^{(n+2)/2}).
double eval_projected_bubble(Point x, const BubbleParams& p, const RegularPartProvider& domain);

// Leading part of the projected linearized kernel P psi^ell:
//   ell = 0: psi^0 - alpha_n ((n-2)/2) mu^{(n-4)/2} H(x, xi)
//   ell >= 1: psi^ell - alpha_n mu^{(n-2)/2} dH/dxi_ell(x, xi)
double eval_projected_derivative(Point x, const BubbleParams& p, int ell,
                                 const RegularPartProvider& domain);

// f(s) = |s|^{4/(n-2)} s and its first two derivatives.  order 2 at s = 0 for
// n = 5 returns 0 by continuous extension of the 1/3-power.
double nonlinearity(double s, int n, int order);

// f(base + delta) - f(base), computed without cancellation when delta is a
// small perturbation of a large base (bubble cores at tiny mu).
double nonlinearity_increment(double base, double delta, int n);

struct BubbleIntegrals {
    double critical_power;     // int U^{2n/(n-2)} over R^n
    double subcritical_power;  // int U^{(n+2)/(n-2)}
    double grad_sq;            // int |grad U|^2
    double l2;                 // int U^2 (n = 5 only; 0 for n = 4)
    double rel_err;            // quadrature error estimate
};

// High-accuracy radial quadratures of the standard integrals (rel err <= 1e-10).
BubbleIntegrals bubble_integrals(int n);

// int_{|x|<R} U_{1,0}^2 for n = 4 (grows like log R); used by the divergence test.
double l2_mass_in_ball(int n, double R);

} // namespace bnlab::bubble
