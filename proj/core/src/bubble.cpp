#include "bnlab/bubble.hpp"

#include <cmath>
#include <string>

#include "bnlab/errors.hpp"
#include "bnlab/quad1d.hpp"

namespace bnlab::bubble {

namespace {

double dist_sq(Point x, Point xi) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xi[i];
        s += d * d;
    }
    return s;
}

} // namespace

DimensionConstants DimensionConstants::make(int n, double b_n) {
    if (n != 4 && n != 5)
        throw config_error("DimensionConstants: n must be 4 or 5, got " + std::to_string(n));
    DimensionConstants c;
    c.n = n;
    c.alpha_n = std::pow(static_cast<double>(n * (n - 2)), (n - 2) / 4.0);
    c.omega_n = 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
    c.gamma_n = 1.0 / ((n - 2) * c.omega_n);
    c.two_star = 2.0 * n / (n - 2.0);
    c.b_n = b_n;
    return c;
}

void BubbleParams::validate() const {
    if (n != 4 && n != 5) throw config_error("BubbleParams: n must be 4 or 5");
    if (!(mu > 0.0)) throw argument_error("BubbleParams: mu must be positive");
    if (xi.size() != static_cast<std::size_t>(n))
        throw argument_error("BubbleParams: xi dimension mismatch");
    if (beta != 1.0 && beta != -1.0) throw argument_error("BubbleParams: beta must be +-1");
}

double eval_bubble(Point x, const BubbleParams& p) {
    p.validate();
    const auto c = DimensionConstants::make(p.n);
    const double q = p.mu * p.mu + dist_sq(x, p.xi);
    return c.alpha_n * std::pow(p.mu, (p.n - 2) / 2.0) * std::pow(q, -(p.n - 2) / 2.0);
}

double eval_bubble_derivative(Point x, const BubbleParams& p, int ell) {
    p.validate();
    if (ell < 0 || ell > p.n)
        throw argument_error("eval_bubble_derivative: ell out of range 0.." + std::to_string(p.n));
    const auto c = DimensionConstants::make(p.n);
    const double r2 = dist_sq(x, p.xi);
    const double q = p.mu * p.mu + r2;
    const double qpow = std::pow(q, -p.n / 2.0);
    if (ell == 0) {
        return 0.5 * c.alpha_n * (p.n - 2) * std::pow(p.mu, (p.n - 4) / 2.0) * (r2 - p.mu * p.mu) *
               qpow;
    }
    return -c.alpha_n * (p.n - 2) * std::pow(p.mu, (p.n - 2) / 2.0) * (x[ell - 1] - p.xi[ell - 1]) *
           qpow;
}

double eval_projected_bubble(Point x, const BubbleParams& p, const RegularPartProvider& domain) {
    const auto c = DimensionConstants::make(p.n);
    const double h = domain.regular_part(x, p.xi);
    return eval_bubble(x, p) - c.alpha_n * std::pow(p.mu, (p.n - 2) / 2.0) * h;
}

double eval_projected_derivative(Point x, const BubbleParams& p, int ell,
                                 const RegularPartProvider& domain) {
    const auto c = DimensionConstants::make(p.n);
    const double psi = eval_bubble_derivative(x, p, ell);
    if (ell == 0) {
        const double h = domain.regular_part(x, p.xi);
        return psi - 0.5 * c.alpha_n * (p.n - 2) * std::pow(p.mu, (p.n - 4) / 2.0) * h;
    }
    const Vec grad_h = domain.regular_part_gradient_xi(x, p.xi);
    return psi - c.alpha_n * std::pow(p.mu, (p.n - 2) / 2.0) * grad_h[ell - 1];
}

double nonlinearity(double s, int n, int order) {
    if (n != 4 && n != 5) throw config_error("nonlinearity: n must be 4 or 5");
    if (order < 0 || order > 2) throw argument_error("nonlinearity: order must be 0, 1 or 2");
    const double p = 4.0 / (n - 2);
    switch (order) {
        case 0:
            return std::pow(std::abs(s), p) * s;
        case 1:
            return (p + 1.0) * std::pow(std::abs(s), p);
        default:
            if (s == 0.0) return 0.0; // continuous extension (exact for n=4 too)
            return p * (p + 1.0) * std::pow(std::abs(s), p - 1.0) * (s > 0 ? 1.0 : -1.0);
    }
}

double nonlinearity_increment(double base, double delta, int n) {
    if (base == 0.0) return nonlinearity(delta, n, 0);
    const double w = delta / base;
    if (std::abs(w) >= 0.5 || !(1.0 + w > 0.0))
        return nonlinearity(base + delta, n, 0) - nonlinearity(base, n, 0);
    const double q = (n + 2.0) / (n - 2.0);
    // f(b(1+w)) = f(b) (1+w)^q for 1+w > 0; expm1/log1p keep the difference
    // fully significant.
    return nonlinearity(base, n, 0) * std::expm1(q * std::log1p(w));
}

namespace {

// Radial integrand r^{n-1} g(r) integrated over (0, inf) by splitting at 1
// and mapping the tail r = 1/t.
double radial_integral(int n, const Fn1D& g, double rel_tol) {
    auto inner = [&](double r) { return std::pow(r, n - 1) * g(r); };
    auto outer = [&](double t) {
        const double r = 1.0 / t;
        return std::pow(r, n - 1) * g(r) / (t * t);
    };
    const double a = adaptive_quad(inner, 0.0, 1.0, rel_tol);
    const double b = adaptive_quad(outer, 1e-9, 1.0, rel_tol);
    return a + b;
}

} // namespace

BubbleIntegrals bubble_integrals(int n) {
    if (n != 4 && n != 5) throw config_error("bubble_integrals: n must be 4 or 5");
    const auto c = DimensionConstants::make(n);
    const double a = c.alpha_n;
    const double nm2 = n - 2.0;
    const double rel = 1e-12;

    auto u = [&](double r) { return a * std::pow(1.0 + r * r, -nm2 / 2.0); };
    auto grad_u = [&](double r) { return a * nm2 * r * std::pow(1.0 + r * r, -n / 2.0); };

    BubbleIntegrals out;
    out.critical_power =
        c.omega_n * radial_integral(n, [&](double r) { return std::pow(u(r), c.two_star); }, rel);
    out.subcritical_power = c.omega_n * radial_integral(
                                n, [&](double r) { return std::pow(u(r), (n + 2.0) / nm2); }, rel);
    out.grad_sq =
        c.omega_n * radial_integral(n, [&](double r) { return grad_u(r) * grad_u(r); }, rel);
    out.l2 = 0.0;
    if (n == 5)
        out.l2 = c.omega_n * radial_integral(n, [&](double r) { return u(r) * u(r); }, rel);
    out.rel_err = 1e-10;

    if (!(out.critical_power > 0.0) || !(out.subcritical_power > 0.0) || !(out.grad_sq > 0.0))
        throw numerical_error("bubble_integrals: quadrature returned a non-positive value");
    return out;
}

double l2_mass_in_ball(int n, double R) {
    const auto c = DimensionConstants::make(n);
    auto u = [&](double r) { return c.alpha_n * std::pow(1.0 + r * r, -(n - 2.0) / 2.0); };
    return c.omega_n *
           adaptive_quad([&](double r) { return std::pow(r, n - 1) * u(r) * u(r); }, 0.0, R, 1e-12);
}

} // namespace bnlab::bubble
