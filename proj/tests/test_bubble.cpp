#include "doctest.h"

#include <cmath>
#include <random>

#include "bnlab/bubble.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/domain.hpp"
#include "bnlab/quad1d.hpp"

using namespace bnlab;
using namespace bnlab::bubble;

namespace {

Vec origin(int n) { return Vec(n, 0.0); }

// Exact projection on the unit ball for radial data centered at 0:
// solves -Lap w = g(|x|), w(1) = 0 through the radial kernel
//   w(r) = 1/(n-2) int_0^1 g(s) s^{n-1} (max(r,s)^{2-n} - 1) ds.
double radial_projection(int n, double r, const std::function<double(double)>& g, double mu) {
    auto integrand = [&](double s) {
        const double m = std::max(r, s);
        return g(s) * std::pow(s, n - 1) * (std::pow(m, 2.0 - n) - 1.0);
    };
    return adaptive_quad_split(integrand, 0.0, 1.0, bubble_breakpoints(mu, 1.0), 1e-12) /
           (n - 2.0);
}

double bubble_at_radius(int n, double mu, double r) {
    BubbleParams p{mu, origin(n), 1.0, n};
    Vec x = origin(n);
    x[0] = r;
    return eval_bubble(x, p);
}

} // namespace

TEST_CASE("bubble values at the center and unit offset") {
    for (int n : {4, 5}) {
        const auto c = DimensionConstants::make(n);
        BubbleParams p{1.0, origin(n), 1.0, n};
        Vec x = origin(n);
        CHECK(eval_bubble(x, p) == doctest::Approx(c.alpha_n).epsilon(1e-14));
        if (n == 4) CHECK(c.alpha_n == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
        if (n == 5) CHECK(c.alpha_n == doctest::Approx(std::pow(15.0, 0.75)).epsilon(1e-15));
    }
    // N=4, mu=1, |x-xi|=1 -> alpha_4 / 2
    const auto c4 = DimensionConstants::make(4);
    CHECK(bubble_at_radius(4, 1.0, 1.0) == doctest::Approx(c4.alpha_n / 2.0).epsilon(1e-14));
}

TEST_CASE("scaling covariance is exact") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int n : {4, 5}) {
        for (int trial = 0; trial < 50; ++trial) {
            Vec xi(n), x(n);
            for (int i = 0; i < n; ++i) {
                xi[i] = unif(rng);
                x[i] = unif(rng);
            }
            const double mu = std::exp(unif(rng) * 4.0);
            BubbleParams p{mu, xi, 1.0, n};
            BubbleParams unit{1.0, origin(n), 1.0, n};
            Vec y(n);
            for (int i = 0; i < n; ++i) y[i] = (x[i] - xi[i]) / mu;
            const double lhs = eval_bubble(x, p);
            const double rhs = std::pow(mu, -(n - 2) / 2.0) * eval_bubble(y, unit);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
        }
    }
}

TEST_CASE("derivative formulas: closed values and finite differences") {
    const auto c4 = DimensionConstants::make(4);
    BubbleParams p{1.0, origin(4), 1.0, 4};
    Vec x = origin(4);
    CHECK(eval_bubble_derivative(x, p, 0) == doctest::Approx(-c4.alpha_n).epsilon(1e-14));
    for (int ell = 1; ell <= 4; ++ell) CHECK(eval_bubble_derivative(x, p, ell) == 0.0);
    CHECK_THROWS_AS(eval_bubble_derivative(x, p, 5), argument_error);

    for (int n : {4, 5}) {
        BubbleParams q{0.7, origin(n), 1.0, n};
        Vec y = origin(n);
        y[0] = 0.3;
        // d/dmu via 4th-order central differences
        const double h = 1e-3;
        auto at_mu = [&](double mu) {
            BubbleParams qq = q;
            qq.mu = mu;
            return eval_bubble(y, qq);
        };
        const double fd =
            (-at_mu(q.mu + 2 * h) + 8 * at_mu(q.mu + h) - 8 * at_mu(q.mu - h) + at_mu(q.mu - 2 * h)) /
            (12 * h);
        CHECK(eval_bubble_derivative(y, q, 0) == doctest::Approx(fd).epsilon(1e-6));
        // d/dx_1
        auto at_x = [&](double x1) {
            Vec yy = y;
            yy[0] = x1;
            return eval_bubble(yy, q);
        };
        const double fdx =
            (-at_x(y[0] + 2 * h) + 8 * at_x(y[0] + h) - 8 * at_x(y[0] - h) + at_x(y[0] - 2 * h)) /
            (12 * h);
        CHECK(eval_bubble_derivative(y, q, 1) == doctest::Approx(fdx).epsilon(1e-6));
    }
}

TEST_CASE("bubble solves the critical equation pointwise (FD Laplacian)") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-0.4, 0.4);
    for (int n : {4, 5}) {
        BubbleParams p{0.8, origin(n), 1.0, n};
        int checked = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Vec x(n);
            for (int i = 0; i < n; ++i) x[i] = unif(rng);
            const double h = 1e-4;
            double lap = 0.0;
            const double u0 = eval_bubble(x, p);
            for (int i = 0; i < n; ++i) {
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                lap += (eval_bubble(xp, p) - 2.0 * u0 + eval_bubble(xm, p)) / (h * h);
            }
            const double rhs = nonlinearity(u0, n, 0);
            CHECK(-lap == doctest::Approx(rhs).epsilon(1e-5));
            ++checked;
        }
        CHECK(checked == 100);
    }
}

TEST_CASE("psi^ell consistency with the linearized equation scaling") {
    // -Lap psi = f'(U) psi for each ell, via FD Laplacian at a few points.
    for (int n : {4, 5}) {
        BubbleParams p{0.9, origin(n), 1.0, n};
        for (int ell = 0; ell <= n; ++ell) {
            Vec x(n, 0.11);
            x[0] = 0.23;
            const double h = 1e-4;
            double lap = 0.0;
            const double v0 = eval_bubble_derivative(x, p, ell);
            for (int i = 0; i < n; ++i) {
                Vec xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                lap += (eval_bubble_derivative(xp, p, ell) - 2.0 * v0 +
                        eval_bubble_derivative(xm, p, ell)) /
                       (h * h);
            }
            const double rhs = nonlinearity(eval_bubble(x, p), n, 1) * v0;
            CHECK(-lap == doctest::Approx(rhs).epsilon(1e-4));
        }
    }
}

TEST_CASE("nonlinearity values") {
    CHECK(nonlinearity(-2.0, 4, 0) == doctest::Approx(-8.0));
    CHECK(nonlinearity(1.0, 5, 1) == doctest::Approx(7.0 / 3.0));
    CHECK(nonlinearity(3.0, 4, 1) == doctest::Approx(27.0));
    CHECK(nonlinearity(0.0, 5, 2) == 0.0);
    CHECK(nonlinearity(-1.0, 5, 2) == doctest::Approx(-28.0 / 9.0));
    CHECK_THROWS_AS(nonlinearity(1.0, 3, 0), config_error);
}

TEST_CASE("nonlinearity_increment matches the direct difference where safe") {
    for (int n : {4, 5}) {
        // moderate arguments: direct difference is fine, must agree
        CHECK(nonlinearity_increment(2.0, 0.3, n) ==
              doctest::Approx(nonlinearity(2.3, n, 0) - nonlinearity(2.0, n, 0)).epsilon(1e-12));
        CHECK(nonlinearity_increment(-2.0, 0.3, n) ==
              doctest::Approx(nonlinearity(-1.7, n, 0) - nonlinearity(-2.0, n, 0)).epsilon(1e-12));
        // tiny relative perturbation: expansion f(b(1+w)) - f(b) ~ q f(b) w
        const double b = 1e8, v = 1e-6;
        const double q = (n + 2.0) / (n - 2.0);
        const double expect = q * nonlinearity(b, n, 0) * (v / b);
        CHECK(nonlinearity_increment(b, v, n) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("standard bubble integrals") {
    for (int n : {4, 5}) {
        const auto ints = bubble_integrals(n);
        CHECK(ints.critical_power > 0.0);
        CHECK(ints.subcritical_power > 0.0);
        CHECK(ints.grad_sq > 0.0);
        // -Lap U = U^{2*-1} integrates to int |grad U|^2 = int U^{2*}
        CHECK(ints.grad_sq == doctest::Approx(ints.critical_power).epsilon(1e-9));
        // int U^{(n+2)/(n-2)} equals the flux alpha_n (n-2) omega_n = alpha_n/gamma_n
        const auto c = DimensionConstants::make(n);
        CHECK(ints.subcritical_power == doctest::Approx(c.alpha_n / c.gamma_n).epsilon(1e-9));
        if (n == 5) CHECK(ints.l2 > 0.0);
        if (n == 4) CHECK(ints.l2 == 0.0);
    }
    // N=4: int U^2 over B_R grows like log R
    const double v10 = l2_mass_in_ball(4, 10.0);
    const double v100 = l2_mass_in_ball(4, 100.0);
    const double v1000 = l2_mass_in_ball(4, 1000.0);
    const double g1 = v100 - v10;
    const double g2 = v1000 - v100;
    CHECK(g1 == doctest::Approx(g2).epsilon(2e-2)); // equal decade increments
    const auto c4 = DimensionConstants::make(4);
    CHECK(g2 == doctest::Approx(c4.omega_n * c4.alpha_n * c4.alpha_n * std::log(10.0)).epsilon(1e-3));
}

TEST_CASE("projected bubble: expansion form on the ball") {
    domain::Domain ball4(domain::DomainSpec::unit_ball(4));
    const auto c4 = DimensionConstants::make(4);
    BubbleParams p{0.1, origin(4), 1.0, 4};
    Vec x0 = origin(4);
    // H(0,0) = 1: W~(0) = U(0) - alpha_4 mu
    CHECK(eval_projected_bubble(x0, p, ball4) ==
          doctest::Approx(eval_bubble(x0, p) - c4.alpha_n * 0.1).epsilon(1e-14));
}

TEST_CASE("projected bubble boundary defect decays like mu^{(n+2)/2}") {
    for (int n : {4, 5}) {
        domain::Domain ball((domain::DomainSpec::unit_ball(n)));
        Vec xb = origin(n);
        xb[0] = 1.0; // boundary point
        auto defect = [&](double mu) {
            BubbleParams p{mu, origin(n), 1.0, n};
            return std::abs(eval_projected_bubble(xb, p, ball)) / std::pow(mu, (n + 2.0) / 2.0);
        };
        const double r1 = defect(1e-2);
        const double r2 = defect(5e-3);
        CHECK(r1 / r2 > 0.5);
        CHECK(r1 / r2 < 2.0);
    }
}

TEST_CASE("projected bubble vs exact radial projection: O(mu^{(n+2)/2})") {
    for (int n : {4, 5}) {
        domain::Domain ball((domain::DomainSpec::unit_ball(n)));
        auto sup_diff = [&](double mu) {
            BubbleParams p{mu, origin(n), 1.0, n};
            auto up = [&](double s) { return nonlinearity(bubble_at_radius(n, mu, s), n, 0); };
            double worst = 0.0;
            for (double r : {0.0, 0.05, 0.2, 0.5, 0.8, 0.95}) {
                Vec x = origin(n);
                x[0] = r;
                const double exact = radial_projection(n, r, up, mu);
                const double approx = eval_projected_bubble(x, p, ball);
                worst = std::max(worst, std::abs(exact - approx));
            }
            return worst / std::pow(mu, (n + 2.0) / 2.0);
        };
        const double a = sup_diff(1e-2);
        const double b = sup_diff(5e-3);
        CHECK(a / b > 0.5);
        CHECK(a / b < 2.0);
    }
}

TEST_CASE("projected derivative examples") {
    const int n = 4;
    domain::Domain ball((domain::DomainSpec::unit_ball(n)));
    const auto c = DimensionConstants::make(n);

    // ell = 1 at x = xi: psi^1(xi) = 0, so value is the pure H-gradient term.
    Vec xi(n, 0.0);
    xi[0] = 0.3;
    BubbleParams p{0.05, xi, 1.0, n};
    const Vec gh = ball.regular_part_gradient_xi(xi, xi);
    CHECK(eval_projected_derivative(xi, p, 1, ball) ==
          doctest::Approx(-c.alpha_n * std::pow(p.mu, (n - 2) / 2.0) * gh[0]).epsilon(1e-12));

    // center: at x = xi = 0 the H-gradient vanishes by symmetry, so the
    // projected derivative reduces to psi^ell (= 0 there).
    BubbleParams pc{0.05, origin(n), 1.0, n};
    const Vec gh0 = ball.regular_part_gradient_xi(origin(n), origin(n));
    for (int i = 0; i < n; ++i) CHECK(gh0[i] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(eval_projected_derivative(origin(n), pc, 1, ball) == doctest::Approx(0.0).epsilon(1e-14));

    // ell = 0 remainder on the ball: |P psi^0_exact - returned| / mu^{n/2}
    // bounded under mu halving (radial Green-integral oracle).
    auto remainder = [&](double mu) {
        BubbleParams q{mu, origin(n), 1.0, n};
        auto rhs = [&](double s) {
            Vec x = origin(n);
            x[0] = s;
            return nonlinearity(bubble_at_radius(n, mu, s), n, 1) *
                   eval_bubble_derivative(x, q, 0);
        };
        double worst = 0.0;
        for (double r : {0.1, 0.4, 0.7}) {
            Vec x = origin(n);
            x[0] = r;
            const double exact = radial_projection(n, r, rhs, mu);
            const double got = eval_projected_derivative(x, q, 0, ball);
            worst = std::max(worst, std::abs(exact - got));
        }
        return worst / std::pow(mu, n / 2.0);
    };
    const double r1 = remainder(2e-2);
    const double r2 = remainder(1e-2);
    CHECK(r1 / r2 > 0.4);
    CHECK(r1 / r2 < 2.5);
}

TEST_CASE("projected bubble satisfies the interior equation (FD check)") {
    for (int n : {4, 5}) {
        domain::Domain ball((domain::DomainSpec::unit_ball(n)));
        BubbleParams p{0.3, origin(n), 1.0, n};
        Vec x(n, 0.1);
        x[0] = 0.25;
        const double h = 1e-4;
        const double w0 = eval_projected_bubble(x, p, ball);
        double lap = 0.0;
        for (int i = 0; i < n; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            lap += (eval_projected_bubble(xp, p, ball) - 2.0 * w0 +
                    eval_projected_bubble(xm, p, ball)) /
                   (h * h);
        }
        CHECK(-lap == doctest::Approx(nonlinearity(eval_bubble(x, p), n, 0)).epsilon(1e-5));
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(DimensionConstants::make(3), config_error);
    BubbleParams bad{1.0, origin(4), 1.0, 4};
    bad.mu = -1.0;
    Vec x = origin(4);
    CHECK_THROWS_AS(eval_bubble(x, bad), argument_error);
}
