#include "doctest.h"

#include <cmath>
#include <random>

#include "bnlab/domain.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/quadrature.hpp"

using namespace bnlab;
using namespace bnlab::domain;

namespace {

Domain box4() { return Domain(DomainSpec::hyperbox(4, Vec(4, M_PI))); }
Domain box5() { return Domain(DomainSpec::hyperbox(5, Vec(5, M_PI))); }

double fd_laplacian(const Eigenfunction& e, const Vec& x, double h) {
    double lap = 0.0;
    const double v0 = e.value(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        lap += (e.value(xp) - 2.0 * v0 + e.value(xm)) / (h * h);
    }
    return lap;
}

} // namespace

TEST_CASE("hyperbox eigenvalues and multiplicities on (0,pi)^4") {
    auto spec = DomainSpec::hyperbox(4, Vec(4, M_PI));
    auto b1 = eigenbasis(spec, 1);
    CHECK(b1.lambda == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(b1.multiplicity == 1);
    // e1 proportional to prod sin(x_i); normalized value at center = (2/pi)^2
    Vec center(4, M_PI / 2.0);
    CHECK(b1.functions[0]->value(center) ==
          doctest::Approx(std::pow(2.0 / M_PI, 2.0)).epsilon(1e-12));

    auto b2 = eigenbasis(spec, 2);
    CHECK(b2.lambda == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(b2.multiplicity == 4);
}

TEST_CASE("ball first radial eigenvalue solves tan x = x (N=5)") {
    const double z = bessel_j_zero(1.5, 1);
    CHECK(z == doctest::Approx(4.4934094579090641753).epsilon(1e-10));
    CHECK(std::tan(z) == doctest::Approx(z).epsilon(1e-7));
    auto basis = eigenbasis(DomainSpec::unit_ball(5), 1);
    CHECK(basis.lambda == doctest::Approx(z * z).epsilon(1e-12));
    CHECK(basis.multiplicity == 1);
}

TEST_CASE("ball ladder: degree-1 second, higher sectors are capability errors") {
    for (int n : {4, 5}) {
        auto ladder = ball_eigenvalue_ladder(n, 4);
        CHECK(ladder[0].angular_degree == 0);
        CHECK(ladder[1].angular_degree == 1);
        CHECK(ladder[2].angular_degree == 2);
        auto spec = DomainSpec::unit_ball(n);
        auto b2 = eigenbasis(spec, 2);
        CHECK(b2.multiplicity == n);
        CHECK_THROWS_AS(eigenbasis(spec, 3), capability_error);
    }
}

TEST_CASE("eigenfunctions satisfy the eigen-equation and vanish on the boundary") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.15, 0.85);

    auto check_basis = [&](const Domain& dom, const EigenBasis& basis) {
        for (const auto& e : basis.functions) {
            for (int trial = 0; trial < 12; ++trial) {
                Vec x(dom.dim());
                if (dom.spec().kind == Kind::hyperbox) {
                    for (int i = 0; i < dom.dim(); ++i) x[i] = unif(rng) * dom.spec().sides[i];
                } else {
                    auto r = rng;
                    dom.sample_uniform(rng, x);
                    for (double& xi : x) xi *= 0.8;
                }
                const double v = e->value(x);
                const double lap = fd_laplacian(*e, x, 3e-4);
                CHECK(-lap == doctest::Approx(basis.lambda * v).epsilon(2e-5));
                // gradient consistency
                Vec g = e->gradient(x);
                for (int i = 0; i < dom.dim(); ++i) {
                    Vec xp = x, xm = x;
                    xp[i] += 1e-5;
                    xm[i] -= 1e-5;
                    const double fd = (e->value(xp) - e->value(xm)) / 2e-5;
                    CHECK(g[i] == doctest::Approx(fd).epsilon(5e-5));
                }
                // Hessian trace equals -lambda v
                Mat h = e->hessian(x);
                double tr = 0.0;
                for (int i = 0; i < dom.dim(); ++i) tr += h(i, i);
                CHECK(tr == doctest::Approx(-basis.lambda * v).epsilon(1e-9));
            }
            // boundary samples
            if (dom.spec().kind == Kind::unit_ball) {
                Vec xb(dom.dim(), 0.0);
                xb[0] = 1.0;
                CHECK(std::abs(e->value(xb)) <= 1e-8);
                xb[0] = -1.0 / std::sqrt(2.0);
                xb[1] = 1.0 / std::sqrt(2.0);
                CHECK(std::abs(e->value(xb)) <= 1e-8);
            } else {
                Vec xb(dom.dim(), 1.0);
                xb[0] = 0.0;
                CHECK(std::abs(e->value(xb)) <= 1e-12);
            }
        }
    };

    {
        Domain dom = box4();
        check_basis(dom, eigenbasis(dom.spec(), 2));
    }
    for (int n : {4, 5}) {
        Domain ball((DomainSpec::unit_ball(n)));
        check_basis(ball, eigenbasis(ball.spec(), 1));
        check_basis(ball, eigenbasis(ball.spec(), 2));
    }
}

TEST_CASE("eigenfunctions are orthonormal under quadrature") {
    // degree-1 ball family: off-diagonal pairs vanish, diagonal = 1
    for (int n : {4, 5}) {
        Domain ball((DomainSpec::unit_ball(n)));
        auto basis = eigenbasis(ball.spec(), 2);
        QuadratureSpec q;
        q.scheme = Scheme::tensor_gauss;
        q.order = 40;
        q.angular_order = 8;
        for (int a = 0; a < basis.multiplicity; ++a) {
            for (int b = a; b < basis.multiplicity; ++b) {
                auto f = [&](const Vec& x) {
                    return basis.functions[a]->value(x) * basis.functions[b]->value(x);
                };
                const double v = integrate(ball, f, q).value;
                if (a == b)
                    CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
                else
                    CHECK(std::abs(v) <= 1e-8);
            }
        }
    }
    // box kappa=2 family
    Domain dom = box4();
    auto basis = eigenbasis(dom.spec(), 2);
    QuadratureSpec q;
    q.scheme = Scheme::tensor_gauss;
    q.order = 24;
    for (int a = 0; a < basis.multiplicity; ++a)
        for (int b = a + 1; b < basis.multiplicity; ++b) {
            auto f = [&](const Vec& x) {
                return basis.functions[a]->value(x) * basis.functions[b]->value(x);
            };
            CHECK(std::abs(integrate(dom, f, q).value) <= 1e-10);
        }
}

TEST_CASE("green function closed values on the ball") {
    Domain ball((DomainSpec::unit_ball(4)));
    Vec xi(4, 0.0);
    Vec x(4, 0.0);
    x[0] = 1.0;
    CHECK(ball.green_function(x, xi) == doctest::Approx(0.0).epsilon(1e-14));
    x[0] = 0.5;
    const auto c = bubble::DimensionConstants::make(4);
    CHECK(ball.green_function(x, xi) == doctest::Approx(3.0 * c.gamma_n).epsilon(1e-13));
    CHECK_THROWS_AS(ball.green_function(xi, xi), singularity_error);
}

TEST_CASE("regular part on the ball: H(x,0) = 1, symmetry, gradient") {
    Domain ball((DomainSpec::unit_ball(5)));
    std::mt19937_64 rng(5);
    Vec zero(5, 0.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec x(5);
        ball.sample_uniform(rng, x);
        CHECK(ball.regular_part(x, zero) == doctest::Approx(1.0).epsilon(1e-14));
        Vec y(5);
        ball.sample_uniform(rng, y);
        CHECK(ball.regular_part(x, y) == doctest::Approx(ball.regular_part(y, x)).epsilon(1e-12));
    }
    // gradient vs finite differences
    Vec x(5, 0.12), xi(5, -0.08);
    xi[1] = 0.31;
    Vec g = ball.regular_part_gradient_xi(x, xi);
    for (int i = 0; i < 5; ++i) {
        Vec xp = xi, xm = xi;
        xp[i] += 1e-6;
        xm[i] -= 1e-6;
        const double fd = (ball.regular_part(x, xp) - ball.regular_part(x, xm)) / 2e-6;
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-7));
    }
    // dH/dxi(x, 0) = (n-2) x (harmonic extension of the boundary data)
    Vec g0 = ball.regular_part_gradient_xi(x, zero);
    for (int i = 0; i < 5; ++i) CHECK(g0[i] == doctest::Approx(3.0 * x[i]).epsilon(1e-12));
}

TEST_CASE("hyperbox green function: boundary decay and symmetry") {
    Domain dom(DomainSpec::hyperbox(4, Vec(4, M_PI)), 16);
    Vec xi(4, 1.3);
    xi[2] = 2.0;
    // boundary sample
    Vec xb(4, 1.1);
    xb[0] = 0.0;
    CHECK(std::abs(dom.green_function(xb, xi)) <= 1e-6);
    Vec xb2(4, 1.9);
    xb2[3] = M_PI;
    CHECK(std::abs(dom.green_function(xb2, xi)) <= 1e-6);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.8, M_PI - 0.8);
    for (int trial = 0; trial < 5; ++trial) {
        Vec x(4), y(4);
        for (int i = 0; i < 4; ++i) {
            x[i] = unif(rng);
            y[i] = unif(rng);
        }
        CHECK(dom.regular_part(x, y) == doctest::Approx(dom.regular_part(y, x)).epsilon(1e-6));
    }
    // gradient vs finite differences
    Vec x(4, 1.4), z(4, 1.8);
    Vec g = dom.regular_part_gradient_xi(x, z);
    for (int i = 0; i < 4; ++i) {
        Vec xp = z, xm = z;
        xp[i] += 1e-5;
        xm[i] -= 1e-5;
        const double fd = (dom.regular_part(x, xp) - dom.regular_part(x, xm)) / 2e-5;
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
    // H is harmonic inside: FD Laplacian small relative to scale
    const double h = 1e-3;
    double lap = 0.0;
    const double v0 = dom.regular_part(x, z);
    for (int i = 0; i < 4; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        lap += (dom.regular_part(xp, z) - 2.0 * v0 + dom.regular_part(xm, z)) / (h * h);
    }
    CHECK(std::abs(lap) <= 2e-3 * std::abs(v0) / (h * h) * 1e-6 + 1e-3);
}

TEST_CASE("admissibility of configurations") {
    Domain dom = box4();
    ConfigurationSet ok{0.1, {Vec(4, M_PI / 2.0)}};
    CHECK(admissible(ok, dom));

    ConfigurationSet dup{0.1, {Vec(4, 1.5), Vec(4, 1.5)}};
    CHECK_FALSE(admissible(dup, dom));

    Vec a(4, 1.5), b(4, 1.5);
    b[0] += 1.9 * 0.1; // distance 1.9 rho < 2 rho
    ConfigurationSet close{0.1, {a, b}};
    CHECK_FALSE(admissible(close, dom));

    Vec near_bd(4, 1.5);
    near_bd[0] = 0.15; // boundary distance 0.15 < 2 rho
    ConfigurationSet bd{0.1, {near_bd}};
    CHECK_FALSE(admissible(bd, dom));
}

TEST_CASE("nodal domain counts for sine products") {
    Domain dom = box4();
    auto make_g = [&](std::vector<int> freq) {
        return [freq](const Vec& x) {
            double v = 1.0;
            for (std::size_t i = 0; i < freq.size(); ++i) v *= std::sin(freq[i] * x[i]);
            return v;
        };
    };
    CHECK(nodal_domains(make_g({1, 1, 1, 1}), dom, 8).count == 1);
    CHECK(nodal_domains(make_g({2, 1, 1, 1}), dom, 10).count == 2);
    CHECK(nodal_domains(make_g({2, 2, 1, 1}), dom, 10).count == 4);

    // monotone stability under refinement
    for (auto freq : {std::vector<int>{1, 1, 1, 1}, {2, 1, 1, 1}, {2, 2, 1, 1}}) {
        const int c8 = nodal_domains(make_g(freq), dom, 8).count;
        const int c16 = nodal_domains(make_g(freq), dom, 16).count;
        CHECK(c16 >= c8);
    }

    // representatives carry the deepest |g| cell: single-domain case gives center
    auto rep = nodal_domains(make_g({1, 1, 1, 1}), dom, 15).representatives[0];
    for (double xi : rep) CHECK(xi == doctest::Approx(M_PI / 2.0).epsilon(0.08));

    CHECK_THROWS_AS(nodal_domains(make_g({1, 1, 1, 1}), dom, 4), argument_error);
}

TEST_CASE("nodal domains on the ball: radial second mode has two") {
    Domain ball((DomainSpec::unit_ball(4)));
    // r^{-1} J_1(j_{1,2} r) changes sign once in (0,1)
    const double j2 = bessel_j_zero(1.0, 2);
    auto g = [&](const Vec& x) {
        double r = 0.0;
        for (double v : x) r += v * v;
        r = std::sqrt(r);
        if (r < 1e-9) return j2 / 2.0;
        return std::cyl_bessel_j(1.0, j2 * r) / r;
    };
    CHECK(nodal_domains(g, ball, 12).count == 2);
}
