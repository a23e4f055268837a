#include "doctest.h"

#include <cmath>
#include <random>

#include "bnlab/bubble.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/domain.hpp"
#include "bnlab/quad1d.hpp"
#include "bnlab/quadrature.hpp"

using namespace bnlab;
using namespace bnlab::domain;

TEST_CASE("1D rules: Gauss-Legendre and Gauss-Jacobi sanity") {
    auto gl = gauss_legendre_on(8, 0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 5.0);
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

    // int_{-1}^{1} (1-t^2)^{1/2} dt = pi/2
    auto gj = gauss_jacobi(6, 0.5, 0.5);
    double w = 0.0;
    for (double wi : gj.weights) w += wi;
    CHECK(w == doctest::Approx(M_PI / 2.0).epsilon(1e-13));

    // adaptive GK on a peaked integrand
    const double v = adaptive_quad([](double x) { return 1.0 / (1e-6 + x * x); }, -1.0, 1.0, 1e-12);
    const double exact = 2.0 * std::atan(1.0 / 1e-3) / 1e-3;
    CHECK(v == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("sphere rule integrates constants and coordinates squared") {
    for (int n : {4, 5}) {
        auto rule = sphere_rule(n, 8);
        const auto c = bubble::DimensionConstants::make(n);
        double area = 0.0;
        Vec second(n, 0.0);
        for (std::size_t i = 0; i < rule.points.size(); ++i) {
            area += rule.weights[i];
            for (int d = 0; d < n; ++d)
                second[d] += rule.weights[i] * rule.points[i][d] * rule.points[i][d];
        }
        CHECK(area == doctest::Approx(c.omega_n).epsilon(1e-12));
        for (int d = 0; d < n; ++d)
            CHECK(second[d] == doctest::Approx(c.omega_n / n).epsilon(1e-12));
    }
}

TEST_CASE("tensor-gauss on the box: separable sine integral") {
    Domain dom(DomainSpec::hyperbox(4, Vec(4, M_PI)));
    QuadratureSpec q;
    q.order = 20;
    auto f = [](const Vec& x) {
        double v = 1.0;
        for (double xi : x) v *= std::sin(xi) * std::sin(xi);
        return v;
    };
    CHECK(integrate(dom, f, q).value == doctest::Approx(std::pow(M_PI / 2.0, 4.0)).epsilon(1e-12));
}

TEST_CASE("ball volume via the product rule") {
    for (int n : {4, 5}) {
        Domain dom((DomainSpec::unit_ball(n)));
        const auto c = bubble::DimensionConstants::make(n);
        QuadratureSpec q;
        q.order = 12;
        q.angular_order = 4;
        auto one = [](const Vec&) { return 1.0; };
        CHECK(integrate(dom, one, q).value == doctest::Approx(c.omega_n / n).epsilon(1e-12));
    }
}

TEST_CASE("Wallis product: 10/3-norm of the first box eigenfunction factor") {
    // int_{(0,pi)^5} prod |sin x_i|^{10/3} dx = (int_0^pi sin^{10/3})^5
    Domain dom(DomainSpec::hyperbox(5, Vec(5, M_PI)));
    QuadratureSpec q;
    q.order = 40;
    auto f = [](const Vec& x) {
        double v = 1.0;
        for (double xi : x) v *= std::pow(std::abs(std::sin(xi)), 10.0 / 3.0);
        return v;
    };
    const double got = integrate(dom, f, q).value;
    const double one_d =
        adaptive_quad([](double t) { return std::pow(std::abs(std::sin(t)), 10.0 / 3.0); }, 0.0,
                      M_PI, 1e-13);
    CHECK(got == doctest::Approx(std::pow(one_d, 5.0)).epsilon(1e-6));
}

TEST_CASE("stratified MC agrees with tensor-gauss on random smooth integrands") {
    Domain dom(DomainSpec::hyperbox(4, Vec(4, M_PI)));
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = unif(rng), b = unif(rng), c = unif(rng);
        auto f = [a, b, c](const Vec& x) {
            return 1.0 + a * std::sin(x[0] + 2 * x[1]) + b * std::cos(x[2]) * x[3] / M_PI +
                   c * x[0] * x[1] / 10.0;
        };
        QuadratureSpec tg;
        tg.order = 16;
        const double exact = integrate(dom, f, tg).value;

        QuadratureSpec mc;
        mc.scheme = Scheme::stratified_mc;
        mc.samples = 60000;
        mc.seed = 1000 + trial;
        auto r = integrate(dom, f, mc);
        CHECK(std::abs(r.value - exact) <= 3.0 * r.stderr_est + 1e-12);
    }
}

TEST_CASE("MC error bar shrinks like 1/sqrt(samples)") {
    Domain dom((DomainSpec::unit_ball(4)));
    auto f = [](const Vec& x) { return std::exp(x[0]) + x[1] * x[1]; };
    QuadratureSpec mc;
    mc.scheme = Scheme::stratified_mc;
    mc.seed = 77;
    mc.samples = 20000;
    const double e1 = integrate(dom, f, mc).stderr_est;
    mc.samples = 40000;
    const double e2 = integrate(dom, f, mc).stderr_est;
    CHECK(e1 / e2 > 1.2);
    CHECK(e1 / e2 < 1.7);
}

TEST_CASE("MC importance sampling resolves a bubble-concentrated integrand") {
    const int n = 4;
    Domain dom((DomainSpec::unit_ball(n)));
    const double mu = 1e-3;
    bubble::BubbleParams p{mu, Vec(n, 0.0), 1.0, n};
    const auto ints = bubble::bubble_integrals(n);
    auto f = [&](const Vec& x) {
        const double u = bubble::eval_bubble(x, p);
        return std::pow(u, 4.0); // 2* power for n = 4
    };
    QuadratureSpec mc;
    mc.scheme = Scheme::stratified_mc;
    mc.samples = 200000;
    mc.seed = 5;
    mc.centers = {Vec(n, 0.0)};
    mc.scales = {mu};
    auto r = integrate(dom, f, mc);
    // whole-space value minus O(mu^4) tail
    CHECK(r.value == doctest::Approx(ints.critical_power).epsilon(0.05));
    CHECK(r.stderr_est <= 0.05 * r.value);
}

TEST_CASE("MC escalation honors the stderr target or raises") {
    Domain dom((DomainSpec::unit_ball(4)));
    auto f = [](const Vec& x) { return x[0] * x[0]; };
    QuadratureSpec mc;
    mc.scheme = Scheme::stratified_mc;
    mc.samples = 1000;
    mc.max_samples = 2000000;
    mc.stderr_target = 0.01;
    mc.seed = 9;
    auto r = integrate(dom, f, mc);
    CHECK(r.stderr_est <= 0.01 * std::abs(r.value));

    mc.max_samples = 2000;
    mc.stderr_target = 1e-6;
    CHECK_THROWS_AS(integrate(dom, f, mc), numerical_error);
}

TEST_CASE("deterministic reruns: same seed gives identical MC values") {
    Domain dom((DomainSpec::unit_ball(5)));
    auto f = [](const Vec& x) { return 1.0 + x[0] + x[1] * x[2]; };
    QuadratureSpec mc;
    mc.scheme = Scheme::stratified_mc;
    mc.samples = 30000;
    mc.seed = 4242;
    const double v1 = integrate(dom, f, mc).value;
    const double v2 = integrate(dom, f, mc).value;
    CHECK(v1 == v2);
}
