#include "bnlab/ansatz.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "bnlab/errors.hpp"

namespace bnlab::ansatz {

using bubble::BubbleParams;

namespace {

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

double sum_sq(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

constexpr double kMuFloor = 1e-290;

} // namespace

ScalingResult scaling_laws(int n, double eps, const reduced::ReducedSolution& red,
                           const ConstantSet& constants) {
    if (!(eps > 0.0)) throw argument_error("scaling_laws: eps must be positive");
    const double sum_s2 = sum_sq(red.s0);
    const double abs_l0 = std::abs(red.l0);
    ScalingResult out;
    if (n == 4) {
        const double exponent =
            constants.d1 * constants.d3 * red.l0 * red.l0 /
            (constants.d2 * sum_s2 * red.norm_g_sq);
        out.mu = std::exp(-exponent / eps);
        if (out.mu < kMuFloor)
            throw numerical_error("scaling_laws: mu underflows at eps = " + fmt_sci(eps) +
                                  "; usable window eps >= " +
                                  fmt_sci(exponent / std::log(1.0 / kMuFloor)));
        out.tau = constants.d1 * abs_l0 * out.mu / (red.norm_g_sq * eps);
    } else if (n == 5) {
        const double ratio = red.norm_g_sq / red.norm_g_2star;
        out.tau = std::pow(ratio, 0.75) * std::pow(eps, 0.75);
        const double height = constants.d3 * abs_l0 / (constants.d2 * sum_s2);
        out.mu = height * height * std::pow(ratio, 1.5) * std::pow(eps, 1.5);
    } else {
        throw config_error("scaling_laws: n must be 4 or 5");
    }
    return out;
}

double min_eps_n4(const reduced::ReducedSolution& red, const ConstantSet& constants) {
    const double exponent = constants.d1 * constants.d3 * red.l0 * red.l0 /
                            (constants.d2 * sum_sq(red.s0) * red.norm_g_sq);
    return exponent / std::log(1.0 / kMuFloor);
}

AnsatzParams make_ansatz(const reduced::ReducedSolution& red,
                         std::shared_ptr<const domain::Domain> dom, double eps,
                         const ConstantSet& constants) {
    if (!red.basis) throw argument_error("make_ansatz: reduced solution carries no basis");
    AnsatzParams p;
    p.n = red.n;
    p.eps = eps;
    p.lambda_kappa = red.basis->lambda;
    // (sgnlambda): above the eigenvalue for N=4, below for N=5.
    p.lambda = (red.n == 4) ? p.lambda_kappa + eps : p.lambda_kappa - eps;
    ScalingResult sc = scaling_laws(red.n, eps, red, constants);
    p.tau = sc.tau;
    p.mu = sc.mu;
    p.t = red.t0;
    p.s = red.s0;
    p.beta = red.beta;
    p.xi = red.xi0;
    p.basis = red.basis;
    p.dom = std::move(dom);
    p.tau_i.resize(red.t0.size());
    for (std::size_t i = 0; i < red.t0.size(); ++i) p.tau_i[i] = red.t0[i] * p.tau;
    p.mu_j.resize(red.s0.size());
    for (std::size_t j = 0; j < red.s0.size(); ++j) {
        p.mu_j[j] = red.s0[j] * p.mu;
        p.bubbles.push_back(BubbleParams{p.mu_j[j], red.xi0[j], red.beta[j], red.n});
    }
    return p;
}

AnsatzParams detune_t(const AnsatzParams& p, int component, double factor) {
    AnsatzParams out = p;
    out.t[component] *= factor;
    out.tau_i[component] *= factor;
    return out;
}

AnsatzParams detune_xi(const AnsatzParams& p, int site, const Vec& shift) {
    AnsatzParams out = p;
    for (std::size_t d = 0; d < shift.size(); ++d) {
        out.xi[site][d] += shift[d];
        out.bubbles[site].xi[d] += shift[d];
    }
    if (!out.dom->inside(out.xi[site]))
        throw argument_error("detune_xi: shifted site leaves the domain");
    return out;
}

double assemble(domain::Point x, const AnsatzParams& p) {
    if (!p.dom->inside(x)) throw argument_error("assemble: x outside the domain");
    double z = 0.0;
    for (std::size_t j = 0; j < p.bubbles.size(); ++j)
        z += p.beta[j] * bubble::eval_projected_bubble(x, p.bubbles[j], *p.dom);
    for (std::size_t i = 0; i < p.tau_i.size(); ++i)
        z += p.tau_i[i] * p.basis->functions[i]->value(x);
    return z;
}

double pointwise_residual(domain::Point x, const AnsatzParams& p) {
    if (!p.dom->inside(x)) throw argument_error("pointwise_residual: x outside the domain");
    const int n = p.n;
    const double sgn = (n == 4) ? 1.0 : -1.0;
    const auto c = bubble::DimensionConstants::make(n);

    // Per-bubble pieces; W~ assembled as U - correction so the correction is
    // available separately for the stable core expansion.
    const std::size_t k = p.bubbles.size();
    Vec u(k), corr(k);
    for (std::size_t j = 0; j < k; ++j) {
        u[j] = bubble::eval_bubble(x, p.bubbles[j]);
        corr[j] = c.alpha_n * std::pow(p.bubbles[j].mu, (n - 2) / 2.0) *
                  p.dom->regular_part(x, p.bubbles[j].xi);
    }
    double eig_part = 0.0;
    for (std::size_t i = 0; i < p.tau_i.size(); ++i)
        eig_part += p.tau_i[i] * p.basis->functions[i]->value(x);

    double w_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) w_sum += p.beta[j] * (u[j] - corr[j]);
    const double z = w_sum + eig_part;

    // Dominant-bubble test: expand f around beta_j U_j when the rest is small.
    std::size_t dom_j = k;
    double dom_u = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        if (u[j] > dom_u) {
            dom_u = u[j];
            dom_j = j;
        }

    double r = -sgn * p.eps * eig_part;
    for (std::size_t j = 0; j < k; ++j)
        r -= p.lambda * p.beta[j] * (u[j] - corr[j]);

    if (dom_j < k && std::abs(z - p.beta[dom_j] * u[dom_j]) < 0.5 * u[dom_j]) {
        const double base = p.beta[dom_j] * u[dom_j];
        // v computed without the U - U cancellation
        double v = -p.beta[dom_j] * corr[dom_j] + eig_part;
        for (std::size_t j = 0; j < k; ++j)
            if (j != dom_j) v += p.beta[j] * (u[j] - corr[j]);
        for (std::size_t j = 0; j < k; ++j)
            if (j != dom_j) r += p.beta[j] * bubble::nonlinearity(u[j], n, 0);
        r -= bubble::nonlinearity_increment(base, v, n);
    } else {
        for (std::size_t j = 0; j < k; ++j) r += p.beta[j] * bubble::nonlinearity(u[j], n, 0);
        r -= bubble::nonlinearity(z, n, 0);
    }
    return r;
}

double kirchhoff_routh(const Vec& mu, const std::vector<Vec>& x, double b_n,
                       const domain::Domain& dom) {
    const int n = dom.dim();
    const std::size_t k = mu.size();
    if (x.size() != k) throw argument_error("kirchhoff_routh: size mismatch");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            double d2 = 0.0;
            for (int d = 0; d < n; ++d) d2 += (x[i][d] - x[j][d]) * (x[i][d] - x[j][d]);
            if (d2 == 0.0) throw singularity_error("kirchhoff_routh: coincident points");
        }
    double self = 0.0, inter = 0.0, quad = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        self += dom.regular_part(x[j], x[j]) * std::pow(mu[j], n - 2.0);
        quad += 0.5 * b_n * mu[j] * mu[j];
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            inter += dom.green_function(x[i], x[j]) * std::pow(mu[j], (n - 2.0) / 2.0) *
                     std::pow(mu[i], (n - 2.0) / 2.0);
        }
    }
    return 0.5 * (self - inter) - quad;
}

} // namespace bnlab::ansatz
