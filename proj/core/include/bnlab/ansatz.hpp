#pragma once

#include <memory>

#include "bnlab/bubble.hpp"
#include "bnlab/domain.hpp"
#include "bnlab/reduced.hpp"

namespace bnlab::ansatz {

// Estimated reduction constants (see verification::estimate_constants).
struct ConstantSet {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double d4 = 0.0;
    double c1() const { return d1 * d3 / d2; }
};

struct ScalingResult {
    double tau = 0.0;
    double mu = 0.0;
};

// The parameter laws tau(eps), mu(eps):
//   N=4: mu = exp(-d1 d3 L0^2 / (d2 (sum s^2) |G|_2^2 eps)),
//        tau = d1 |L0| mu / (|G|_2^2 eps)
//   N=5: tau = (|G|_2^2 / |G|_{2*}^{2*})^{3/4} eps^{3/4},
//        mu  = (d3 |L0| / (d2 sum s^2))^2 (|G|_2^2/|G|_{2*}^{2*})^{3/2} eps^{3/2}
ScalingResult scaling_laws(int n, double eps, const reduced::ReducedSolution& red,
                           const ConstantSet& constants);

// Usable eps window for N=4 before mu underflows the floating floor.
double min_eps_n4(const reduced::ReducedSolution& red, const ConstantSet& constants);

struct AnsatzParams {
    int n = 0;
    double eps = 0.0;
    double lambda = 0.0;
    double lambda_kappa = 0.0;
    double tau = 0.0;
    double mu = 0.0;
    Vec tau_i;  // t_i tau
    Vec mu_j;   // s_j mu
    Vec t;
    Vec s;
    Vec beta;
    std::vector<Vec> xi;
    std::vector<bubble::BubbleParams> bubbles;
    std::shared_ptr<const domain::EigenBasis> basis;
    std::shared_ptr<const domain::Domain> dom;
};

// Assembles the concrete multi-bump parameters at a given eps.  Enforces the
// lambda sidedness (N=4 above, N=5 below the eigenvalue).
AnsatzParams make_ansatz(const reduced::ReducedSolution& red,
                         std::shared_ptr<const domain::Domain> dom, double eps,
                         const ConstantSet& constants);

// Detuned variants for the annihilation experiments: parameters moved off the
// reduced solution while everything else stays pinned.
AnsatzParams detune_t(const AnsatzParams& p, int component, double factor);
AnsatzParams detune_xi(const AnsatzParams& p, int site, const Vec& shift);

// Z_eps(x) = sum_j beta_j W~_{mu_j, xi_j}(x) + sum_i tau_i e_i(x)
double assemble(domain::Point x, const AnsatzParams& p);

// Closed-form equation defect of Z_eps:
//   R(x) = sum_j beta_j U_j^{(n+2)/(n-2)} + lambda_kappa sum_i tau_i e_i
//          - lambda Z - f(Z),
// using -Lap W~ = U^{(n+2)/(n-2)} and -Lap e = lambda_kappa e exactly.  Near a
// bubble core the f(Z) term is expanded against beta_j U_j to keep the
// difference fully significant at tiny mu.
double pointwise_residual(domain::Point x, const AnsatzParams& p);

// Interaction energy of bubble heights and locations.
double kirchhoff_routh(const Vec& mu, const std::vector<Vec>& x, double b_n,
                       const domain::Domain& dom);

} // namespace bnlab::ansatz
