#pragma once

#include <cstdint>
#include <vector>

#include "bnlab/domain.hpp"
#include "bnlab/linalg.hpp"

namespace bnlab::reduced {

struct SolverOptions {
    int multistarts = 64;
    int grid_resolution = 10;  // nodal-domain and capacity scans
    double tol_gradient = 1e-10;
    int quad_order = 16;       // per-axis (box) / radial (ball)
    int angular_order = 12;    // ball only
    std::uint64_t seed = 1;
    double barrier_strength = 1e-8;
};

// Fixed node set with cached eigenfunction values; all norms and inner
// products of eigenfunction combinations are computed on the same nodes so
// that variational identities hold at quadrature level.
class BasisQuadrature {
public:
    BasisQuadrature(const domain::Domain& dom, const domain::EigenBasis& basis, int order,
                    int angular_order);

    const domain::EigenBasis& basis() const { return *basis_; }
    int m() const { return static_cast<int>(basis_->functions.size()); }

    // ||sum_l t_l e_l||_2^2 via the orthogonality of the system.
    double norm_g_sq(const Vec& t) const;
    // int |G|^p dx on the cached nodes.
    double norm_g_p(const Vec& t, double p) const;
    // <f(G), e_l> for all l.
    Vec inner_f_e(const Vec& t, int n) const;
    // <f'(G) e_n, e_l>.
    Mat inner_fprime_ee(const Vec& t, int n) const;
    // <h(G(x)) w(x)> for a scalar kernel h and weight from another combination.
    double integrate_kernel(const Vec& t, const std::function<double(double)>& h) const;

private:
    const domain::EigenBasis* basis_;
    std::vector<Vec> node_values_; // per node: e_1..e_m values
    Vec weights_;
};

struct StationarityReport {
    double gradient_family = 0.0;    // sum_l t_l grad e_l(xi_j) = 0
    double coefficient_family = 0.0; // eq in t
    double height_family = 0.0;      // eq in s
    double max_residual() const;
};

struct ReducedSolution {
    int n = 0;
    int kappa = 0;
    int m = 0;
    int k = 0;
    double rho = 0.0;
    // Working frame: first m eigenspace members, orthogonally re-mixed when
    // needed so every t0 component is nonzero (the paper's O(m) freedom).
    std::shared_ptr<const domain::EigenBasis> basis;
    Vec t0;                // N=4: |t0|_2 = 1; N=5: solves the normalized system
    std::vector<Vec> xi0;
    Vec s0;
    Vec a;                 // a_j = |G(xi_j)|
    Vec beta;              // -sgn G(xi_j)
    double l0 = 0.0;
    double a0 = 0.0;       // N=4 exponential exponent; 0 for N=5
    double c1 = 0.0;       // d1 d3 / d2 used to fill a0
    double objective = 0.0;
    Vec hessian_eigs;      // t-problem Hessian spectrum (N=5)
    double norm_g_sq = 0.0;
    double norm_g_2star = 0.0;
    bool barrier_active = false;
    int n_kappa = 0;
    StationarityReport stationarity;
};

struct TSolveResult {
    std::shared_ptr<const domain::EigenBasis> basis; // frame of t0
    Vec t0;           // maximizer of F (solves the normalized stationarity system)
    Vec hessian_eigs; // all negative for a certified solution
    double f_value = 0.0;
    double gradient_norm = 0.0;
    double norm_g_sq = 0.0;
    double norm_g_2star = 0.0;
    bool rotated = false;
};

// N=5 coefficient problem: maximize F(nu) = 1/2 ||sum nu e||_2^2
// - (1/2*) ||sum nu e||_{2*}^{2*} over R^m.  The returned frame is rotated
// when the raw maximizer has vanishing components.
TSolveResult solve_n5_t(const domain::Domain& dom, const domain::EigenBasis& basis, int m,
                        const SolverOptions& opts);

// Critical points of |G| inside the k deepest nodal domains of G.
std::vector<Vec> find_bubble_sites(const Vec& t0, const domain::EigenBasis& basis,
                                   const domain::Domain& dom, int k, const SolverOptions& opts);

// N=5 height problem: maximize H(nu) = sum a_j^2 nu_j^2/2 - (1/6)(sum a_j nu_j^3)^2
// over the positive orthant; returns s_j = nu_j^2.
Vec solve_n5_s(const Vec& a);

struct CouplingData {
    Vec a;
    double l0 = 0.0;
    double a0 = 0.0;
    Vec beta;
};

CouplingData coupling_data(const Vec& t0, const std::vector<Vec>& xi0, const Vec& s0,
                           const domain::EigenBasis& basis, int n, double c1,
                           double norm_g_sq);

// Full pipelines.
ReducedSolution solve_n4(const domain::Domain& dom, const domain::EigenBasis& basis, int k, int m,
                         double rho, double c1, const SolverOptions& opts);
ReducedSolution solve_n5(const domain::Domain& dom, const domain::EigenBasis& basis, int k, int m,
                         double rho, const SolverOptions& opts);

// Re-evaluates every equation of the relevant limit system at the solution.
// `quad` must be built on the solution's working basis.
StationarityReport verify_stationarity(const ReducedSolution& sol, const BasisQuadrature& quad);

BasisQuadrature make_quadrature(const domain::Domain& dom, const ReducedSolution& sol,
                                const SolverOptions& opts);

// Orthogonally transformed eigenbasis (R acting on the function list); for
// the rotational-invariance property checks.
domain::EigenBasis rotate_basis(const domain::EigenBasis& basis, const Mat& r);

} // namespace bnlab::reduced
