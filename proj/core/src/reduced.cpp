#include "bnlab/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "bnlab/bubble.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/quad1d.hpp"
#include "bnlab/quadrature.hpp"
#include "bnlab/rng.hpp"

namespace bnlab::reduced {

using domain::Combination;
using domain::Domain;
using domain::EigenBasis;

namespace {

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

std::shared_ptr<EigenBasis> truncate_basis(const EigenBasis& basis, int m) {
    auto sub = std::make_shared<EigenBasis>(basis);
    sub->functions.resize(m);
    sub->l2_norms_sq.resize(m);
    sub->multiplicity = m;
    return sub;
}

} // namespace

// ---------------------------------------------------------------------------
// BasisQuadrature
// ---------------------------------------------------------------------------

BasisQuadrature::BasisQuadrature(const Domain& dom, const EigenBasis& basis, int order,
                                 int angular_order)
    : basis_(&basis) {
    const int m = static_cast<int>(basis.functions.size());
    std::vector<Vec> nodes;
    if (dom.spec().kind == domain::Kind::hyperbox) {
        const int n = dom.dim();
        std::vector<Rule1D> per_axis(n);
        for (int d = 0; d < n; ++d) per_axis[d] = gauss_legendre_on(order, 0.0, dom.spec().sides[d]);
        std::size_t total = 1;
        for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(order);
        nodes.reserve(total);
        weights_.reserve(total);
        Vec x(n);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            double w = 1.0;
            for (int d = 0; d < n; ++d) {
                const std::size_t i = rem % order;
                rem /= order;
                x[d] = per_axis[d].nodes[i];
                w *= per_axis[d].weights[i];
            }
            nodes.push_back(x);
            weights_.push_back(w);
        }
    } else {
        const int n = dom.dim();
        SphereRule ang = sphere_rule(n, angular_order);
        Rule1D radial = gauss_legendre_on(2 * order, 0.0, 1.0);
        Vec x(n);
        for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
            const double r = radial.nodes[ir];
            const double wr = radial.weights[ir] * std::pow(r, n - 1);
            for (std::size_t ia = 0; ia < ang.points.size(); ++ia) {
                for (int d = 0; d < n; ++d) x[d] = r * ang.points[ia][d];
                nodes.push_back(x);
                weights_.push_back(wr * ang.weights[ia]);
            }
        }
    }
    node_values_.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        node_values_[i].resize(m);
        for (int l = 0; l < m; ++l) node_values_[i][l] = basis.functions[l]->value(nodes[i]);
    }
}

double BasisQuadrature::norm_g_sq(const Vec& t) const {
    double s = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) s += t[l] * t[l] * basis_->l2_norms_sq[l];
    return s;
}

double BasisQuadrature::norm_g_p(const Vec& t, double p) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < node_values_.size(); ++i) {
        double g = 0.0;
        for (std::size_t l = 0; l < t.size(); ++l) g += t[l] * node_values_[i][l];
        acc += weights_[i] * std::pow(std::abs(g), p);
    }
    return acc;
}

Vec BasisQuadrature::inner_f_e(const Vec& t, int n) const {
    const double p = 4.0 / (n - 2);
    Vec out(t.size(), 0.0);
    for (std::size_t i = 0; i < node_values_.size(); ++i) {
        double g = 0.0;
        for (std::size_t l = 0; l < t.size(); ++l) g += t[l] * node_values_[i][l];
        const double w = weights_[i] * std::pow(std::abs(g), p) * g;
        for (std::size_t l = 0; l < t.size(); ++l) out[l] += w * node_values_[i][l];
    }
    return out;
}

Mat BasisQuadrature::inner_fprime_ee(const Vec& t, int n) const {
    const double p = 4.0 / (n - 2);
    const std::size_t m = t.size();
    Mat out(m, m);
    for (std::size_t i = 0; i < node_values_.size(); ++i) {
        double g = 0.0;
        for (std::size_t l = 0; l < m; ++l) g += t[l] * node_values_[i][l];
        const double w = weights_[i] * (p + 1.0) * std::pow(std::abs(g), p);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a; b < m; ++b)
                out(a, b) += w * node_values_[i][a] * node_values_[i][b];
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
    return out;
}

double BasisQuadrature::integrate_kernel(const Vec& t,
                                         const std::function<double(double)>& h) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < node_values_.size(); ++i) {
        double g = 0.0;
        for (std::size_t l = 0; l < t.size(); ++l) g += t[l] * node_values_[i][l];
        acc += weights_[i] * h(g);
    }
    return acc;
}

double StationarityReport::max_residual() const {
    return std::max({gradient_family, coefficient_family, height_family});
}

// ---------------------------------------------------------------------------
// Frame rotation (the paper's O(m) freedom): re-mix the eigenspace so every
// coefficient is nonzero.  G = sum t_l e_l is unchanged.
// ---------------------------------------------------------------------------

namespace {

Mat givens_chain(std::size_t m, double theta) {
    Mat r = Mat::identity(m);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        Mat g = Mat::identity(m);
        g(i, i) = std::cos(theta);
        g(i + 1, i + 1) = std::cos(theta);
        g(i, i + 1) = -std::sin(theta);
        g(i + 1, i) = std::sin(theta);
        Mat out(m, m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) {
                double s = 0.0;
                for (std::size_t c = 0; c < m; ++c) s += g(a, c) * r(c, b);
                out(a, b) = s;
            }
        r = out;
    }
    return r;
}

struct RotatedFrame {
    std::shared_ptr<EigenBasis> basis;
    Vec t;
    bool rotated = false;
};

RotatedFrame ensure_nontrivial_components(std::shared_ptr<EigenBasis> basis, Vec t) {
    const std::size_t m = t.size();
    const double scale = norm2(t);
    auto min_comp = [&](const Vec& v) {
        double mn = std::numeric_limits<double>::max();
        for (double x : v) mn = std::min(mn, std::abs(x));
        return mn;
    };
    if (m == 1 || min_comp(t) > 1e-6 * scale) return {std::move(basis), std::move(t), false};

    for (double theta : {0.553574, 0.912734, 1.247331}) {
        Mat r = givens_chain(m, theta);
        Vec t_new = r.multiply(t);
        if (min_comp(t_new) > 1e-3 * scale) {
            auto rotated = std::make_shared<EigenBasis>(rotate_basis(*basis, r));
            return {std::move(rotated), std::move(t_new), true};
        }
    }
    throw solver_error("frame rotation failed to clear zero coefficients");
}

} // namespace

// ---------------------------------------------------------------------------
// N=5 coefficient problem
// ---------------------------------------------------------------------------

namespace {

struct FProblem {
    const BasisQuadrature* quad;
    int n;

    double value(const Vec& t) const {
        const double two_star = 2.0 * n / (n - 2.0);
        return 0.5 * quad->norm_g_sq(t) - quad->norm_g_p(t, two_star) / two_star;
    }
    Vec gradient(const Vec& t) const {
        Vec g = quad->inner_f_e(t, n);
        for (std::size_t l = 0; l < t.size(); ++l)
            g[l] = t[l] * quad->basis().l2_norms_sq[l] - g[l];
        return g;
    }
    Mat hessian(const Vec& t) const {
        Mat h = quad->inner_fprime_ee(t, n);
        const std::size_t m = t.size();
        Mat out(m, m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b)
                out(a, b) = (a == b ? quad->basis().l2_norms_sq[a] : 0.0) - h(a, b);
        return out;
    }
};

Vec maximize_f_from(const FProblem& f, Vec t, double tol, int max_iters) {
    double val = f.value(t);
    for (int it = 0; it < max_iters; ++it) {
        Vec g = f.gradient(t);
        if (norm_inf(g) < tol) break;
        bool stepped = false;
        Mat h = f.hessian(t);
        auto eig = sym_eig(h, false);
        if (eig.values.back() < 0.0) {
            try {
                Vec step = lu_solve(h, g);
                Vec cand(t);
                for (std::size_t i = 0; i < t.size(); ++i) cand[i] -= step[i];
                const double cv = f.value(cand);
                if (cv >= val - 1e-18) {
                    t = cand;
                    val = cv;
                    stepped = true;
                }
            } catch (const numerical_error&) {
            }
        }
        if (!stepped) {
            double step = 1.0 / (1.0 + norm2(g));
            Vec cand(t.size());
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t i = 0; i < t.size(); ++i) cand[i] = t[i] + step * g[i];
                const double cv = f.value(cand);
                if (cv > val) {
                    t = cand;
                    val = cv;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
    }
    return t;
}

} // namespace

TSolveResult solve_n5_t(const Domain& dom, const EigenBasis& basis, int m,
                        const SolverOptions& opts) {
    if (m < 1 || m > basis.multiplicity)
        throw argument_error("solve_n5_t: m out of range 1.." +
                             std::to_string(basis.multiplicity));
    const int n = 5;
    auto sub = truncate_basis(basis, m);
    BasisQuadrature quad(dom, *sub, opts.quad_order, opts.angular_order);
    FProblem f{&quad, n};

    // Per-axis scales from the single-coefficient stationary points.
    Vec scale(m, 1.0);
    for (int l = 0; l < m; ++l) {
        Vec unit(m, 0.0);
        unit[l] = 1.0;
        scale[l] = std::pow(sub->l2_norms_sq[l] / quad.norm_g_p(unit, 2.0 * n / (n - 2.0)),
                            (n - 2.0) / 4.0);
    }

    Vec best;
    double best_val = -std::numeric_limits<double>::infinity();
    const int starts = std::max(4, opts.multistarts / 4);
    for (int s = 0; s < starts; ++s) {
        Vec t(m);
        for (int l = 0; l < m; ++l)
            t[l] = scale[l] * (0.25 + 1.5 * halton(s + 1, nth_prime(l))) *
                   (halton(s + 1, nth_prime(m + l)) < 0.5 ? -1.0 : 1.0);
        t = maximize_f_from(f, t, opts.tol_gradient, 200);
        if (norm_inf(f.gradient(t)) > 1e-8) continue;
        const double val = f.value(t);
        if (val > best_val + 1e-14 * (1.0 + std::abs(best_val)) ||
            (std::abs(val - best_val) <= 1e-14 * (1.0 + std::abs(best_val)) && t > best)) {
            best_val = val;
            best = t;
        }
    }
    if (best.empty() || norm2(best) < 1e-8)
        throw solver_error("solve_n5_t: maximizer collapsed to the origin (trivial)");

    RotatedFrame frame = ensure_nontrivial_components(sub, best);
    TSolveResult out;
    out.rotated = frame.rotated;
    if (frame.rotated) {
        // Re-certify in the rotated frame on a freshly cached quadrature.
        BasisQuadrature rq(dom, *frame.basis, opts.quad_order, opts.angular_order);
        FProblem fr{&rq, n};
        Vec t = maximize_f_from(fr, frame.t, opts.tol_gradient, 50);
        out.basis = frame.basis;
        out.t0 = t;
        out.f_value = fr.value(t);
        out.gradient_norm = norm_inf(fr.gradient(t));
        out.hessian_eigs = sym_eig(fr.hessian(t), false).values;
        out.norm_g_sq = rq.norm_g_sq(t);
        out.norm_g_2star = rq.norm_g_p(t, 2.0 * n / (n - 2.0));
    } else {
        out.basis = sub;
        out.t0 = frame.t;
        out.f_value = best_val;
        out.gradient_norm = norm_inf(f.gradient(frame.t));
        out.hessian_eigs = sym_eig(f.hessian(frame.t), false).values;
        out.norm_g_sq = quad.norm_g_sq(frame.t);
        out.norm_g_2star = quad.norm_g_p(frame.t, 2.0 * n / (n - 2.0));
    }

    // Deterministic sign: largest-magnitude component positive.
    std::size_t lead = 0;
    for (std::size_t l = 1; l < out.t0.size(); ++l)
        if (std::abs(out.t0[l]) > std::abs(out.t0[lead])) lead = l;
    if (out.t0[lead] < 0.0)
        for (double& v : out.t0) v = -v;

    if (out.gradient_norm > 1e-8)
        throw solver_error("solve_n5_t: gradient " + fmt_sci(out.gradient_norm) +
                           " above the 1e-8 certificate");
    double max_abs = 0.0;
    for (double v : out.hessian_eigs) max_abs = std::max(max_abs, std::abs(v));
    if (out.hessian_eigs.back() >= -1e-6 * max_abs)
        throw solver_error(
            "solve_n5_t: Hessian eigenvalue within tolerance of 0 (nondegeneracy failure)");
    for (double v : out.t0)
        if (std::abs(v) <= 1e-9 * norm2(out.t0))
            throw solver_error("solve_n5_t: trivial component survived rotation");
    return out;
}

// ---------------------------------------------------------------------------
// Bubble sites
// ---------------------------------------------------------------------------

namespace {

Vec newton_critical_point(const Combination& g, const Domain& dom, Vec x, double tol) {
    const double sign0 = g.value(x) > 0 ? 1.0 : -1.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Vec cur = x;
        const double damping = attempt == 0 ? 1.0 : 0.25;
        bool ok = true;
        for (int it = 0; it < 300; ++it) {
            Vec grad = g.gradient(cur);
            if (norm_inf(grad) < tol) break;
            Mat hess = g.hessian(cur);
            Vec step;
            try {
                step = lu_solve(hess, grad);
            } catch (const numerical_error&) {
                ok = false;
                break;
            }
            double lam = damping;
            const double base = std::abs(g.value(cur));
            Vec cand(cur.size());
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t i = 0; i < cur.size(); ++i) cand[i] = cur[i] - lam * step[i];
                const double val = g.value(cand);
                if (dom.inside(cand) && val * sign0 > 0.0 &&
                    std::abs(val) >= base * (1.0 - 1e-9)) {
                    cur = cand;
                    accepted = true;
                    break;
                }
                lam *= 0.5;
            }
            if (!accepted) {
                ok = false;
                break;
            }
        }
        if (ok && norm_inf(g.gradient(cur)) < tol && g.value(cur) * sign0 > 0.0) return cur;
    }
    throw solver_error("find_bubble_sites: ascent left the nodal domain");
}

} // namespace

std::vector<Vec> find_bubble_sites(const Vec& t0, const EigenBasis& basis, const Domain& dom,
                                   int k, const SolverOptions& opts) {
    Combination g(basis, t0);
    auto report = domain::nodal_domains([&](const Vec& x) { return g.value(x); }, dom,
                                        opts.grid_resolution);
    if (k > report.count)
        throw capability_error("find_bubble_sites: k = " + std::to_string(k) +
                               " exceeds the nodal-domain count n_kappa = " +
                               std::to_string(report.count));

    std::vector<Vec> reps = report.representatives;
    std::sort(reps.begin(), reps.end(), [&](const Vec& a, const Vec& b) {
        const double va = std::abs(g.value(a)), vb = std::abs(g.value(b));
        if (va != vb) return va > vb;
        return a < b;
    });
    reps.resize(static_cast<std::size_t>(k));

    std::vector<Vec> sites;
    for (const auto& rep : reps) {
        Vec xi = newton_critical_point(g, dom, rep, 1e-9);
        const double gval = g.value(xi);
        if (gval == 0.0) throw solver_error("find_bubble_sites: critical point on the nodal set");
        Mat h = g.hessian(xi);
        double tr = 0.0;
        for (std::size_t i = 0; i < h.rows(); ++i) tr += h(i, i);
        const double rel = std::abs(tr + basis.lambda * gval) / std::abs(basis.lambda * gval);
        if (rel > 1e-4)
            throw solver_error("find_bubble_sites: Hessian trace identity off by " + fmt_sci(rel));
        sites.push_back(xi);
    }
    std::sort(sites.begin(), sites.end());
    return sites;
}

// ---------------------------------------------------------------------------
// N=5 height problem
// ---------------------------------------------------------------------------

Vec solve_n5_s(const Vec& a) {
    const std::size_t k = a.size();
    for (double v : a)
        if (!(v > 0.0)) throw argument_error("solve_n5_s: a_j must be positive");

    auto grad = [&](const Vec& nu) {
        double sum3 = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum3 += a[j] * nu[j] * nu[j] * nu[j];
        Vec g(k);
        for (std::size_t j = 0; j < k; ++j)
            g[j] = a[j] * a[j] * nu[j] - sum3 * a[j] * nu[j] * nu[j];
        return g;
    };
    auto hess = [&](const Vec& nu) {
        double sum3 = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum3 += a[j] * nu[j] * nu[j] * nu[j];
        Mat h(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                double v = -(3.0 * a[j] * nu[j] * nu[j]) * (a[i] * nu[i] * nu[i]);
                if (i == j) v += a[i] * a[i] - 2.0 * sum3 * a[i] * nu[i];
                h(i, j) = v;
            }
        return h;
    };

    double k4 = 0.0;
    for (double v : a) k4 += v * v * v * v;
    Vec closed(k);
    for (std::size_t j = 0; j < k; ++j) closed[j] = a[j] / std::pow(k4, 0.25);

    Vec nu(k, 1.0);
    bool restarted = false;
    for (int it = 0; it < 500; ++it) {
        Vec g = grad(nu);
        if (norm_inf(g) < 1e-13) break;
        Vec cand(k);
        bool have_cand = false;
        try {
            Vec step = lu_solve(hess(nu), g);
            for (std::size_t j = 0; j < k; ++j) cand[j] = nu[j] - step[j];
            have_cand = *std::min_element(cand.begin(), cand.end()) > 0.0;
        } catch (const numerical_error&) {
        }
        if (!have_cand) {
            double lam = 0.1;
            for (int bt = 0; bt < 50 && !have_cand; ++bt) {
                for (std::size_t j = 0; j < k; ++j) cand[j] = nu[j] + lam * g[j];
                have_cand = *std::min_element(cand.begin(), cand.end()) > 0.0;
                lam *= 0.5;
            }
            if (!have_cand) {
                if (restarted)
                    throw solver_error("solve_n5_s: optimizer exited the positive orthant twice");
                nu = closed;
                restarted = true;
                continue;
            }
        }
        nu = cand;
    }

    Vec s(k);
    for (std::size_t j = 0; j < k; ++j) s[j] = nu[j] * nu[j];
    for (std::size_t j = 0; j < k; ++j) {
        const double ref = closed[j] * closed[j];
        if (std::abs(s[j] - ref) > 1e-6 * std::max(1.0, std::abs(ref)))
            throw solver_error("solve_n5_s: optimizer disagrees with the closed form");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Coupling data
// ---------------------------------------------------------------------------

CouplingData coupling_data(const Vec& t0, const std::vector<Vec>& xi0, const Vec& s0,
                           const EigenBasis& basis, int n, double c1, double norm_g_sq) {
    Combination g(basis, t0);
    CouplingData out;
    const std::size_t k = xi0.size();
    out.a.resize(k);
    out.beta.resize(k);
    double sum_s2 = 0.0, sum_a2 = 0.0;
    out.l0 = 0.0;
    const bool have_s = s0.size() == k;
    for (std::size_t j = 0; j < k; ++j) {
        const double gv = g.value(xi0[j]);
        out.a[j] = std::abs(gv);
        if (out.a[j] == 0.0) throw solver_error("coupling_data: degenerate site, G(xi_j) = 0");
        out.beta[j] = gv > 0 ? -1.0 : 1.0;
        if (have_s) {
            out.l0 -= out.a[j] * std::pow(s0[j], (n - 2.0) / 2.0);
            sum_s2 += s0[j] * s0[j];
        }
        sum_a2 += out.a[j] * out.a[j];
    }
    out.a0 = (n == 4 && have_s) ? c1 * sum_a2 * sum_a2 / (sum_s2 * norm_g_sq) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Stationarity
// ---------------------------------------------------------------------------

StationarityReport verify_stationarity(const ReducedSolution& sol, const BasisQuadrature& quad) {
    const EigenBasis& basis = quad.basis();
    Combination g(basis, sol.t0);
    StationarityReport rep;

    for (int j = 0; j < sol.k; ++j)
        rep.gradient_family = std::max(rep.gradient_family, norm_inf(g.gradient(sol.xi0[j])));

    double sum_s2 = 0.0;
    for (int j = 0; j < sol.k; ++j) sum_s2 += sol.s0[j] * sol.s0[j];

    if (sol.n == 4) {
        for (int l = 0; l < sol.m; ++l) {
            double acc = sol.l0 * basis.l2_norms_sq[l] * sol.t0[l] / sol.norm_g_sq;
            for (int j = 0; j < sol.k; ++j) {
                const double gv = g.value(sol.xi0[j]);
                acc += (gv > 0 ? 1.0 : -1.0) * sol.s0[j] * basis.functions[l]->value(sol.xi0[j]);
            }
            rep.coefficient_family = std::max(rep.coefficient_family, std::abs(acc));
        }
        for (int j = 0; j < sol.k; ++j) {
            const double gv = g.value(sol.xi0[j]);
            const double acc = sum_s2 * gv + (gv > 0 ? 1.0 : -1.0) * sol.l0 * sol.s0[j];
            rep.height_family = std::max(rep.height_family, std::abs(acc));
        }
    } else {
        Vec fe = quad.inner_f_e(sol.t0, 5);
        const double ratio = sol.norm_g_sq / sol.norm_g_2star;
        for (int l = 0; l < sol.m; ++l) {
            const double acc = sol.t0[l] * basis.l2_norms_sq[l] - ratio * fe[l];
            rep.coefficient_family = std::max(rep.coefficient_family, std::abs(acc));
        }
        for (int j = 0; j < sol.k; ++j) {
            const double gv = g.value(sol.xi0[j]);
            const double acc = gv + (gv > 0 ? 1.0 : -1.0) * sol.l0 * std::sqrt(sol.s0[j]) / sum_s2;
            rep.height_family = std::max(rep.height_family, std::abs(acc));
        }
    }
    return rep;
}

BasisQuadrature make_quadrature(const Domain& dom, const ReducedSolution& sol,
                                const SolverOptions& opts) {
    return BasisQuadrature(dom, *sol.basis, opts.quad_order, opts.angular_order);
}

// ---------------------------------------------------------------------------
// N=4 pipeline
// ---------------------------------------------------------------------------

namespace {

int count_g2_maxima(const Combination& g, const Domain& dom, int res) {
    const int n = dom.dim();
    Vec lo(n, 0.0), hi(n, 0.0);
    if (dom.spec().kind == domain::Kind::hyperbox) {
        hi = dom.spec().sides;
    } else {
        std::fill(lo.begin(), lo.end(), -1.0);
        std::fill(hi.begin(), hi.end(), 1.0);
    }
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(res);
    std::vector<double> val(total, -1.0);
    Vec x(n);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int d = 0; d < n; ++d) {
            const std::size_t i = rem % res;
            rem /= res;
            x[d] = lo[d] + (hi[d] - lo[d]) * (static_cast<double>(i) + 0.5) / res;
        }
        if (!dom.inside(x)) continue;
        const double v = g.value(x);
        val[idx] = v * v;
    }
    int count = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (val[idx] <= 0.0) continue;
        bool is_max = true;
        std::size_t stride = 1;
        std::size_t rem = idx;
        for (int d = 0; d < n && is_max; ++d) {
            const std::size_t coord = rem % res;
            rem /= res;
            if (coord > 0 && val[idx - stride] >= val[idx]) is_max = false;
            if (coord + 1 < static_cast<std::size_t>(res) && val[idx + stride] > val[idx])
                is_max = false;
            stride *= res;
        }
        if (is_max) ++count;
    }
    return count;
}

double barrier_margin(const std::vector<Vec>& xi, const Domain& dom, double rho) {
    double margin = std::numeric_limits<double>::max();
    for (const auto& p : xi) margin = std::min(margin, dom.boundary_distance(p) - 2.0 * rho);
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = i + 1; j < xi.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < xi[i].size(); ++d) {
                const double dd = xi[i][d] - xi[j][d];
                d2 += dd * dd;
            }
            margin = std::min(margin, std::sqrt(d2) - 2.0 * rho);
        }
    return margin;
}

// nu-step of the alternating maximization: for fixed sites the optimal
// coefficients solve the generalized eigenproblem M(eta) nu = theta D nu.
std::pair<Vec, double> best_coefficients(const EigenBasis& basis, const std::vector<Vec>& xi) {
    const std::size_t m = basis.functions.size();
    Mat msum(m, m);
    for (const auto& p : xi) {
        Vec e(m);
        for (std::size_t l = 0; l < m; ++l) e[l] = basis.functions[l]->value(p);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) msum(a, b) += e[a] * e[b];
    }
    Vec dinv(m);
    for (std::size_t l = 0; l < m; ++l) dinv[l] = 1.0 / std::sqrt(basis.l2_norms_sq[l]);
    Mat sym(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) sym(a, b) = dinv[a] * msum(a, b) * dinv[b];
    auto eig = sym_eig(sym, true);
    const std::size_t top = m - 1;
    Vec t(m);
    for (std::size_t l = 0; l < m; ++l) t[l] = dinv[l] * eig.vectors(l, top);
    const double nrm = norm2(t);
    for (double& v : t) v /= nrm;
    return {t, eig.values[top]};
}

struct N4State {
    Vec t;
    std::vector<Vec> xi;
    double objective = -1.0;
    bool barrier_active = false;
};

} // namespace

ReducedSolution solve_n4(const Domain& dom, const EigenBasis& basis, int k, int m, double rho,
                         double c1, const SolverOptions& opts) {
    if (dom.dim() != 4) throw config_error("solve_n4: dimension must be 4");
    if (m < 1 || m > basis.multiplicity)
        throw config_error("solve_n4: m out of range 1.." + std::to_string(basis.multiplicity));
    if (k < 1) throw config_error("solve_n4: k >= 1");

    auto sub = truncate_basis(basis, m);
    const int n = 4;
    N4State best;
    int degenerate_runs = 0;

    for (int start = 0; start < opts.multistarts; ++start) {
        std::vector<Vec> xi;
        for (int j = 0; j < k; ++j) {
            Vec p(n);
            for (int redraw = 0; redraw < 64; ++redraw) {
                for (int d = 0; d < n; ++d) {
                    const double u = halton(1 + start * 97 + j * 13 + redraw * 7, nth_prime(d));
                    if (dom.spec().kind == domain::Kind::hyperbox)
                        p[d] = dom.spec().sides[d] * (0.1 + 0.8 * u);
                    else
                        p[d] = -0.7 + 1.4 * u;
                }
                if (!dom.inside(p) || dom.boundary_distance(p) < 2.0 * rho) continue;
                bool clash = false;
                for (const auto& q : xi) {
                    double d2 = 0.0;
                    for (int d = 0; d < n; ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
                    if (std::sqrt(d2) < 2.0 * rho) clash = true;
                }
                if (!clash) break;
            }
            xi.push_back(p);
        }

        Vec t;
        double theta = 0.0;
        for (int round = 0; round < 120; ++round) {
            auto [tc, th] = best_coefficients(*sub, xi);
            t = tc;
            Combination g(*sub, t);
            double gmax2 = 0.0;
            for (const auto& p : xi) gmax2 = std::max(gmax2, g.value(p) * g.value(p));
            const double sig = opts.barrier_strength * std::max(gmax2, 1e-12);
            for (int j = 0; j < k; ++j) {
                auto site_obj = [&](const Vec& p) {
                    if (!dom.inside(p)) return -std::numeric_limits<double>::infinity();
                    const double bd = dom.boundary_distance(p) - 2.0 * rho;
                    if (bd <= 0.0) return -std::numeric_limits<double>::infinity();
                    double obj = g.value(p) * g.value(p) + sig * std::log(bd);
                    for (int i = 0; i < k; ++i) {
                        if (i == j) continue;
                        double d2 = 0.0;
                        for (int d = 0; d < n; ++d) d2 += (p[d] - xi[i][d]) * (p[d] - xi[i][d]);
                        const double sep = std::sqrt(d2) - 2.0 * rho;
                        if (sep <= 0.0) return -std::numeric_limits<double>::infinity();
                        obj += sig * std::log(sep);
                    }
                    return obj;
                };
                Vec p = xi[j];
                for (int it = 0; it < 25; ++it) {
                    const double gv = g.value(p);
                    Vec dir = scaled(g.gradient(p), 2.0 * gv);
                    if (norm_inf(dir) < 1e-14) break;
                    double lam = 0.25 / (1.0 + norm2(dir));
                    const double base = site_obj(p);
                    bool moved = false;
                    Vec cand(n);
                    for (int bt = 0; bt < 30; ++bt) {
                        for (int d = 0; d < n; ++d) cand[d] = p[d] + lam * dir[d];
                        if (site_obj(cand) > base) {
                            p = cand;
                            moved = true;
                            break;
                        }
                        lam *= 0.5;
                    }
                    if (!moved) break;
                }
                xi[j] = p;
            }
            if (round > 4 && std::abs(th - theta) < 1e-14 * (1.0 + std::abs(th))) {
                theta = th;
                break;
            }
            theta = th;
        }

        // Joint polish: alternate exact nu-step and per-site Newton until the
        // site gradients are stationary for the final coefficients.
        bool active = barrier_margin(xi, dom, rho) < 0.05 * rho;
        Vec t_final = t;
        double theta_final = theta;
        if (!active) {
            try {
                for (int polish = 0; polish < 8; ++polish) {
                    auto [tp, thp] = best_coefficients(*sub, xi);
                    t_final = tp;
                    theta_final = thp;
                    Combination g(*sub, t_final);
                    double worst = 0.0;
                    for (int j = 0; j < k; ++j) {
                        xi[j] = newton_critical_point(g, dom, xi[j], 1e-11);
                        worst = std::max(worst, norm_inf(g.gradient(xi[j])));
                    }
                    if (worst < 1e-10) {
                        auto [tf, thf] = best_coefficients(*sub, xi);
                        if (norm_inf(vec_sub(tf, t_final)) < 1e-12) {
                            t_final = tf;
                            theta_final = thf;
                            break;
                        }
                    }
                }
            } catch (const solver_error&) {
                active = true;
            }
            if (barrier_margin(xi, dom, rho) < 0.05 * rho) active = true;
        }

        Combination gf(*sub, t_final);
        double min_a = std::numeric_limits<double>::max(), max_a = 0.0;
        for (const auto& p : xi) {
            min_a = std::min(min_a, std::abs(gf.value(p)));
            max_a = std::max(max_a, std::abs(gf.value(p)));
        }
        if (min_a <= 1e-10 * std::max(max_a, 1.0)) {
            ++degenerate_runs;
            continue;
        }

        std::vector<Vec> xs = xi;
        std::sort(xs.begin(), xs.end());
        if (theta_final > best.objective + 1e-13 * (1.0 + std::abs(best.objective)) ||
            (std::abs(theta_final - best.objective) <= 1e-13 * (1.0 + std::abs(best.objective)) &&
             xs < best.xi)) {
            best.t = t_final;
            best.xi = xs;
            best.objective = theta_final;
            best.barrier_active = active;
        }
    }

    if (best.objective < 0.0)
        throw solver_error("solve_n4: all " + std::to_string(opts.multistarts) +
                           " multistarts degenerate (some a_j -> 0, " +
                           std::to_string(degenerate_runs) + " degenerate runs)");

    RotatedFrame frame = ensure_nontrivial_components(sub, best.t);
    sub = frame.basis;
    best.t = frame.t;
    {
        std::size_t lead = 0;
        for (std::size_t l = 1; l < best.t.size(); ++l)
            if (std::abs(best.t[l]) > std::abs(best.t[lead])) lead = l;
        if (best.t[lead] < 0.0)
            for (double& v : best.t) v = -v;
        const double nrm = norm2(best.t);
        for (double& v : best.t) v /= nrm;
    }

    Combination g(*sub, best.t);
    const int cap = count_g2_maxima(g, dom, opts.grid_resolution);
    if (k > cap)
        throw solver_error("solve_n4: k = " + std::to_string(k) + " exceeds the " +
                           std::to_string(cap) +
                           " distinct local maxima of (sum t e)^2 at grid resolution " +
                           std::to_string(opts.grid_resolution));

    BasisQuadrature quad(dom, *sub, opts.quad_order, opts.angular_order);

    ReducedSolution sol;
    sol.n = n;
    sol.kappa = basis.kappa;
    sol.m = m;
    sol.k = k;
    sol.rho = rho;
    sol.basis = sub;
    sol.t0 = best.t;
    sol.xi0 = best.xi;
    sol.c1 = c1;
    sol.norm_g_sq = quad.norm_g_sq(best.t);
    sol.norm_g_2star = quad.norm_g_p(best.t, 2.0 * n / (n - 2.0));
    sol.objective = best.objective;
    sol.barrier_active = best.barrier_active;
    sol.n_kappa = cap;

    CouplingData pre = coupling_data(best.t, best.xi, Vec(), *sub, n, c1, sol.norm_g_sq);
    sol.s0 = pre.a; // the special decoupling solution s = a
    CouplingData cd = coupling_data(best.t, best.xi, sol.s0, *sub, n, c1, sol.norm_g_sq);
    sol.a = cd.a;
    sol.beta = cd.beta;
    sol.l0 = cd.l0;
    sol.a0 = cd.a0;

    sol.stationarity = verify_stationarity(sol, quad);
    if (!sol.barrier_active && sol.stationarity.max_residual() > 1e-8)
        throw solver_error("solve_n4: stationarity residual " +
                           fmt_sci(sol.stationarity.max_residual()) + " above 1e-8");
    return sol;
}

// ---------------------------------------------------------------------------
// N=5 pipeline
// ---------------------------------------------------------------------------

ReducedSolution solve_n5(const Domain& dom, const EigenBasis& basis, int k, int m, double rho,
                         const SolverOptions& opts) {
    if (dom.dim() != 5) throw config_error("solve_n5: dimension must be 5");
    if (m < 1 || m > basis.multiplicity)
        throw config_error("solve_n5: m out of range 1.." + std::to_string(basis.multiplicity));

    TSolveResult ts = solve_n5_t(dom, basis, m, opts);
    const EigenBasis& sub = *ts.basis;

    std::vector<Vec> xi = find_bubble_sites(ts.t0, sub, dom, k, opts);

    Combination g(sub, ts.t0);
    auto nodal = domain::nodal_domains([&](const Vec& x) { return g.value(x); }, dom,
                                       opts.grid_resolution);

    ReducedSolution sol;
    sol.n = 5;
    sol.kappa = basis.kappa;
    sol.m = m;
    sol.k = k;
    sol.rho = rho;
    sol.basis = ts.basis;
    sol.t0 = ts.t0;
    sol.xi0 = xi;
    sol.objective = ts.f_value;
    sol.hessian_eigs = ts.hessian_eigs;
    sol.norm_g_sq = ts.norm_g_sq;
    sol.norm_g_2star = ts.norm_g_2star;
    sol.n_kappa = nodal.count;

    CouplingData pre = coupling_data(ts.t0, xi, Vec(), sub, 5, 0.0, sol.norm_g_sq);
    sol.s0 = solve_n5_s(pre.a);
    CouplingData cd = coupling_data(ts.t0, xi, sol.s0, sub, 5, 0.0, sol.norm_g_sq);
    sol.a = cd.a;
    sol.beta = cd.beta;
    sol.l0 = cd.l0;
    sol.a0 = 0.0;

    domain::ConfigurationSet config{rho, xi};
    sol.barrier_active = !domain::admissible(config, dom);

    BasisQuadrature quad(dom, sub, opts.quad_order, opts.angular_order);
    sol.stationarity = verify_stationarity(sol, quad);
    if (sol.stationarity.max_residual() > 1e-8)
        throw solver_error("solve_n5: stationarity residual " +
                           fmt_sci(sol.stationarity.max_residual()) + " above 1e-8");
    return sol;
}

// ---------------------------------------------------------------------------
// Basis rotation
// ---------------------------------------------------------------------------

namespace {

class RotatedEigenfunction : public domain::Eigenfunction {
public:
    RotatedEigenfunction(std::vector<std::shared_ptr<const domain::Eigenfunction>> fns, Vec row)
        : fns_(std::move(fns)), row_(std::move(row)) {}

    double value(domain::Point x) const override {
        double v = 0.0;
        for (std::size_t i = 0; i < fns_.size(); ++i) v += row_[i] * fns_[i]->value(x);
        return v;
    }
    Vec gradient(domain::Point x) const override {
        Vec g(x.size(), 0.0);
        for (std::size_t i = 0; i < fns_.size(); ++i) {
            Vec gi = fns_[i]->gradient(x);
            for (std::size_t d = 0; d < g.size(); ++d) g[d] += row_[i] * gi[d];
        }
        return g;
    }
    Mat hessian(domain::Point x) const override {
        Mat h(x.size(), x.size());
        for (std::size_t i = 0; i < fns_.size(); ++i) {
            Mat hi = fns_[i]->hessian(x);
            for (std::size_t a = 0; a < h.rows(); ++a)
                for (std::size_t b = 0; b < h.cols(); ++b) h(a, b) += row_[i] * hi(a, b);
        }
        return h;
    }

private:
    std::vector<std::shared_ptr<const domain::Eigenfunction>> fns_;
    Vec row_;
};

} // namespace

domain::EigenBasis rotate_basis(const domain::EigenBasis& basis, const Mat& r) {
    const std::size_t m = basis.functions.size();
    if (r.rows() != m || r.cols() != m) throw argument_error("rotate_basis: shape mismatch");
    domain::EigenBasis out = basis;
    out.functions.clear();
    for (std::size_t i = 0; i < m; ++i) {
        Vec row(m);
        for (std::size_t j = 0; j < m; ++j) row[j] = r(i, j);
        out.functions.push_back(std::make_shared<RotatedEigenfunction>(basis.functions, row));
        out.l2_norms_sq[i] = basis.l2_norms_sq[i];
    }
    return out;
}

} // namespace bnlab::reduced
