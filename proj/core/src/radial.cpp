#include "bnlab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "bnlab/bubble.hpp"
#include "bnlab/domain.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/parallel.hpp"

namespace bnlab::radial {

namespace {

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

struct Rhs {
    int n;
    double lambda;
    bool linear;

    void operator()(double r, const double y[2], double dy[2]) const {
        const double f = linear ? 0.0 : bubble::nonlinearity(y[0], n, 0);
        dy[0] = y[1];
        dy[1] = -(n - 1) / r * y[1] - lambda * y[0] - f;
    }
};

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

// Cubic Hermite refinement of a sign change inside one accepted step.
double refine_node(double r0, double u0, double v0, double r1, double u1, double v1) {
    const double h = r1 - r0;
    auto eval = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        return u0 * (2 * s3 - 3 * s2 + 1) + h * v0 * (s3 - 2 * s2 + s) +
               u1 * (-2 * s3 + 3 * s2) + h * v1 * (s3 - s2);
    };
    double lo = 0.0, hi = 1.0;
    double flo = u0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return r0 + 0.5 * (lo + hi) * h;
}

} // namespace

ShootResult shoot(int n, double lambda, double u0, const ShootOptions& opts) {
    if (n != 4 && n != 5) throw config_error("shoot: n must be 4 or 5");
    if (u0 == 0.0) throw argument_error("shoot: u0 must be nonzero");
    const auto c = bubble::DimensionConstants::make(n);
    Rhs rhs{n, lambda, opts.drop_nonlinearity};

    // Series start inside the core: u = u0 - c0 r^2/(2n) + O(r^4).
    const double core = std::pow(c.alpha_n / std::abs(u0), 2.0 / (n - 2.0));
    double r = std::min(opts.series_radius, 1e-3 * core);
    r = std::max(r, 1e-280);
    const double c0 =
        lambda * u0 + (opts.drop_nonlinearity ? 0.0 : bubble::nonlinearity(u0, n, 0));
    double y[2] = {u0 - c0 * r * r / (2.0 * n), -c0 * r / n};

    ShootResult out;
    out.samples.push_back({r, y[0], y[1]});
    out.max_pos = std::max(0.0, y[0]);
    out.max_neg = std::max(0.0, -y[0]);

    double h = r * 0.1;
    double k1[2];
    rhs(r, y, k1);
    const double tol = opts.rel_tol;
    int rejected_in_row = 0;

    while (r < 1.0) {
        if (r + h > 1.0) h = 1.0 - r;
        double k2[2], k3[2], k4[2], k5[2], k6[2], k7[2], yt[2], y5[2];

        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * A21 * k1[i];
        rhs(r + h / 5, yt, k2);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        rhs(r + 3 * h / 10, yt, k3);
        for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        rhs(r + 4 * h / 5, yt, k4);
        for (int i = 0; i < 2; ++i)
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        rhs(r + 8 * h / 9, yt, k5);
        for (int i = 0; i < 2; ++i)
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        rhs(r + h, yt, k6);
        for (int i = 0; i < 2; ++i)
            y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        rhs(r + h, y5, k7);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            const double sc = tol * (std::abs(y[i]) + std::abs(h * k1[i])) + 1e-280;
            err = std::max(err, std::abs(e) / sc);
        }

        if (err <= 1.0) {
            const double r_new = r + h;
            // node bookkeeping on the accepted step
            if ((y[0] > 0) != (y5[0] > 0) && y5[0] != 0.0) {
                if (r_new < 1.0 - 1e-12)
                    out.node_radii.push_back(refine_node(r, y[0], y[1], r_new, y5[0], y5[1]));
            }
            r = r_new;
            y[0] = y5[0];
            y[1] = y5[1];
            k1[0] = k7[0];
            k1[1] = k7[1];
            out.samples.push_back({r, y[0], y[1]});
            out.max_pos = std::max(out.max_pos, y[0]);
            out.max_neg = std::max(out.max_neg, -y[0]);
            if (std::abs(y[0]) > opts.blowup_threshold) {
                out.blew_up = true;
                out.blowup_radius = r;
                break;
            }
            rejected_in_row = 0;
        } else if (++rejected_in_row > 200) {
            throw numerical_error("shoot: step control stalled at r = " + fmt_sci(r));
        }
        const double fac = std::clamp(0.9 * std::pow(err + 1e-30, -0.2), 0.2, 5.0);
        h *= fac;
        if (h < 1e-300) throw numerical_error("shoot: step underflow at r = " + fmt_sci(r));
    }
    out.u_end = y[0];
    out.du_end = y[1];
    return out;
}

RadialProfile solve_radial(int n, double lambda, int node_count, const ShootOptions& opts,
                           double u0_min, double u0_max) {
    // Geometric scan for a bracket: node count steps from `node_count` to
    // `node_count`+1 while u(1) changes sign.
    const int scan = 240;
    double prev_u0 = 0.0, prev_end = 0.0;
    int prev_nodes = -1;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i <= scan; ++i) {
        const double u0 = u0_min * std::pow(u0_max / u0_min, static_cast<double>(i) / scan);
        ShootResult s = shoot(n, lambda, u0, opts);
        if (s.blew_up) {
            prev_nodes = -1;
            continue;
        }
        const int nodes = static_cast<int>(s.node_radii.size());
        if (prev_nodes == node_count &&
            ((prev_end > 0) != (s.u_end > 0)) && nodes >= node_count) {
            lo = prev_u0;
            hi = u0;
            break;
        }
        prev_u0 = u0;
        prev_end = s.u_end;
        prev_nodes = nodes;
    }
    if (hi == 0.0)
        throw solver_error("solve_radial: no bracket with " + std::to_string(node_count) +
                           " nodes in u0 range [" + fmt_sci(u0_min) + ", " + fmt_sci(u0_max) +
                           "]");

    double flo = shoot(n, lambda, lo, opts).u_end;
    double u0 = lo;
    double best_end = std::abs(flo);
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi); // geometric bisection
        ShootResult s = shoot(n, lambda, mid, opts);
        if (std::abs(s.u_end) < best_end) {
            best_end = std::abs(s.u_end);
            u0 = mid;
        }
        if ((s.u_end > 0) == (flo > 0)) {
            lo = mid;
            flo = s.u_end;
        } else {
            hi = mid;
        }
        if (best_end <= 1e-12 || hi / lo - 1.0 < 1e-15) break;
    }
    ShootResult s = shoot(n, lambda, u0, opts);
    if (std::abs(s.u_end) > 1e-10)
        throw solver_error("solve_radial: |u(1)| = " + fmt_sci(std::abs(s.u_end)) +
                           " above the 1e-10 shooting tolerance");
    if (static_cast<int>(s.node_radii.size()) != node_count)
        throw solver_error("solve_radial: converged profile has " +
                           std::to_string(s.node_radii.size()) + " nodes, wanted " +
                           std::to_string(node_count));

    RadialProfile p;
    p.lambda = lambda;
    p.u0 = u0;
    p.node_radii = s.node_radii;
    p.samples = std::move(s.samples);
    p.max_pos = s.max_pos;
    p.max_neg = s.max_neg;
    return p;
}

namespace {

// Normalized radial eigenfunction profile r^{1-n/2} J_{n/2-1}(j r), scaled to
// its value at r -> 0.
double eigen_profile(int n, double j, double r) {
    const double nu = n / 2.0 - 1.0;
    if (r < 1e-8) return 1.0;
    const double lead = std::pow(j / 2.0, nu) / std::tgamma(nu + 1.0);
    return std::pow(r, -nu) * std::cyl_bessel_j(nu, j * r) / lead;
}

double profile_distance(int n, double j, const RadialProfile& p) {
    // Exclude the collapsing core: compare on r >= sqrt(r_node); both profiles
    // sup-normalized over the comparison window.
    if (p.node_radii.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double r_cut = std::sqrt(p.node_radii.front());
    double sup_u = 0.0, sup_e = 0.0;
    for (const auto& s : p.samples) {
        if (s.r < r_cut) continue;
        sup_u = std::max(sup_u, std::max(0.0, -s.u));
        sup_e = std::max(sup_e, eigen_profile(n, j, s.r));
    }
    if (sup_u == 0.0) return std::numeric_limits<double>::quiet_NaN();
    double dist = 0.0;
    for (const auto& s : p.samples) {
        if (s.r < r_cut) continue;
        const double pu = std::max(0.0, -s.u) / sup_u;
        const double pe = eigen_profile(n, j, s.r) / sup_e;
        dist = std::max(dist, std::abs(pu - pe));
    }
    return dist;
}

} // namespace

SweepResult concentration_sweep(int n, const Vec& eps_grid, const ShootOptions& opts) {
    const auto c = bubble::DimensionConstants::make(n);
    const double j = domain::bessel_j_zero(n / 2.0 - 1.0, 1);
    SweepResult out;
    out.lambda_rad = j * j;

    out.rows.resize(eps_grid.size());
    std::vector<int> failed(eps_grid.size(), 0);
    parallel_for(eps_grid.size(), [&](std::size_t i) {
        const double eps = eps_grid[i];
        SweepRow row;
        row.eps = eps;
        row.lambda = out.lambda_rad - eps;
        try {
            RadialProfile p = solve_radial(n, row.lambda, 1, opts);
            row.u0 = p.u0;
            row.max_pos = p.max_pos;
            row.max_neg_inf = p.max_neg;
            row.mu_est = std::pow(c.alpha_n / p.max_pos, 2.0 / (n - 2.0));
            row.nodes = static_cast<int>(p.node_radii.size());
            row.profile_dist = profile_distance(n, j, p);
        } catch (const error&) {
            failed[i] = 1;
        }
        out.rows[i] = row;
    });

    for (std::size_t i = 0; i < eps_grid.size(); ++i)
        if (failed[i]) {
            out.failure_index = static_cast<int>(i);
            out.rows.resize(i);
            break;
        }

    if (out.rows.size() >= 3) {
        Vec eps, neg, mu, sig;
        for (const auto& r : out.rows) {
            eps.push_back(r.eps);
            neg.push_back(r.max_neg_inf);
            mu.push_back(r.mu_est);
            sig.push_back(0.0);
        }
        const FitModel model = (n == 5) ? FitModel::power : FitModel::exponential;
        out.neg_fit = fit_loglog(eps, neg, sig, model);
        out.mu_fit = fit_loglog(eps, mu, sig, model);
    }
    return out;
}

} // namespace bnlab::radial
