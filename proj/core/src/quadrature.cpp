#include "bnlab/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/errors.hpp"
#include "bnlab/parallel.hpp"
#include "bnlab/quad1d.hpp"
#include "bnlab/rng.hpp"

namespace bnlab {

namespace {
int g_workers = 0;
}

int worker_count() { return g_workers; }
void set_worker_count(int n) { g_workers = n; }

// ---------------------------------------------------------------------------
// 1D rules
// ---------------------------------------------------------------------------

namespace {

// K15 nodes/weights (positive half; symmetric), G7 weights embedded.
const double kron_x[8] = {0.0,
                          0.207784955007898467600689403773245,
                          0.405845151377397166906606412076961,
                          0.586087235467691130294144838258730,
                          0.741531185599394439863864773280788,
                          0.864864423359769072789712788640926,
                          0.949107912342758524526189684047851,
                          0.991455371120812639206854697526329};
const double kron_w[8] = {0.209482141084727828012999174891714,
                          0.204432940075298892414161999234649,
                          0.190350578064785409913256402421014,
                          0.169004726639267902826583426598550,
                          0.140653259715525918745189590510238,
                          0.104790010322250183839876322541518,
                          0.063092092629978553290700663189204,
                          0.022935322010529224963732008058970};
const double gauss_w[4] = {0.417959183673469387755102040816327,
                           0.381830050505118944950369775488975,
                           0.279705391489276667901467771423780,
                           0.129484966168869693270611432679082};

struct PanelEst {
    double value;
    double error;
};

PanelEst gk15(const Fn1D& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double kres = kron_w[0] * fc;
    double gres = gauss_w[0] * fc;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kron_x[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kres += kron_w[i] * (f1 + f2);
        if (i % 2 == 0) gres += gauss_w[i / 2] * (f1 + f2);
    }
    PanelEst e;
    e.value = kres * h;
    const double diff = std::abs(kres - gres) * std::abs(h);
    e.error = diff;
    return e;
}

double adaptive_rec(const Fn1D& f, double a, double b, double tol, int depth, int max_depth,
                    const PanelEst& whole) {
    if (whole.error <= tol || depth >= max_depth) {
        if (depth >= max_depth && whole.error > 64.0 * tol + 1e-300)
            throw numerical_error("adaptive_quad: refinement limit hit, error " +
                                  std::to_string(whole.error));
        return whole.value;
    }
    const double c = 0.5 * (a + b);
    PanelEst left = gk15(f, a, c);
    PanelEst right = gk15(f, c, b);
    return adaptive_rec(f, a, c, 0.5 * tol, depth + 1, max_depth, left) +
           adaptive_rec(f, c, b, 0.5 * tol, depth + 1, max_depth, right);
}

} // namespace

double adaptive_quad(const Fn1D& f, double a, double b, double rel_tol, double abs_tol,
                     int max_depth) {
    if (a == b) return 0.0;
    PanelEst whole = gk15(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::abs(whole.value));
    const double floor = std::max(tol, 1e-305);
    return adaptive_rec(f, a, b, floor, 0, max_depth, whole);
}

double adaptive_quad_split(const Fn1D& f, double a, double b, const Vec& breakpoints,
                           double rel_tol, double abs_tol) {
    Vec pts;
    pts.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    // First pass per panel to size the absolute tolerance budget.
    double rough = 0.0;
    std::vector<PanelEst> est(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        est[i] = gk15(f, pts[i], pts[i + 1]);
        rough += std::abs(est[i].value);
    }
    const double tol = std::max(abs_tol, rel_tol * rough);
    const double per = std::max(tol / static_cast<double>(est.size()), 1e-305);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += adaptive_rec(f, pts[i], pts[i + 1], per, 0, 48, est[i]);
    return total;
}

Vec bubble_breakpoints(double mu, double b) {
    Vec pts;
    if (!(mu > 0.0) || mu >= b) return pts;
    double r = mu / 8.0;
    while (r < b) {
        pts.push_back(r);
        r *= 10.0;
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Golub-Welsch rules
// ---------------------------------------------------------------------------

namespace {

Rule1D golub_welsch(int n, const Vec& alpha, const Vec& beta, double mu0) {
    Mat j(n, n);
    for (int i = 0; i < n; ++i) {
        j(i, i) = alpha[i];
        if (i + 1 < n) {
            const double off = std::sqrt(beta[i + 1]);
            j(i, i + 1) = off;
            j(i + 1, i) = off;
        }
    }
    SymEig eig = sym_eig(j, true);
    Rule1D rule;
    rule.nodes = eig.values;
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = eig.vectors(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

} // namespace

Rule1D gauss_legendre(int n) {
    Vec alpha(n, 0.0), beta(n, 0.0);
    for (int k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        beta[k] = kk * kk / ((2 * kk - 1) * (2 * kk + 1));
    }
    return golub_welsch(n, alpha, beta, 2.0);
}

Rule1D gauss_jacobi(int n, double a, double b) {
    Vec alpha(n, 0.0), beta(n, 0.0);
    const double apb = a + b;
    alpha[0] = (b - a) / (apb + 2.0);
    for (int k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double den = (2 * kk + apb) * (2 * kk + apb + 2.0);
        alpha[k] = (b * b - a * a) / den;
        beta[k] = 4.0 * kk * (kk + a) * (kk + b) * (kk + apb) /
                  ((2 * kk + apb - 1.0) * (2 * kk + apb) * (2 * kk + apb) * (2 * kk + apb + 1.0));
    }
    // mu0 = 2^{a+b+1} B(a+1, b+1)
    const double mu0 = std::pow(2.0, apb + 1.0) *
                       std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(apb + 2.0));
    return golub_welsch(n, alpha, beta, mu0);
}

Rule1D gauss_legendre_on(int n, double a, double b) {
    Rule1D raw = gauss_legendre(n);
    Rule1D out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = mid + half * raw.nodes[i];
        out.weights[i] = half * raw.weights[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Domain quadrature
// ---------------------------------------------------------------------------

QuadratureResult integrate_box_gauss(const domain::DomainSpec& spec, const FnND& f, int order) {
    if (spec.kind != domain::Kind::hyperbox)
        throw argument_error("integrate_box_gauss: hyperbox only");
    const int n = spec.n;
    Rule1D axis = gauss_legendre(order);
    std::vector<Rule1D> per_axis(n);
    for (int d = 0; d < n; ++d) per_axis[d] = gauss_legendre_on(order, 0.0, spec.sides[d]);

    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(order);

    // Chunked accumulation keeps the reduction order fixed.
    const std::size_t chunk = 16384;
    const std::size_t n_chunks = (total + chunk - 1) / chunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for(n_chunks, [&](std::size_t ci) {
        const std::size_t lo = ci * chunk;
        const std::size_t hi = std::min(total, lo + chunk);
        Vec x(n);
        double acc = 0.0;
        for (std::size_t idx = lo; idx < hi; ++idx) {
            std::size_t rem = idx;
            double w = 1.0;
            for (int d = 0; d < n; ++d) {
                const std::size_t i = rem % order;
                rem /= order;
                x[d] = per_axis[d].nodes[i];
                w *= per_axis[d].weights[i];
            }
            acc += w * f(x);
        }
        partial[ci] = acc;
    });
    QuadratureResult r;
    r.value = 0.0;
    for (double p : partial) r.value += p;
    r.stderr_est = 0.0;
    r.n_evals = total;
    return r;
}

SphereRule sphere_rule(int n, int order) {
    // Product rule in spherical angles: theta_i in [0,pi] with weight
    // sin^{n-2-i}(theta_i) for i=0..n-3, azimuth uniform.  Gauss-Jacobi in
    // cos(theta) integrates the sin powers exactly.
    SphereRule rule;
    if (n < 2) throw argument_error("sphere_rule: n >= 2");
    std::vector<Rule1D> polar(n - 2);
    for (int i = 0; i < n - 2; ++i) {
        const double p = static_cast<double>(n - 2 - i);
        // weight (1-t^2)^{(p-1)/2} = (1-t)^a (1+t)^a with a=(p-1)/2
        polar[i] = gauss_jacobi(order, (p - 1.0) / 2.0, (p - 1.0) / 2.0);
    }
    const int n_phi = std::max(4, 2 * order);
    std::vector<std::size_t> radix;
    for (int i = 0; i < n - 2; ++i) radix.push_back(polar[i].nodes.size());
    radix.push_back(static_cast<std::size_t>(n_phi));
    std::size_t total = 1;
    for (auto r : radix) total *= r;

    rule.points.reserve(total);
    rule.weights.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        Vec cosines(n - 2), sines(n - 2);
        double w = 1.0;
        for (int i = 0; i < n - 2; ++i) {
            const std::size_t ii = rem % radix[i];
            rem /= radix[i];
            cosines[i] = polar[i].nodes[ii];
            sines[i] = std::sqrt(std::max(0.0, 1.0 - cosines[i] * cosines[i]));
            w *= polar[i].weights[ii];
        }
        const std::size_t iphi = rem;
        const double phi = 2.0 * M_PI * (static_cast<double>(iphi) + 0.5) / n_phi;
        w *= 2.0 * M_PI / n_phi;

        Vec u(n);
        double s = 1.0;
        for (int i = 0; i < n - 2; ++i) {
            u[i] = s * cosines[i];
            s *= sines[i];
        }
        u[n - 2] = s * std::cos(phi);
        u[n - 1] = s * std::sin(phi);
        rule.points.push_back(std::move(u));
        rule.weights.push_back(w);
    }
    return rule;
}

QuadratureResult integrate_ball_gauss(const domain::DomainSpec& spec, const FnND& f,
                                      int radial_order, int angular_order, const Vec& radial_breaks) {
    if (spec.kind != domain::Kind::unit_ball)
        throw argument_error("integrate_ball_gauss: unit ball only");
    const int n = spec.n;
    SphereRule ang = sphere_rule(n, angular_order);

    // Radial panels: optional breakpoints (bubble scales), Gauss-Legendre each.
    Vec cuts;
    cuts.push_back(0.0);
    for (double b : radial_breaks)
        if (b > 0.0 && b < 1.0) cuts.push_back(b);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    Rule1D radial;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rule1D panel = gauss_legendre_on(radial_order, cuts[i], cuts[i + 1]);
        radial.nodes.insert(radial.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        radial.weights.insert(radial.weights.end(), panel.weights.begin(), panel.weights.end());
    }

    const std::size_t n_r = radial.nodes.size();
    std::vector<double> partial(n_r, 0.0);
    parallel_for(n_r, [&](std::size_t ir) {
        const double r = radial.nodes[ir];
        const double wr = radial.weights[ir] * std::pow(r, n - 1);
        double acc = 0.0;
        Vec x(n);
        for (std::size_t ia = 0; ia < ang.points.size(); ++ia) {
            for (int d = 0; d < n; ++d) x[d] = r * ang.points[ia][d];
            acc += ang.weights[ia] * f(x);
        }
        partial[ir] = wr * acc;
    });
    QuadratureResult res;
    res.value = 0.0;
    for (double p : partial) res.value += p;
    res.stderr_est = 0.0;
    res.n_evals = n_r * ang.points.size();
    return res;
}

// ---------------------------------------------------------------------------
// Stratified / importance Monte Carlo
// ---------------------------------------------------------------------------

namespace {

// Radial proposal concentrated at scale mu with heavy tail: r = mu sqrt(u/(1-u)),
// i.e. density p(r) = 2 mu^2 r / (mu^2+r^2)^2 on (0,inf).
double sample_bubble_radius(double mu, double u) { return mu * std::sqrt(u / (1.0 - u)); }

double bubble_radial_pdf(double mu, double r) {
    const double q = mu * mu + r * r;
    return 2.0 * mu * mu * r / (q * q);
}

} // namespace

QuadratureResult integrate_mc(const domain::Domain& dom, const FnND& f, const McSettings& s) {
    const int n = dom.spec().n;
    const double volume = dom.volume();
    const std::size_t n_centers = s.centers.size();

    // Mixture weights: uniform component plus two scales per center (core mu
    // and shoulder sqrt(mu)), matching where the integrands concentrate.
    struct Component {
        Vec center;
        double scale;
    };
    std::vector<Component> comps;
    for (std::size_t j = 0; j < n_centers; ++j) {
        const double mu = s.scales[j];
        comps.push_back({s.centers[j], mu});
        comps.push_back({s.centers[j], std::sqrt(mu)});
    }
    const double w_unif = comps.empty() ? 1.0 : 0.4;
    const double w_comp = comps.empty() ? 0.0 : 0.6 / static_cast<double>(comps.size());

    const double sphere_area = 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);

    auto density = [&](const Vec& x) {
        double q = w_unif / volume;
        for (const auto& c : comps) {
            double r2 = 0.0;
            for (int d = 0; d < n; ++d) {
                const double dx = x[d] - c.center[d];
                r2 += dx * dx;
            }
            const double r = std::sqrt(r2);
            if (r > 0.0)
                q += w_comp * bubble_radial_pdf(c.scale, r) / (sphere_area * std::pow(r, n - 1));
        }
        return q;
    };

    const std::size_t chunk = 4096;
    std::size_t total = s.samples;
    double mean = 0.0, stderr_est = 0.0;
    std::size_t used = 0;

    while (true) {
        const std::size_t n_chunks = (total + chunk - 1) / chunk;
        std::vector<double> sum1(n_chunks, 0.0), sum2(n_chunks, 0.0);
        parallel_for(n_chunks, [&](std::size_t ci) {
            auto rng = make_rng(s.seed, s.stream, ci);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const std::size_t lo = ci * chunk;
            const std::size_t hi = std::min(total, lo + chunk);
            Vec x(n);
            double a1 = 0.0, a2 = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                const double pick = unif(rng);
                if (pick < w_unif || comps.empty()) {
                    dom.sample_uniform(rng, x);
                } else {
                    const std::size_t which =
                        std::min(comps.size() - 1,
                                 static_cast<std::size_t>((pick - w_unif) / w_comp));
                    const auto& c = comps[which];
                    const double r = sample_bubble_radius(c.scale, unif(rng));
                    // uniform direction
                    double nrm = 0.0;
                    for (int d = 0; d < n; ++d) {
                        x[d] = gauss(rng);
                        nrm += x[d] * x[d];
                    }
                    nrm = std::sqrt(nrm);
                    for (int d = 0; d < n; ++d) x[d] = c.center[d] + r * x[d] / nrm;
                }
                if (!dom.inside(x)) continue; // integrand extended by zero
                const double val = f(x) / density(x);
                a1 += val;
                a2 += val * val;
            }
            sum1[ci] = a1;
            sum2[ci] = a2;
        });
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            s1 += sum1[c];
            s2 += sum2[c];
        }
        const double nn = static_cast<double>(total);
        mean = s1 / nn;
        const double var = std::max(0.0, s2 / nn - mean * mean);
        stderr_est = std::sqrt(var / nn);
        used = total;
        if (s.stderr_target <= 0.0) break;
        if (stderr_est <= s.stderr_target * std::abs(mean)) break;
        if (total >= s.max_samples) {
            throw numerical_error("integrate_mc: stderr " + std::to_string(stderr_est) +
                                  " above target at max samples " + std::to_string(total));
        }
        total = std::min(s.max_samples, total * 4);
    }

    QuadratureResult r;
    r.value = mean;
    r.stderr_est = stderr_est;
    r.n_evals = used;
    return r;
}

QuadratureResult integrate(const domain::Domain& dom, const FnND& f, const QuadratureSpec& spec) {
    if (spec.scheme == Scheme::tensor_gauss) {
        if (dom.spec().kind == domain::Kind::hyperbox)
            return integrate_box_gauss(dom.spec(), f, spec.order);
        return integrate_ball_gauss(dom.spec(), f, spec.order, spec.angular_order, spec.radial_breaks);
    }
    McSettings mc;
    mc.seed = spec.seed;
    mc.stream = spec.stream;
    mc.samples = spec.samples;
    mc.max_samples = spec.max_samples;
    mc.stderr_target = spec.stderr_target;
    mc.centers = spec.centers;
    mc.scales = spec.scales;
    return integrate_mc(dom, f, mc);
}

} // namespace bnlab
