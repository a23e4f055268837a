#include "bnlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "bnlab/errors.hpp"
#include "bnlab/quad1d.hpp"

namespace bnlab::domain {

// ---------------------------------------------------------------------------
// DomainSpec / Domain geometry
// ---------------------------------------------------------------------------

DomainSpec DomainSpec::hyperbox(int n, Vec sides) {
    DomainSpec s{Kind::hyperbox, n, std::move(sides)};
    s.validate();
    return s;
}

DomainSpec DomainSpec::unit_ball(int n) {
    DomainSpec s{Kind::unit_ball, n, {}};
    s.validate();
    return s;
}

void DomainSpec::validate() const {
    if (n != 4 && n != 5) throw config_error("DomainSpec: n must be 4 or 5");
    if (kind == Kind::hyperbox) {
        if (sides.size() != static_cast<std::size_t>(n))
            throw config_error("DomainSpec: hyperbox needs n side lengths");
        for (double s : sides)
            if (!(s > 0.0)) throw config_error("DomainSpec: side lengths must be positive");
    }
}

Domain::Domain(DomainSpec spec, int image_radius) : spec_(std::move(spec)), image_radius_(image_radius) {
    spec_.validate();
    if (image_radius_ < 2) throw config_error("Domain: image radius must be >= 2");
}

bool Domain::inside(Point x) const {
    if (spec_.kind == Kind::hyperbox) {
        for (int i = 0; i < spec_.n; ++i)
            if (x[i] <= 0.0 || x[i] >= spec_.sides[i]) return false;
        return true;
    }
    double r2 = 0.0;
    for (int i = 0; i < spec_.n; ++i) r2 += x[i] * x[i];
    return r2 < 1.0;
}

double Domain::boundary_distance(Point x) const {
    if (spec_.kind == Kind::hyperbox) {
        double d = std::numeric_limits<double>::max();
        for (int i = 0; i < spec_.n; ++i)
            d = std::min({d, x[i], spec_.sides[i] - x[i]});
        return d;
    }
    double r2 = 0.0;
    for (int i = 0; i < spec_.n; ++i) r2 += x[i] * x[i];
    return 1.0 - std::sqrt(r2);
}

double Domain::volume() const {
    if (spec_.kind == Kind::hyperbox)
        return std::accumulate(spec_.sides.begin(), spec_.sides.end(), 1.0,
                               std::multiplies<double>());
    const auto c = bubble::DimensionConstants::make(spec_.n);
    return c.omega_n / spec_.n;
}

double Domain::diameter() const {
    if (spec_.kind == Kind::unit_ball) return 2.0;
    double s = 0.0;
    for (double side : spec_.sides) s += side * side;
    return std::sqrt(s);
}

void Domain::sample_uniform(std::mt19937_64& rng, Vec& x) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    x.resize(spec_.n);
    if (spec_.kind == Kind::hyperbox) {
        for (int i = 0; i < spec_.n; ++i) x[i] = spec_.sides[i] * unif(rng);
        return;
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    double nrm = 0.0;
    for (int i = 0; i < spec_.n; ++i) {
        x[i] = gauss(rng);
        nrm += x[i] * x[i];
    }
    nrm = std::sqrt(nrm);
    const double r = std::pow(unif(rng), 1.0 / spec_.n);
    for (int i = 0; i < spec_.n; ++i) x[i] = r * x[i] / nrm;
}

// ---------------------------------------------------------------------------
// Green function and regular part
// ---------------------------------------------------------------------------

namespace {

double dist(Point x, Point y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

double Domain::regular_part(Point x, Point xi) const {
    const int n = spec_.n;
    if (spec_.kind == Kind::unit_ball) {
        // Kelvin image: H = (|xi| |x - xi/|xi|^2|)^{2-n} = q^{(2-n)/2} with
        // q = |x|^2 |xi|^2 - 2 x.xi + 1.
        double xx = 0.0, xxi = 0.0, xixi = 0.0;
        for (int i = 0; i < n; ++i) {
            xx += x[i] * x[i];
            xxi += x[i] * xi[i];
            xixi += xi[i] * xi[i];
        }
        const double q = xx * xixi - 2.0 * xxi + 1.0;
        return std::pow(q, (2.0 - n) / 2.0);
    }
    return box_regular_part(x, xi, nullptr);
}

Vec Domain::regular_part_gradient_xi(Point x, Point xi) const {
    const int n = spec_.n;
    Vec g(n, 0.0);
    if (spec_.kind == Kind::unit_ball) {
        double xx = 0.0, xxi = 0.0, xixi = 0.0;
        for (int i = 0; i < n; ++i) {
            xx += x[i] * x[i];
            xxi += x[i] * xi[i];
            xixi += xi[i] * xi[i];
        }
        const double q = xx * xixi - 2.0 * xxi + 1.0;
        const double factor = (2.0 - n) / 2.0 * std::pow(q, -n / 2.0);
        for (int i = 0; i < n; ++i) g[i] = factor * (2.0 * xx * xi[i] - 2.0 * x[i]);
        return g;
    }
    box_regular_part(x, xi, &g);
    return g;
}

double Domain::regular_part_error_bound(Point x, Point xi) const {
    if (spec_.kind == Kind::unit_ball) return 0.0;
    // Alternating grouped series decays like M^{2-n} per shell after full
    // sign alternation; Richardson removes the leading term, leaving the
    // next order down.
    const double m = static_cast<double>(image_radius_);
    double min_side = *std::min_element(spec_.sides.begin(), spec_.sides.end());
    return std::pow(2.0 * m * min_side, 2.0 - spec_.n) * 4.0;
}

// Alternating-reflection image sum truncated at lattice radius m.  grad, when
// non-null, accumulates d/dxi of the same truncation.
double Domain::box_image_sum(Point x, Point xi, int m, Vec* grad) const {
    const int n = spec_.n;
    const double expo = 2.0 - n;
    double h = 0.0;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);

    // Iterate lattice n-tuples in [-m, m]^n and sign choices; the identity
    // image (k = 0, sigma = +1) is the singular part, excluded from H.
    std::vector<int> k(n, -m);
    Vec img(n);
    while (true) {
        for (int sigma_mask = 0; sigma_mask < (1 << n); ++sigma_mask) {
            bool identity = true;
            double parity = 1.0;
            for (int i = 0; i < n; ++i) {
                const bool flip = (sigma_mask >> i) & 1;
                if (flip) parity = -parity;
                if (flip || k[i] != 0) identity = false;
            }
            if (identity) continue;
            double r2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double s = ((sigma_mask >> i) & 1) ? -1.0 : 1.0;
                img[i] = 2.0 * k[i] * spec_.sides[i] + s * xi[i];
                const double d = x[i] - img[i];
                r2 += d * d;
            }
            const double r = std::sqrt(r2);
            // H carries -parity: G = gamma (|x-xi|^{2-n} - H) must equal the
            // full signed image sum.
            h -= parity * std::pow(r, expo);
            if (grad) {
                const double f = -parity * expo * std::pow(r, expo - 2.0);
                for (int i = 0; i < n; ++i) {
                    const double s = ((sigma_mask >> i) & 1) ? -1.0 : 1.0;
                    // d/dxi_i of |x - img|: img depends on xi_i with factor s.
                    (*grad)[i] += f * (x[i] - img[i]) * (-s);
                }
            }
        }
        int axis = 0;
        while (axis < n && k[axis] == m) {
            k[axis] = -m;
            ++axis;
        }
        if (axis == n) break;
        ++k[axis];
    }
    return h;
}

double Domain::box_regular_part(Point x, Point xi, Vec* grad) const {
    const int n = spec_.n;
    const int m2 = image_radius_;
    const int m1 = std::max(2, m2 / 2);
    Vec g1(grad ? n : 0), g2(grad ? n : 0);
    const double s1 = box_image_sum(x, xi, m1, grad ? &g1 : nullptr);
    const double s2 = box_image_sum(x, xi, m2, grad ? &g2 : nullptr);
    // Tail of the grouped series ~ C M^{2-n}; eliminate it from the pair.
    const double p = static_cast<double>(n - 2);
    const double w2 = std::pow(static_cast<double>(m2), p);
    const double w1 = std::pow(static_cast<double>(m1), p);
    const double value = (w2 * s2 - w1 * s1) / (w2 - w1);
    if (grad)
        for (int i = 0; i < n; ++i) (*grad)[i] = (w2 * g2[i] - w1 * g1[i]) / (w2 - w1);
    return value;
}

double Domain::green_function(Point x, Point xi) const {
    const int n = spec_.n;
    const double r = dist(x, xi);
    if (r == 0.0) throw singularity_error("green_function: x == xi");
    const auto c = bubble::DimensionConstants::make(n);
    return c.gamma_n * (std::pow(r, 2.0 - n) - regular_part(x, xi));
}

// ---------------------------------------------------------------------------
// Bessel zeros
// ---------------------------------------------------------------------------

namespace {

double bessel_j(double nu, double x) { return std::cyl_bessel_j(nu, x); }

double bessel_j_prime(double nu, double x) {
    return bessel_j(nu - 1.0, x) - (nu / x) * bessel_j(nu, x);
}

} // namespace

double bessel_j_zero(double nu, int k) {
    if (k < 1) throw argument_error("bessel_j_zero: k >= 1");
    // McMahon asymptotic start, then march zero by zero with Newton.
    double zero = 0.0;
    for (int i = 1; i <= k; ++i) {
        double guess;
        if (i == 1) {
            // first zero: uniform asymptotic in nu
            guess = nu + 1.8557571 * std::cbrt(std::max(nu, 0.5)) + 1.0;
        } else {
            guess = zero + M_PI; // consecutive zeros separated by ~pi
        }
        double x = guess;
        for (int it = 0; it < 100; ++it) {
            const double f = bessel_j(nu, x);
            const double fp = bessel_j_prime(nu, x);
            double step = f / fp;
            if (std::abs(step) > 1.0) step = std::copysign(1.0, step);
            x -= step;
            if (std::abs(step) < 1e-14 * std::max(1.0, x)) break;
        }
        // Guard against Newton jumping over to a neighbouring zero.
        if (i > 1 && x < zero + 1.0) x = zero + M_PI;
        zero = x;
    }
    return zero;
}

std::vector<BallMode> ball_eigenvalue_ladder(int n, int count) {
    const double nu0 = n / 2.0 - 1.0;
    std::vector<BallMode> modes;
    // Collect enough (degree, radial) pairs: first zeros grow with the degree,
    // so degrees beyond `count` cannot enter the first `count` slots.
    for (int ell = 0; ell <= count + 2; ++ell) {
        for (int k = 1; k <= count + 2; ++k) {
            const double z = bessel_j_zero(nu0 + ell, k);
            modes.push_back({z * z, ell, k});
        }
    }
    std::sort(modes.begin(), modes.end(),
              [](const BallMode& a, const BallMode& b) { return a.lambda < b.lambda; });
    modes.resize(static_cast<std::size_t>(count));
    return modes;
}

// ---------------------------------------------------------------------------
// Eigenfunctions
// ---------------------------------------------------------------------------

namespace {

class BoxEigenfunction : public Eigenfunction {
public:
    BoxEigenfunction(std::vector<int> freq, Vec sides) : freq_(std::move(freq)), sides_(std::move(sides)) {
        const int n = static_cast<int>(freq_.size());
        norm_ = 1.0;
        for (int i = 0; i < n; ++i) norm_ *= std::sqrt(2.0 / sides_[i]);
        om_.resize(n);
        for (int i = 0; i < n; ++i) om_[i] = freq_[i] * M_PI / sides_[i];
    }

    double value(Point x) const override {
        double v = norm_;
        for (std::size_t i = 0; i < freq_.size(); ++i) v *= std::sin(om_[i] * x[i]);
        return v;
    }

    Vec gradient(Point x) const override {
        const std::size_t n = freq_.size();
        Vec s(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::sin(om_[i] * x[i]);
            c[i] = std::cos(om_[i] * x[i]);
        }
        Vec g(n, norm_);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g[i] *= (i == j) ? om_[j] * c[j] : s[j];
        return g;
    }

    Mat hessian(Point x) const override {
        const std::size_t n = freq_.size();
        Vec s(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::sin(om_[i] * x[i]);
            c[i] = std::cos(om_[i] * x[i]);
        }
        Mat h(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double v = norm_;
                for (std::size_t d = 0; d < n; ++d) {
                    if (d == i && d == j)
                        v *= -om_[d] * om_[d] * s[d];
                    else if (d == i || d == j)
                        v *= om_[d] * c[d];
                    else
                        v *= s[d];
                }
                h(i, j) = v;
                h(j, i) = v;
            }
        }
        return h;
    }

private:
    std::vector<int> freq_;
    Vec sides_;
    Vec om_;
    double norm_;
};

// phi_nu(r) = r^{-nu} J_nu(j r): smooth at 0, d/dr phi = -j r^{-nu} J_{nu+1}(j r).
struct RadialProfileEval {
    double nu;
    double j;

    double phi(double r) const {
        if (r < 1e-8) {
            // series: (j/2)^nu / Gamma(nu+1) [1 - (jr)^2/(4(nu+1)) + ...]
            const double z2 = j * r * j * r;
            const double lead = std::pow(j / 2.0, nu) / std::tgamma(nu + 1.0);
            return lead * (1.0 - z2 / (4.0 * (nu + 1.0)) + z2 * z2 / (32.0 * (nu + 1.0) * (nu + 2.0)));
        }
        return std::pow(r, -nu) * bessel_j(nu, j * r);
    }
    double dphi(double r) const {
        if (r < 1e-8) {
            const double lead = std::pow(j / 2.0, nu) / std::tgamma(nu + 1.0);
            const double c1 = -j * j / (2.0 * (nu + 1.0));
            const double c2 = j * j * j * j / (8.0 * (nu + 1.0) * (nu + 2.0));
            return lead * (c1 * r + c2 * r * r * r);
        }
        return -j * std::pow(r, -nu) * bessel_j(nu + 1.0, j * r);
    }
    // From the radial ODE: phi'' = -j^2 phi - (2 nu + 1)/r phi'.
    double d2phi(double r) const {
        if (r < 1e-8) {
            const double lead = std::pow(j / 2.0, nu) / std::tgamma(nu + 1.0);
            return lead * (-j * j / (2.0 * (nu + 1.0)) +
                           3.0 * j * j * j * j * r * r / (8.0 * (nu + 1.0) * (nu + 2.0)));
        }
        return -j * j * phi(r) - (2.0 * nu + 1.0) / r * dphi(r);
    }
};

class BallRadialEigenfunction : public Eigenfunction {
public:
    BallRadialEigenfunction(int n, double j, double scale) : n_(n), prof_{n / 2.0 - 1.0, j}, scale_(scale) {}

    double value(Point x) const override {
        return scale_ * prof_.phi(norm_of(x));
    }
    Vec gradient(Point x) const override {
        const double r = norm_of(x);
        Vec g(n_, 0.0);
        if (r < 1e-14) return g; // dphi(0) = 0
        const double d = scale_ * prof_.dphi(r);
        for (int i = 0; i < n_; ++i) g[i] = d * x[i] / r;
        return g;
    }
    Mat hessian(Point x) const override {
        const double r = norm_of(x);
        Mat h(n_, n_);
        if (r < 1e-10) {
            // isotropic second derivative at the center: phi''(0) I
            const double d2 = scale_ * prof_.d2phi(0.0);
            for (int i = 0; i < n_; ++i) h(i, i) = d2;
            return h;
        }
        const double d1 = scale_ * prof_.dphi(r);
        const double d2 = scale_ * prof_.d2phi(r);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                const double pij = x[i] * x[j] / (r * r);
                h(i, j) = d2 * pij + d1 * ((i == j ? 1.0 : 0.0) - pij) / r;
            }
        return h;
    }

private:
    static double norm_of(Point x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    }
    int n_;
    RadialProfileEval prof_;
    double scale_;
};

// Degree-1 mode: e(x) = scale * x_h phi(r) with phi = r^{-n/2} J_{n/2}(j r).
class BallHarmonicEigenfunction : public Eigenfunction {
public:
    BallHarmonicEigenfunction(int n, int axis, double j, double scale)
        : n_(n), axis_(axis), prof_{n / 2.0, j}, scale_(scale) {}

    double value(Point x) const override { return scale_ * x[axis_] * prof_.phi(norm_of(x)); }

    Vec gradient(Point x) const override {
        const double r = norm_of(x);
        Vec g(n_, 0.0);
        const double p = prof_.phi(r);
        g[axis_] = scale_ * p;
        if (r > 1e-14) {
            const double dp = prof_.dphi(r);
            for (int i = 0; i < n_; ++i) g[i] += scale_ * x[axis_] * dp * x[i] / r;
        }
        return g;
    }

    Mat hessian(Point x) const override {
        const double r = norm_of(x);
        Mat h(n_, n_);
        const double dp = (r > 1e-14) ? prof_.dphi(r) : 0.0;
        const double d2p = prof_.d2phi(r);
        if (r < 1e-10) {
            // x_h phi: Hessian at 0 is phi'(0)(delta_ih e_j + delta_jh e_i) = 0
            return h;
        }
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                const double pij = x[i] * x[j] / (r * r);
                double v = 0.0;
                v += (i == axis_ ? 1.0 : 0.0) * dp * x[j] / r;
                v += (j == axis_ ? 1.0 : 0.0) * dp * x[i] / r;
                v += x[axis_] * (d2p * pij + dp * ((i == j ? 1.0 : 0.0) - pij) / r);
                h(i, j) = scale_ * v;
            }
        }
        return h;
    }

private:
    static double norm_of(Point x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    }
    int n_;
    int axis_;
    RadialProfileEval prof_;
    double scale_;
};

// L2 norm over the unit ball of a function x -> f(|x|) * (angular factor).
double ball_radial_l2(int n, const std::function<double(double)>& f_sq_times_rpow) {
    return adaptive_quad([&](double r) { return f_sq_times_rpow(r); }, 0.0, 1.0, 1e-13);
}

EigenBasis box_eigenbasis(const DomainSpec& spec, int kappa) {
    const int n = spec.n;
    // Enumerate lattice frequencies up to a cap large enough for the kappa-th
    // distinct eigenvalue; grow the cap if needed.
    int cap = 6;
    while (true) {
        std::map<double, std::vector<std::vector<int>>> levels;
        std::vector<int> f(n, 1);
        while (true) {
            double lambda = 0.0;
            for (int i = 0; i < n; ++i) {
                const double w = f[i] * M_PI / spec.sides[i];
                lambda += w * w;
            }
            // exact rational eigenvalues collide only when they truly
            // coincide; quantize to 12 digits to merge equal levels
            const double key = std::round(lambda * 1e9) / 1e9;
            levels[key].push_back(f);
            int axis = 0;
            while (axis < n && f[axis] == cap) {
                f[axis] = 1;
                ++axis;
            }
            if (axis == n) break;
            ++f[axis];
        }
        if (static_cast<int>(levels.size()) >= kappa + 1) {
            auto it = levels.begin();
            std::advance(it, kappa - 1);
            // Guard: the kappa-th level must be complete within the cap, i.e.
            // its eigenvalue below what a frequency of cap+1 on one axis with
            // all others 1 can reach.
            double min_side = *std::min_element(spec.sides.begin(), spec.sides.end());
            double guard = std::pow((cap + 1) * M_PI / min_side, 2.0);
            if (it->first < guard) {
                EigenBasis basis;
                basis.kappa = kappa;
                basis.lambda = it->first;
                basis.domain = spec;
                auto freqs = it->second;
                std::sort(freqs.begin(), freqs.end());
                basis.multiplicity = static_cast<int>(freqs.size());
                for (const auto& fr : freqs) {
                    basis.functions.push_back(std::make_shared<BoxEigenfunction>(fr, spec.sides));
                    basis.l2_norms_sq.push_back(1.0);
                }
                return basis;
            }
        }
        cap += 4;
        if (cap > 64) throw capability_error("box eigenbasis: kappa too large");
    }
}

EigenBasis ball_eigenbasis(const DomainSpec& spec, int kappa) {
    const int n = spec.n;
    auto ladder = ball_eigenvalue_ladder(n, kappa + 1);
    if (kappa > static_cast<int>(ladder.size()))
        throw capability_error("ball eigenbasis: kappa beyond computed ladder");
    const BallMode mode = ladder[kappa - 1];
    if (mode.angular_degree > 1) {
        throw capability_error(
            "ball eigenbasis: kappa = " + std::to_string(kappa) + " has angular degree " +
            std::to_string(mode.angular_degree) +
            "; only radial (degree 0) and degree-1 eigenspaces are implemented");
    }
    const double j = std::sqrt(mode.lambda);
    EigenBasis basis;
    basis.kappa = kappa;
    basis.lambda = mode.lambda;
    basis.domain = spec;
    const auto c = bubble::DimensionConstants::make(n);

    if (mode.angular_degree == 0) {
        RadialProfileEval prof{n / 2.0 - 1.0, j};
        const double mass = c.omega_n * ball_radial_l2(n, [&](double r) {
            const double v = prof.phi(r);
            return v * v * std::pow(r, n - 1);
        });
        const double scale = 1.0 / std::sqrt(mass);
        basis.multiplicity = 1;
        basis.functions.push_back(std::make_shared<BallRadialEigenfunction>(n, j, scale));
        basis.l2_norms_sq.push_back(1.0);
        return basis;
    }
    // degree-1: functions x_h phi(r), h = 1..n; int x_h^2 F(r) = omega_n/n int r^{n+1} F
    RadialProfileEval prof{n / 2.0, j};
    const double mass = (c.omega_n / n) * ball_radial_l2(n, [&](double r) {
        const double v = prof.phi(r);
        return v * v * std::pow(r, n + 1);
    });
    const double scale = 1.0 / std::sqrt(mass);
    basis.multiplicity = n;
    for (int h = 0; h < n; ++h) {
        basis.functions.push_back(std::make_shared<BallHarmonicEigenfunction>(n, h, j, scale));
        basis.l2_norms_sq.push_back(1.0);
    }
    return basis;
}

} // namespace

EigenBasis eigenbasis(const DomainSpec& spec, int kappa) {
    spec.validate();
    if (kappa < 1) throw argument_error("eigenbasis: kappa >= 1");
    if (spec.kind == Kind::hyperbox) return box_eigenbasis(spec, kappa);
    return ball_eigenbasis(spec, kappa);
}

// ---------------------------------------------------------------------------
// Combination
// ---------------------------------------------------------------------------

Combination::Combination(const EigenBasis& basis, Vec coeffs) : basis_(&basis), t_(std::move(coeffs)) {
    if (t_.size() != basis_->functions.size())
        throw argument_error("Combination: coefficient count != multiplicity");
}

double Combination::value(Point x) const {
    double v = 0.0;
    for (std::size_t l = 0; l < t_.size(); ++l) v += t_[l] * basis_->functions[l]->value(x);
    return v;
}

Vec Combination::gradient(Point x) const {
    Vec g(x.size(), 0.0);
    for (std::size_t l = 0; l < t_.size(); ++l) {
        Vec gl = basis_->functions[l]->gradient(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += t_[l] * gl[i];
    }
    return g;
}

Mat Combination::hessian(Point x) const {
    Mat h(x.size(), x.size());
    for (std::size_t l = 0; l < t_.size(); ++l) {
        Mat hl = basis_->functions[l]->hessian(x);
        for (std::size_t i = 0; i < h.rows(); ++i)
            for (std::size_t j = 0; j < h.cols(); ++j) h(i, j) += t_[l] * hl(i, j);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Admissibility and nodal domains
// ---------------------------------------------------------------------------

bool admissible(const ConfigurationSet& config, const Domain& domain) {
    const double two_rho = 2.0 * config.rho;
    for (const auto& p : config.points)
        if (domain.boundary_distance(p) < two_rho) return false;
    for (std::size_t i = 0; i < config.points.size(); ++i)
        for (std::size_t j = i + 1; j < config.points.size(); ++j)
            if (dist(config.points[i], config.points[j]) < two_rho) return false;
    return true;
}

NodalReport nodal_domains(const std::function<double(const Vec&)>& g, const Domain& domain,
                          int res) {
    if (res < 8) throw argument_error("nodal_domains: resolution >= 8 per axis");
    const int n = domain.dim();
    Vec lo(n, 0.0), hi(n, 0.0);
    if (domain.spec().kind == Kind::hyperbox) {
        hi = domain.spec().sides;
    } else {
        std::fill(lo.begin(), lo.end(), -1.0);
        std::fill(hi.begin(), hi.end(), 1.0);
    }

    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(res);

    std::vector<signed char> sign(total, 0); // 0: outside/zero
    std::vector<double> val(total, 0.0);

    Vec x(n);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int d = 0; d < n; ++d) {
            const std::size_t i = rem % res;
            rem /= res;
            x[d] = lo[d] + (hi[d] - lo[d]) * (static_cast<double>(i) + 0.5) / res;
        }
        if (!domain.inside(x)) continue;
        const double v = g(x);
        val[idx] = v;
        sign[idx] = (v > 0.0) ? 1 : (v < 0.0 ? -1 : 0);
    }

    // Union-find over face-adjacent same-sign cells.
    std::vector<std::size_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b] = a;
    };

    std::size_t stride = 1;
    for (int d = 0; d < n; ++d) {
        for (std::size_t idx = 0; idx < total; ++idx) {
            if (sign[idx] == 0) continue;
            const std::size_t coord = (idx / stride) % res;
            if (coord + 1 < static_cast<std::size_t>(res)) {
                const std::size_t nb = idx + stride;
                if (sign[nb] == sign[idx]) unite(idx, nb);
            }
        }
        stride *= res;
    }

    std::map<std::size_t, std::size_t> deepest; // root -> cell index of max |g|
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (sign[idx] == 0) continue;
        const std::size_t root = find(idx);
        auto it = deepest.find(root);
        if (it == deepest.end() || std::abs(val[idx]) > std::abs(val[it->second]))
            deepest[root] = idx;
    }

    NodalReport report;
    report.count = static_cast<int>(deepest.size());
    double gmax = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) gmax = std::max(gmax, std::abs(val[idx]));
    for (const auto& [root, idx] : deepest) {
        std::size_t rem = idx;
        Vec cx(n);
        for (int d = 0; d < n; ++d) {
            const std::size_t i = rem % res;
            rem /= res;
            cx[d] = lo[d] + (hi[d] - lo[d]) * (static_cast<double>(i) + 0.5) / res;
        }
        report.representatives.push_back(cx);
        if (std::abs(val[idx]) < 1e-12 * gmax) report.resolution_warning = true;
    }
    // Deterministic order: sort representatives lexicographically.
    std::sort(report.representatives.begin(), report.representatives.end());
    return report;
}

} // namespace bnlab::domain
