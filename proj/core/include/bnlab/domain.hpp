#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "bnlab/bubble.hpp"
#include "bnlab/linalg.hpp"

namespace bnlab::domain {

using Point = std::span<const double>;

enum class Kind { hyperbox, unit_ball };

struct DomainSpec {
    Kind kind;
    int n;
    Vec sides; // hyperbox only

    static DomainSpec hyperbox(int n, Vec sides);
    static DomainSpec unit_ball(int n);
    void validate() const;
};

// Geometry plus Green machinery for one domain.  Immutable after
// construction; all evaluators are pure.
class Domain : public bubble::RegularPartProvider {
public:
    explicit Domain(DomainSpec spec, int image_radius = 12);

    const DomainSpec& spec() const { return spec_; }
    int dim() const { return spec_.n; }

    bool inside(Point x) const;
    double boundary_distance(Point x) const;
    double volume() const;
    double diameter() const;
    void sample_uniform(std::mt19937_64& rng, Vec& x) const;

    // G(x, xi) = gamma_n (|x-xi|^{2-n} - H(x, xi)); vanishes on the boundary.
    double green_function(Point x, Point xi) const;

    // Regular part H in the convention -Lap H = 0, H|_dOmega = |x-xi|^{2-n}.
    // Ball: closed Kelvin-image form, exact.  Hyperbox: alternating
    // reflection-image series with Richardson acceleration in the truncation
    // radius; accuracy <= 1e-6 absolute well inside the box.
    double regular_part(Point x, Point xi) const override;
    Vec regular_part_gradient_xi(Point x, Point xi) const override;

    // Truncation error estimate of the last box evaluation path at these
    // arguments (0 for the ball).
    double regular_part_error_bound(Point x, Point xi) const;

private:
    DomainSpec spec_;
    int image_radius_;

    double box_image_sum(Point x, Point xi, int m, Vec* grad) const;
    double box_regular_part(Point x, Point xi, Vec* grad) const;
};

// One member of an eigenspace: value, gradient and Hessian evaluators.
class Eigenfunction {
public:
    virtual ~Eigenfunction() = default;
    virtual double value(Point x) const = 0;
    virtual Vec gradient(Point x) const = 0;
    virtual Mat hessian(Point x) const = 0;
};

struct EigenBasis {
    int kappa = 0;
    double lambda = 0.0;
    int multiplicity = 0;
    std::vector<std::shared_ptr<const Eigenfunction>> functions; // L2-normalized
    Vec l2_norms_sq;                                             // kept explicit
    DomainSpec domain;
};

// kappa-th distinct Dirichlet eigenvalue (1-based).  Hyperbox: full sine
// lattice.  Ball: radial and degree-1 spherical-harmonic families only;
// a kappa whose eigenspace has angular degree >= 2 raises capability_error.
EigenBasis eigenbasis(const DomainSpec& spec, int kappa);

// Linear combination G = sum_l t_l e_l with derivatives.
class Combination {
public:
    Combination(const EigenBasis& basis, Vec coeffs);
    double value(Point x) const;
    Vec gradient(Point x) const;
    Mat hessian(Point x) const;
    const Vec& coeffs() const { return t_; }

private:
    const EigenBasis* basis_;
    Vec t_;
};

struct ConfigurationSet {
    double rho;
    std::vector<Vec> points;
};

// Both O_rho conditions: dist(xi_i, dOmega) >= 2 rho and |xi_i - xi_j| >= 2 rho.
bool admissible(const ConfigurationSet& config, const Domain& domain);

struct NodalReport {
    int count = 0;
    std::vector<Vec> representatives; // deepest-|g| cell center per component
    bool resolution_warning = false;
};

// Sign-samples g on a regular grid, unites same-sign face-adjacent cells.
NodalReport nodal_domains(const std::function<double(const Vec&)>& g, const Domain& domain,
                          int grid_resolution);

// k-th positive zero of J_nu (k >= 1).
double bessel_j_zero(double nu, int k);

// Distinct ball eigenvalues across all angular degrees, ascending; used to
// place the supported families inside the true ladder.
struct BallMode {
    double lambda;
    int angular_degree;
    int radial_index;
};
std::vector<BallMode> ball_eigenvalue_ladder(int n, int count);

} // namespace bnlab::domain
