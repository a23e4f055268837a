#pragma once

#include <cstdint>
#include <functional>

#include "bnlab/domain.hpp"
#include "bnlab/linalg.hpp"

namespace bnlab {

using FnND = std::function<double(const Vec&)>;

struct QuadratureResult {
    double value = 0.0;
    double stderr_est = 0.0; // 0 for deterministic rules
    std::size_t n_evals = 0;
};

enum class Scheme { tensor_gauss, stratified_mc };

struct QuadratureSpec {
    Scheme scheme = Scheme::tensor_gauss;
    // tensor-gauss
    int order = 16;         // per-axis (box) / radial (ball)
    int angular_order = 6;  // ball only
    Vec radial_breaks;      // ball only, e.g. bubble scales
    // stratified-mc
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::size_t samples = 20000;
    std::size_t max_samples = 4000000;
    double stderr_target = 0.0; // relative; 0 = no escalation
    std::vector<Vec> centers;   // declared concentration centers
    Vec scales;                 // per-center bubble scale mu_j
};

QuadratureResult integrate(const domain::Domain& dom, const FnND& f, const QuadratureSpec& spec);

QuadratureResult integrate_box_gauss(const domain::DomainSpec& spec, const FnND& f, int order);

QuadratureResult integrate_ball_gauss(const domain::DomainSpec& spec, const FnND& f,
                                      int radial_order, int angular_order,
                                      const Vec& radial_breaks = {});

struct McSettings {
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::size_t samples = 20000;
    std::size_t max_samples = 4000000;
    double stderr_target = 0.0;
    std::vector<Vec> centers;
    Vec scales;
};

QuadratureResult integrate_mc(const domain::Domain& dom, const FnND& f, const McSettings& s);

// Quadrature points on the unit sphere S^{n-1} (weights sum to its area).
struct SphereRule {
    std::vector<Vec> points;
    Vec weights;
};
SphereRule sphere_rule(int n, int order);

} // namespace bnlab
