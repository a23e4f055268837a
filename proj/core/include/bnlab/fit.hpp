#pragma once

#include <string>
#include <vector>

#include "bnlab/linalg.hpp"

namespace bnlab {

enum class FitModel { power, exponential };

// Weighted least-squares line through transformed data:
//   power:        log y = slope * log x + intercept
//   exponential:  log y = -coeff / x + intercept   (coeff reported positive
//                 for decaying data, e.g. y = e^{-A/x} -> coeff = A)
struct FitResult {
    FitModel model = FitModel::power;
    double slope = 0.0;      // power-law exponent, or -coeff for exponential
    double coefficient = 0.0; // exponential A; equals -slope of the 1/x fit
    double intercept = 0.0;
    double slope_ci = 0.0;   // 95% half-width
    double intercept_ci = 0.0;
    bool monotonic_warning = false;
    std::string warning;
};

// x strictly positive, y strictly positive; sigma: absolute 1-sigma error of
// y (0 entries -> unweighted point).  Requires >= 3 points (>= 5 recommended
// by callers that enforce their own preconditions).
FitResult fit_loglog(const Vec& x, const Vec& y, const Vec& sigma, FitModel model);

} // namespace bnlab
