#include "bnlab/fit.hpp"

#include <cmath>

#include "bnlab/errors.hpp"

namespace bnlab {

FitResult fit_loglog(const Vec& x, const Vec& y, const Vec& sigma, FitModel model) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n || sigma.size() != n)
        throw argument_error("fit_loglog: need >=3 points with matching sigma");

    std::vector<double> u(n), v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw argument_error("fit_loglog: data must be strictly positive");
        u[i] = (model == FitModel::power) ? std::log(x[i]) : 1.0 / x[i];
        v[i] = std::log(y[i]);
        // var(log y) ~ (sigma/y)^2
        const double rel = sigma[i] / y[i];
        w[i] = (rel > 0.0) ? 1.0 / (rel * rel) : 0.0;
    }
    // Unweighted fallback when no point carries an error bar.
    double wmax = 0.0;
    for (double wi : w) wmax = std::max(wmax, wi);
    if (wmax == 0.0)
        for (double& wi : w) wi = 1.0;
    else
        for (double& wi : w)
            if (wi == 0.0) wi = wmax;

    double sw = 0, swu = 0, swv = 0, swuu = 0, swuv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swu += w[i] * u[i];
        swv += w[i] * v[i];
        swuu += w[i] * u[i] * u[i];
        swuv += w[i] * u[i] * v[i];
    }
    const double det = sw * swuu - swu * swu;
    if (det <= 0.0) throw numerical_error("fit_loglog: degenerate abscissae");

    FitResult r;
    r.model = model;
    r.slope = (sw * swuv - swu * swv) / det;
    r.intercept = (swuu * swv - swu * swuv) / det;

    // Residual-scaled covariance (accounts for misspecified error bars).
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = v[i] - (r.slope * u[i] + r.intercept);
        chi2 += w[i] * res * res;
    }
    const double dof = static_cast<double>(n) - 2.0;
    const double scale = (dof > 0.0) ? std::max(chi2 / dof, 1.0) : 1.0;
    r.slope_ci = 1.96 * std::sqrt(scale * sw / det);
    r.intercept_ci = 1.96 * std::sqrt(scale * swuu / det);
    r.coefficient = -r.slope;

    // Flag non-monotone y beyond combined error bars (data sorted by caller in
    // decreasing x is not assumed; sort indices by x first).
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    const bool increasing = r.slope > 0.0 || (model == FitModel::exponential && r.coefficient < 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t a = order[i], b = order[i + 1];
        const double bar = 3.0 * (sigma[a] + sigma[b]);
        const bool violates = increasing ? (y[b] < y[a] - bar) : (y[b] > y[a] + bar);
        if (violates) {
            r.monotonic_warning = true;
            r.warning = "non-monotone data beyond error bars";
            break;
        }
    }
    return r;
}

} // namespace bnlab
