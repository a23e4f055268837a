#pragma once

#include <functional>
#include <vector>

#include "bnlab/linalg.hpp"

namespace bnlab {

using Fn1D = std::function<double(double)>;

// Adaptive Gauss-Kronrod (G7/K15) on [a,b].  Throws numerical_error if the
// tolerance cannot be met within max_depth bisections.
double adaptive_quad(const Fn1D& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 0.0, int max_depth = 48);

// Same, but the interval is pre-split at the given breakpoints (sorted,
// inside [a,b]).  Use for integrands with known concentration scales the
// top-level error estimate would miss.
double adaptive_quad_split(const Fn1D& f, double a, double b, const Vec& breakpoints,
                           double rel_tol = 1e-12, double abs_tol = 0.0);

// Breakpoints covering a bubble core at scale mu inside [0, b]: decade chain
// mu/8, mu, 10 mu, ... so adaptive panels always see the spike.
Vec bubble_breakpoints(double mu, double b);

struct Rule1D {
    Vec nodes;   // in (a,b) or (-1,1) for the raw rule
    Vec weights;
};

// Gauss-Legendre rule on [-1,1] (Golub-Welsch).
Rule1D gauss_legendre(int n);

// Gauss-Jacobi rule for weight (1-t)^alpha (1+t)^beta on [-1,1].
Rule1D gauss_jacobi(int n, double alpha, double beta);

// Convenience: Gauss-Legendre mapped to [a,b].
Rule1D gauss_legendre_on(int n, double a, double b);

} // namespace bnlab
