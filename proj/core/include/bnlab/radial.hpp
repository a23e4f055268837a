#pragma once

#include <vector>

#include "bnlab/fit.hpp"
#include "bnlab/linalg.hpp"

namespace bnlab::radial {

struct ShootOptions {
    double rel_tol = 1e-12;
    double series_radius = 1e-4; // shrunk automatically below the core scale
    bool drop_nonlinearity = false;
    double blowup_threshold = 1e14;
};

struct Sample {
    double r;
    double u;
    double du;
};

struct ShootResult {
    double u_end = 0.0;
    double du_end = 0.0;
    std::vector<double> node_radii; // interior sign changes
    double max_pos = 0.0;           // sup u^+
    double max_neg = 0.0;           // sup u^-
    bool blew_up = false;
    double blowup_radius = 0.0;
    std::vector<Sample> samples;
};

// Integrates u'' + (n-1)/r u' + lambda u + |u|^{4/(n-2)} u = 0 on (0, 1],
// u(0) = u0, u'(0) = 0, with a series start at the origin.
ShootResult shoot(int n, double lambda, double u0, const ShootOptions& opts = {});

struct RadialProfile {
    double lambda = 0.0;
    double u0 = 0.0;
    std::vector<double> node_radii;
    std::vector<Sample> samples;
    double max_pos = 0.0;
    double max_neg = 0.0;
};

// Shooting solve of the Dirichlet problem with the requested interior node
// count: bisection on u0 over a bracket where the node count steps and u(1)
// changes sign, to |u(1)| <= 1e-10.
RadialProfile solve_radial(int n, double lambda, int node_count, const ShootOptions& opts = {},
                           double u0_min = 1e-2, double u0_max = 1e13);

struct SweepRow {
    double lambda = 0.0;
    double eps = 0.0;
    double u0 = 0.0;
    double max_pos = 0.0;
    double max_neg_inf = 0.0;
    double mu_est = 0.0;
    int nodes = 0;
    double profile_dist = 0.0; // sup distance of normalized u^- to the eigenprofile
};

struct SweepResult {
    std::vector<SweepRow> rows;
    FitResult neg_fit; // slope of log |u^-|_inf vs log eps (N=5)
    FitResult mu_fit;  // slope of log mu_est vs log eps
    int failure_index = -1; // first eps index where the branch was lost, -1 if none
    double lambda_rad = 0.0;
};

// One-node branch at lambda = lambda_rad - eps for each grid point, with the
// scaling table and profile-convergence distances.
SweepResult concentration_sweep(int n, const Vec& eps_grid, const ShootOptions& opts = {});

} // namespace bnlab::radial
