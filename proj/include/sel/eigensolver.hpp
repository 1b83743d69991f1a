#pragma once

#include <optional>

#include <Eigen/Core>

#include "sel/geometry.hpp"
#include "sel/operators.hpp"

namespace sel {

struct EigenPair {
    double mu = 0.0;
    GridFunction phi;  // sup norm 1
    int iterations = 0;
    double residual_norm = 0.0;  // sup |F(phi) - mu phi| / mu
    double mu_lower = 0.0;       // min of the ratio that defines mu
};

struct EigenOptions {
    double tol = 1e-10;
    int max_iter = 200;
    std::optional<Eigen::VectorXd> initial;  // defaults to delta
};

// Inverse iteration: F(w) = phi_k, phi_{k+1} = w / |w|_inf, mu_k = max phi_k / w.
EigenPair principal_eigenpair(const OperatorSpec& spec, const GridPtr& grid, const EigenOptions& opts = {});

struct EigenBounds {
    double C_low = 0.0;   // min phi / delta
    double C_high = 0.0;  // max phi / delta
    double hopf_c = 0.0;  // min phi / delta over nodes next to the boundary
};

EigenBounds verify_eigen_bounds(const EigenPair& pair);

}  // namespace sel
