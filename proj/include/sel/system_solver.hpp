#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sel/classifier.hpp"
#include "sel/geometry.hpp"
#include "sel/operators.hpp"
#include "sel/scalar_solver.hpp"

namespace sel {

// coef * delta^pow * log^lpow(A / delta)
struct Envelope {
    double coef = 1.0, pow = 1.0, lpow = 0.0, A = 2.0;
    double operator()(double delta) const;
};

// Envelope exponents of the invariant cone, before the constants are known.
struct ConeShape {
    Subcase subcase = Subcase::III;
    bool mirrored = false;  // built on the swapped quad (second existence case)
    double a = 0.0;         // free parameter of subcases II, IV, V, VI
    double u_lo = 1.0, u_hi = 1.0, v_lo = 1.0, v_hi = 1.0;
};

struct ConeConstants {
    double m1 = 0.0, M1 = 0.0, m2 = 0.0, M2 = 0.0;
    double margin = 0.0;  // equal slack of the log inequalities over 1 + |log M| + |log m|
};

struct ConeSpec {
    ConeShape shape;
    Envelope u_lower, u_upper, v_lower, v_upper;
    ConeConstants k;
    double c1 = 0.0, c2 = 0.0;
    std::vector<std::string> notes;

    bool contains(const GridFunction& u, const GridFunction& v, double rel_slack = 1e-9) const;
};

ConeShape cone_shape(const ExponentQuad& quad);

// Log form of the constant inequalities; throws Infeasible when det <= 0 and
// PreconditionError unless 0 < c1 < 1 < c2.
ConeConstants choose_cone_constants(double c1, double c2, const ExponentQuad& quad);

// Largest slack violation of the four inequalities (<= 0 means satisfied).
double cone_constant_violation(const ConeConstants& k, double c1, double c2, const ExponentQuad& quad);

// c1 = min and c2 = max of the scalar prototype solutions over their
// envelopes, widened to c1 <= 1/2 and c2 >= 2.
std::pair<double, double> prototype_constants(const OperatorSpec& spec, const GridPtr& grid,
                                              const ExponentQuad& quad, const ConeShape& shape,
                                              const SolverOptions& opts = {});

ConeSpec cone_for_regime(const ExponentQuad& quad, double c1, double c2, const GridPtr& grid, double A = 2.0);

// prototype_constants followed by cone_for_regime.
ConeSpec build_cone(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& quad,
                    const SolverOptions& opts = {});

struct PicardOptions {
    double tol = 1e-10;  // on the sup-norm change of u and v
    int max_iter = 60;
    bool clamp = false;
    bool keep_history = false;
    std::optional<Eigen::VectorXd> u0, v0;  // default: geometric mean of the envelopes
    SolverOptions scalar;
};

struct SystemResult {
    GridFunction u, v;
    int picard_iterations = 0;
    double residual_u = 0.0, residual_v = 0.0;  // weighted by delta^min(q, r)
    double raw_residual_u = 0.0, raw_residual_v = 0.0;
    std::vector<char> stayed_in_cone;
    std::vector<double> changes;  // sup-norm change per iteration
    std::vector<Eigen::VectorXd> history_u, history_v;
    bool all_in_cone() const;
};

// Gauss-Seidel Picard sweeps: u from the frozen v, then v from the new u.
SystemResult picard_iterate(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& quad,
                            const ConeSpec& cone, const PicardOptions& opts = {});

struct SystemResidual {
    double u = 0.0, v = 0.0;          // weighted
    double raw_u = 0.0, raw_v = 0.0;  // unweighted
};

SystemResidual system_residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& v,
                               const ExponentQuad& quad);

struct UniquenessReport {
    double distance = 0.0;           // sup-norm distance of the two limits
    double contraction = 0.0;        // worst per-sweep ratio after burn-in
    double predicted = 0.0;          // qr / ((1+p)(1+s))
    std::vector<double> log_distances;
    std::vector<double> ratios;
    int iterations_a = 0, iterations_b = 0;
};

// Two Picard runs from distinct interior points of the cone; distances are
// measured in sup |log u1 - log u2| over interior nodes.
UniquenessReport uniqueness_probe(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& quad,
                                  const ConeSpec& cone, const PicardOptions& opts = {});

}  // namespace sel
