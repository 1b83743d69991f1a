#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sel/geometry.hpp"
#include "sel/operators.hpp"

namespace sel {

// k(delta): delta^-q (power), delta^-q log^-a(A/delta) (power_log), or
// delta^-1 log^-1(A/delta) (loglog_free, which ignores q and a).
struct WeightSpec {
    enum class Form { power, power_log, loglog_free };
    Form form = Form::power;
    double q = 0.0;
    double a = 0.0;
    double A = 2.0;

    static WeightSpec power(double q) { return {Form::power, q, 0.0, 2.0}; }
    static WeightSpec power_log(double q, double a, double A) { return {Form::power_log, q, a, A}; }
    static WeightSpec loglog_free(double A) { return {Form::loglog_free, 1.0, 1.0, A}; }

    double effective_q() const { return form == Form::loglog_free ? 1.0 : q; }
    double effective_a() const {
        return form == Form::power ? 0.0 : form == Form::loglog_free ? 1.0 : a;
    }
    double operator()(double delta) const;
    // log k at t = exp(ln_t); stays finite far below the double range of t.
    double log_k(double ln_t) const;
    void validate(const Domain& domain) const;
};

std::string to_string(WeightSpec::Form f);

struct SolverOptions {
    double tol = 1e-12;       // on |G_i| / max(1, |rhs_i|)
    int max_iter = 200;       // Newton steps per continuation stage
    double eps0 = 1.0;
    double eps_ratio = 0.25;
    double eps_min = 1e-10;
    bool singular_stage = true;  // finish with eps = 0 once the path is done
    double step_floor = 1.0 / 1048576.0;
    double tail_share_max = 0.1;   // <= 0 disables the divergence diagnostic
    bool keep_stages = false;
    std::optional<Eigen::VectorXd> initial;
};

struct SolveResult {
    GridFunction u;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> epsilon_path;
    bool converged = false;
    double tail_share = 0.0;
    std::vector<Eigen::VectorXd> stages;
};

// Solve F(D^2u, Du, u, x) = k u^-p with u = 0 on the boundary.
SolveResult solve_scalar_singular(const OperatorSpec& spec, const GridPtr& grid, double p,
                                  const WeightSpec& weight, const SolverOptions& opts = {});

// Same with an arbitrary nonnegative nodal weight k (boundary entries ignored).
SolveResult solve_scalar_weighted(const DiscreteOperator& op, double p, const Eigen::VectorXd& k,
                                  const SolverOptions& opts = {});

Eigen::VectorXd weight_field(const Grid& grid, const WeightSpec& w);

// Share of the delta-weighted source mass sum(delta f vol) carried by the
// interior nodes within one decade of the smallest interior delta, capped at
// a hundredth of the largest delta.
double boundary_tail_share(const Grid& grid, const Eigen::VectorXd& source);

struct ComparisonReport {
    bool holds = false;
    int first_violation = -1;
    double min_gap = 0.0;  // min of u_super - u_sub
    double sub_margin = 0.0;
    double super_margin = 0.0;
    std::string warning;
};

ComparisonReport comparison_check(const OperatorSpec& spec, const GridFunction& u_sub,
                                  const GridFunction& u_super, double p, const WeightSpec& weight,
                                  double margin_tol = 1e-8);

struct IntegralReport {
    bool infinite = false;             // closed form verdict
    bool quadrature_infinite = false;  // numerical verdict
    bool agree = false;
    double increment_ratio = 0.0;
    std::vector<double> partials;
};

// Whether int_0 t k(t) dt diverges at t -> 0.
IntegralReport integral_criterion(const WeightSpec& weight);

enum class LowerBoundKind { linear, linear_logpow, loglog };

struct LowerBound {
    bool ok = false;
    double c = 0.0;
    int argmin = -1;
};

LowerBound lower_bound_check(const GridFunction& u, LowerBoundKind kind, double theta = 0.0, double A = 2.0);

}  // namespace sel
