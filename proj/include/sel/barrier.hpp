#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sel/geometry.hpp"
#include "sel/operators.hpp"

namespace sel {

struct BarrierProps {
    bool positive_ok = false;   // H > 0 and H' > 0 at every sample
    bool concave_ok = false;    // H' strictly decreasing
    bool chord_ok = false;      // H > t H'
    bool linear_checked = false;  // only when alpha + beta < 1
    bool linear_bounds_ok = false;
    double c1 = 0.0, c2 = 0.0;  // c1 t <= H <= c2 t
    bool log_rate_checked = false;  // only when beta = 1 - alpha
    bool log_rate_ok = false;
    double theta = 0.0;         // fitted exponent of H ~ t (-ln t)^theta
    double c3 = 0.0;            // H >= c3 t (-ln t)^(1/(2-alpha))
    bool hp_bound_ok = false;
    double C1 = 0.0;            // H' <= C1 t^-alpha H^-beta
};

namespace detail {
struct LogInterp;
}

// Solutions of H'' = -t^-alpha H^-beta on (0, b] with H(0) = 0, scaled so
// that H(b) = 1.
struct BarrierSolution {
    double alpha_ode = 0.0, beta_ode = 0.0, b = 0.0;
    std::vector<double> ts, H, Hp;
    std::vector<double> D;  // H - t H', integrated on its own for accuracy
    double slope_b = 0.0;   // H'(b)
    std::string route;
    BarrierProps props;

    // Monotone cubic in log-log coordinates; linear below the first sample.
    double operator()(double t) const;

    std::shared_ptr<const detail::LogInterp> interp;  // built by solve_barrier_ode
};

enum class ShootingRoute { forward, backward };

struct BarrierOptions {
    ShootingRoute route = ShootingRoute::forward;
    double t_sample_min = 1e-100;  // smallest sample (forward route)
    double crossover = 1e-6;       // backward route stops at crossover * b
    double rtol = 1e-12;
};

BarrierSolution solve_barrier_ode(double alpha_ode, double beta_ode, double b, int n,
                                  const BarrierOptions& opts = {});

BarrierProps verify_barrier_properties(const BarrierSolution& sol);

GridFunction composite_barrier(double m, double c, const BarrierSolution& sol, const GridFunction& phi);

enum class LogBarrierKind { phi_logpow, logpow_only, phi_loglog };

GridFunction log_barrier(LogBarrierKind kind, const GridFunction& phi, double A_or_B, double exponent_b);

enum class MarginSide { sub, super };

// sub: rhs - F(w), super: F(w) - rhs; interior nodes only.
GridFunction barrier_margin(const OperatorSpec& spec, const GridFunction& w, const GridFunction& rhs,
                            MarginSide side);

void write_barrier_csv(std::ostream& os, const BarrierSolution& sol);

}  // namespace sel
