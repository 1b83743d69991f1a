#pragma once

#include <string>
#include <vector>

#include "sel/geometry.hpp"

namespace sel {

enum class RateModel { linear, linear_logpow, power, power_of_log, loglog };

std::string to_string(RateModel m);
RateModel rate_model_from_string(const std::string& s);

// u ~ delta^power log^logpow(scale_A/delta); loglog means delta log log(A/delta).
struct RateSpec {
    RateModel model = RateModel::linear;
    double power = 1.0;
    double logpow = 0.0;
    double scale_A = 2.0;
};

struct FitOptions {
    double delta_min = -1.0;  // < 0: third smallest distinct delta
    double delta_max = -1.0;  // < 0: 0.1 * max delta
    bool profile_A = false;   // log models: choose the scale that minimises the residual
};

struct RateFit {
    RateModel model = RateModel::linear;
    double fitted_power = 0.0;
    double fitted_logpow = 0.0;
    double r_squared = 0.0;
    double layer_lo = 0.0, layer_hi = 0.0;
    int n_points = 0;
    double scale_A = 0.0;
};

// Least squares in the model's log coordinates. Log-corrected models fix the
// delta power at spec.power and fit only the log exponent.
RateFit fit_rate(const GridFunction& u, const RateSpec& spec, const FitOptions& opts = {});

struct RateComparison {
    bool pass = false;
    double d_power = 0.0;
    double d_logpow = 0.0;
    std::string diagnostic;
};

RateComparison compare(const RateFit& fit, const RateSpec& predicted, double tol_power, double tol_logpow);

struct ProbeResult {
    bool finite = true;
    double magnitude = 0.0;
    std::vector<double> ts;
    std::vector<double> quotients;
};

// Difference quotients u(x0 + t n)/t along an inward normal for t = 2h, 4h, ...
// up to a tenth of the largest delta; divergent when the quotient at the
// smallest t exceeds the one at the largest t by more than growth_limit.
ProbeResult normal_derivative_probe(const GridFunction& u, double growth_limit = 2.0);

}  // namespace sel
