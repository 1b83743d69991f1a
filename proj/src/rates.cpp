#include "sel/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sel/errors.hpp"

namespace sel {

std::string to_string(RateModel m) {
    switch (m) {
        case RateModel::linear: return "linear";
        case RateModel::linear_logpow: return "linear_logpow";
        case RateModel::power: return "power";
        case RateModel::power_of_log: return "power_of_log";
        case RateModel::loglog: return "loglog";
    }
    return "?";
}

RateModel rate_model_from_string(const std::string& s) {
    for (auto m : {RateModel::linear, RateModel::linear_logpow, RateModel::power, RateModel::power_of_log,
                   RateModel::loglog})
        if (to_string(m) == s) return m;
    throw PreconditionError("unknown rate model '" + s + "'");
}

namespace {

struct Line {
    double slope = 0.0, intercept = 0.0, r2 = 0.0, rss = 0.0;
};

Line regress(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Line l;
    l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    l.intercept = my - l.slope * mx;
    l.rss = std::max(0.0, syy - l.slope * sxy);
    l.r2 = syy > 0.0 ? std::clamp(1.0 - l.rss / syy, 0.0, 1.0) : 1.0;
    return l;
}

}  // namespace

namespace {

// Nodes along one inward normal, ordered by increasing distance.
std::vector<std::pair<double, double>> normal_line(const GridFunction& u) {
    const Grid& g = *u.grid;
    std::vector<std::pair<double, double>> line;
    switch (g.domain.kind) {
        case DomainKind::interval:
            for (int i = 0; i < g.n; ++i) line.emplace_back(g.axis0[i] - g.axis0[0], u[i]);
            break;
        case DomainKind::rectangle: {
            const int j = g.n / 2;
            for (int i = 0; i < g.n; ++i) line.emplace_back(g.axis0[i] - g.axis0[0], u[i * g.n + j]);
            break;
        }
        case DomainKind::disk:
            for (int k = g.n - 1; k >= 1; --k)
                line.emplace_back(g.domain.radius - g.axis0[k], u[1 + (k - 1) * g.n_theta]);
            line.emplace_back(g.domain.radius, u[0]);
            break;
    }
    return line;
}

}  // namespace

RateFit fit_rate(const GridFunction& u, const RateSpec& spec, const FitOptions& opts) {
    const Grid& g = *u.grid;
    std::vector<double> ds;
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) ds.push_back(g.delta[i]);
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    if (ds.size() < 3) throw LayerError("grid too coarse for a boundary layer fit");
    const double lo = opts.delta_min >= 0.0 ? opts.delta_min : ds[2];
    const double hi = opts.delta_max >= 0.0 ? opts.delta_max : 0.1 * ds.back();

    std::vector<double> d, v;
    if (spec.model == RateModel::power_of_log) {
        // The level of a pure-log profile carries an additive offset from the
        // source mass below the first node, so fit its slope t|du/dt| along
        // the inward normal instead: t u' ~ theta C log^(theta-1).
        const auto line = normal_line(u);
        for (std::size_t k = 1; k + 1 < line.size(); ++k) {
            const double t = line[k].first;
            if (t < lo || t > hi) continue;
            const double du = (line[k + 1].second - line[k - 1].second) / (line[k + 1].first - line[k - 1].first);
            if (!(du != 0.0)) throw LayerError("flat profile in the fitting layer");
            d.push_back(t);
            v.push_back(std::abs(t * du));
        }
    } else {
        for (int i = 0; i < g.size(); ++i) {
            if (!g.interior[i] || g.delta[i] < lo || g.delta[i] > hi) continue;
            if (!(u[i] > 0.0)) throw LayerError("fit needs u > 0 on the layer");
            d.push_back(g.delta[i]);
            v.push_back(u[i]);
        }
    }
    if (d.size() < 8) throw LayerError("only " + std::to_string(d.size()) + " nodes in the fitting layer");

    RateFit fit;
    fit.model = spec.model;
    fit.layer_lo = lo;
    fit.layer_hi = hi;
    fit.n_points = static_cast<int>(d.size());
    const std::size_t m = d.size();
    std::vector<double> x(m), y(m);

    auto log_fit = [&](double A) {
        for (std::size_t i = 0; i < m; ++i) {
            const double L = std::log(A / d[i]);
            switch (spec.model) {
                case RateModel::linear_logpow:
                    x[i] = std::log(L);
                    y[i] = std::log(v[i]) - spec.power * std::log(d[i]);
                    break;
                case RateModel::power_of_log:
                    x[i] = std::log(L);
                    y[i] = std::log(v[i]);
                    break;
                default:
                    x[i] = std::log(std::log(L));
                    y[i] = std::log(v[i]) - std::log(d[i]);
                    break;
            }
        }
        return regress(x, y);
    };

    if (spec.model == RateModel::linear || spec.model == RateModel::power) {
        for (std::size_t i = 0; i < m; ++i) {
            x[i] = std::log(d[i]);
            y[i] = std::log(v[i]);
        }
        const Line l = regress(x, y);
        fit.fitted_power = l.slope;
        fit.r_squared = l.r2;
        return fit;
    }

    const double dmax = *std::max_element(d.begin(), d.end());
    const double floorA = dmax * (spec.model == RateModel::loglog ? std::exp(1.0) * 1.5 : 1.5);
    double A = spec.scale_A;
    if (A <= floorA && !opts.profile_A)
        throw PreconditionError("rate scale A must exceed the layer's delta range");
    if (opts.profile_A) {
        // scan then golden-section refine in s = log log(A/floorA)
        auto AofS = [&](double s) { return floorA * std::exp(std::exp(s)); };
        auto rss = [&](double s) { return log_fit(AofS(s)).rss; };
        double best = -4.0, bv = rss(best);
        for (double s = -4.0; s <= 4.0; s += 0.05) {
            const double r = rss(s);
            if (r < bv) {
                bv = r;
                best = s;
            }
        }
        double a = best - 0.05, b = best + 0.05;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 60; ++it) {
            const double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
            (rss(c1) < rss(c2) ? b : a) = (rss(c1) < rss(c2) ? c2 : c1);
        }
        A = AofS(0.5 * (a + b));
    }
    const Line l = log_fit(A);
    fit.scale_A = A;
    fit.fitted_power = spec.model == RateModel::power_of_log ? 0.0 : spec.power;
    if (spec.model == RateModel::loglog) fit.fitted_power = 1.0;
    fit.fitted_logpow = spec.model == RateModel::power_of_log ? l.slope + 1.0 : l.slope;
    fit.r_squared = l.r2;
    return fit;
}

RateComparison compare(const RateFit& fit, const RateSpec& pred, double tol_power, double tol_logpow) {
    RateComparison c;
    std::ostringstream os;
    if (fit.model != pred.model) {
        os << "model mismatch: fitted " << to_string(fit.model) << " against predicted " << to_string(pred.model);
        c.diagnostic = os.str();
        return c;
    }
    c.d_power = fit.fitted_power - pred.power;
    c.d_logpow = fit.fitted_logpow - pred.logpow;
    const bool log_model = pred.model != RateModel::linear && pred.model != RateModel::power;
    c.pass = std::abs(c.d_power) <= tol_power && (!log_model || std::abs(c.d_logpow) <= tol_logpow) &&
             fit.r_squared >= 0.99;
    os << to_string(pred.model) << ": power " << fit.fitted_power << " vs " << pred.power;
    if (log_model) os << ", logpow " << fit.fitted_logpow << " vs " << pred.logpow;
    os << ", R2 " << fit.r_squared;
    c.diagnostic = os.str();
    return c;
}


ProbeResult normal_derivative_probe(const GridFunction& u, double growth_limit) {
    const auto line = normal_line(u);
    const double h = line[1].first;
    double reach = 0.0;
    for (auto& [t, val] : line) reach = std::max(reach, t);
    const double tmax = 0.1 * std::min(reach, u.grid->delta.maxCoeff());
    ProbeResult pr;
    std::size_t k = 1;
    for (double t = 2.0 * h; t <= tmax; t *= 2.0) {
        while (k + 1 < line.size() && line[k].first < t) ++k;
        const auto& [t0, u0] = line[k - 1];
        const auto& [t1, u1] = line[k];
        const double val = u0 + (u1 - u0) * (t - t0) / (t1 - t0);
        pr.ts.push_back(t);
        pr.quotients.push_back(val / t);
    }
    if (pr.quotients.size() < 2) {
        pr.finite = true;
        pr.magnitude = pr.quotients.empty() ? 0.0 : pr.quotients.back();
        return pr;
    }
    pr.magnitude = pr.quotients.back();
    pr.finite = pr.quotients.front() <= growth_limit * pr.quotients.back();
    return pr;
}

}  // namespace sel
