#include "sel/barrier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/numeric/odeint.hpp>

#include "sel/errors.hpp"

namespace sel {

namespace detail {
struct LogInterp {
    boost::math::interpolators::pchip<std::vector<double>> f;
    double t0, H0, b;
};
}  // namespace detail

namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 3>;  // H, H', D = H - t H'

// The ODE in tau = ln t, so that t down to 1e-140 costs a few hundred steps.
struct Rhs {
    double alpha, beta;
    void operator()(const State& x, State& dx, double tau) const {
        const double t = std::exp(tau);
        const double lh = std::log(std::max(x[0], 1e-300));
        dx[0] = t * x[1];
        dx[1] = -std::exp((1.0 - alpha) * tau - beta * lh);
        dx[2] = std::exp((2.0 - alpha) * tau - beta * lh);
    }
};

struct Run {
    bool hit_zero = false;
    State end{};
    std::vector<double> taus;
    std::vector<State> states;
};

// Integrate from tau0 to tau1 (either direction) landing exactly on the
// sample abscissae, which must be ordered in the direction of travel.
Run integrate(const Rhs& rhs, State x, double tau0, double tau1, const std::vector<double>& samples,
              double rtol) {
    Run run;
    auto stepper = ode::make_controlled(1e-300, rtol, ode::runge_kutta_dopri5<State>());
    const double dir = tau1 > tau0 ? 1.0 : -1.0;
    double tau = tau0, dt = dir * 1e-2;
    std::size_t k = 0;
    while (k < samples.size() && dir * (samples[k] - tau) <= 0.0) {
        run.taus.push_back(samples[k]);
        run.states.push_back(x);
        ++k;
    }
    while (dir * (tau1 - tau) > 0.0) {
        const double target = k < samples.size() ? samples[k] : tau1;
        bool landing = false;
        if (dir * (tau + dt - target) >= 0.0) {
            dt = target - tau;
            landing = true;
        }
        const State save = x;
        const double tsave = tau, dsave = dt;
        if (stepper.try_step(rhs, x, tau, dt) == ode::fail) {
            if (std::abs(dt) < 1e-13) {
                run.hit_zero = true;
                break;
            }
            continue;
        }
        if (!(x[0] > 0.0) || !std::isfinite(x[0] + x[1] + x[2])) {
            x = save;
            tau = tsave;
            dt = 0.25 * dsave;
            if (std::abs(dt) < 1e-13) {
                run.hit_zero = true;
                break;
            }
            continue;
        }
        if (landing) {
            tau = target;
            if (k < samples.size()) {
                run.taus.push_back(target);
                run.states.push_back(x);
                ++k;
            }
        }
    }
    run.end = x;
    return run;
}

std::vector<double> log_samples(double t_lo, double t_hi, int n) {
    std::vector<double> taus(n);
    const double a = std::log(t_lo), b = std::log(t_hi);
    for (int i = 0; i < n; ++i) taus[i] = a + (b - a) * i / (n - 1);
    taus.back() = b;
    return taus;
}

void fill(BarrierSolution& sol, const Run& run, bool reversed) {
    const std::size_t m = run.taus.size();
    sol.ts.resize(m);
    sol.H.resize(m);
    sol.Hp.resize(m);
    sol.D.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = reversed ? m - 1 - i : i;
        sol.ts[i] = std::exp(run.taus[j]);
        sol.H[i] = run.states[j][0];
        sol.Hp[i] = run.states[j][1];
        sol.D[i] = run.states[j][2];
    }
    sol.ts.back() = std::min(sol.ts.back(), sol.b);
}

BarrierSolution forward(double alpha, double beta, double b, int n, const BarrierOptions& o) {
    const Rhs rhs{alpha, beta};
    // For alpha > 1 the slope near 0 is dominated by t^(1-alpha), which would
    // swamp the shooting parameter if t0 were taken too small.
    double t0 = 1e-140;
    if (alpha > 1.0) t0 = std::max(t0, std::pow(1e-8, 1.0 / (alpha - 1.0)));
    const double t_lo = std::max(o.t_sample_min, t0 * 1e2);
    if (!(t_lo < b)) throw ShootingError("sample window is empty; alpha_ode too close to 2");
    const double tau0 = std::log(t0), tau1 = std::log(b);
    const double e = 2.0 - alpha - beta;

    auto initial = [&](double lg) {
        // D(t0) = int_0^t0 s^(1-alpha) H^-beta ds with H ~ G0 s
        const double D0 = e > 0.05 ? std::exp(e * tau0 - beta * lg - std::log(e)) : 0.0;
        return State{t0 * std::exp(lg) + D0, std::exp(lg), D0};
    };
    auto excess = [&](double lg) {
        const Run r = integrate(rhs, initial(lg), tau0, tau1, {}, o.rtol);
        return r.hit_zero ? -1.0 : r.end[0] - 1.0;
    };

    double guess = 1.0 / b;
    if (alpha > 1.0) guess += std::pow(t0, 1.0 - alpha) / (alpha - 1.0);
    double lo = std::log(guess) - 5.0, hi = std::log(guess) + 5.0;
    while (excess(lo) >= 0.0) {
        lo -= 10.0;
        if (lo < -690.0) throw ShootingError("forward shooting: no lower bracket for the initial slope");
    }
    while (excess(hi) < 0.0) {
        hi += 10.0;
        if (hi > 690.0) throw ShootingError("forward shooting: no upper bracket for the initial slope");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    const double lg = 0.5 * (lo + hi);
    const Run run = integrate(rhs, initial(lg), tau0, tau1, log_samples(t_lo, b, n), o.rtol);
    if (run.hit_zero) throw ShootingError("forward shooting: H reached 0 on the final pass");

    BarrierSolution sol;
    sol.alpha_ode = alpha;
    sol.beta_ode = beta;
    sol.b = b;
    sol.route = "forward";
    fill(sol, run, false);
    sol.slope_b = sol.Hp.back();
    return sol;
}

BarrierSolution backward(double alpha, double beta, double b, int n, const BarrierOptions& o) {
    const Rhs rhs{alpha, beta};
    const double tc = o.crossover * b;
    const double tau_b = std::log(b), tau_c = std::log(tc);
    // Below the crossover H ~ H'(0+) t, so H(0+) is read off as D(tc).
    auto h0 = [&](double S) {
        const Run r = integrate(rhs, State{1.0, S, 1.0 - b * S}, tau_b, tau_c, {}, o.rtol);
        return r.hit_zero ? -1.0 : r.end[2];
    };
    double lo = 0.0, hi = 1.0 / b;
    if (h0(lo) <= 0.0) throw ShootingError("backward shooting: H(0+) <= 0 already at H'(b) = 0");
    if (h0(hi) > 0.0) throw ShootingError("backward shooting: no upper bracket for H'(b)");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h0(mid) > 0.0 ? lo : hi) = mid;
    }
    const double S = lo;
    auto taus = log_samples(tc, b, n);
    std::reverse(taus.begin(), taus.end());
    const Run run = integrate(rhs, State{1.0, S, 1.0 - b * S}, tau_b, tau_c, taus, o.rtol);
    if (run.hit_zero) throw ShootingError("backward shooting: H reached 0 at interior t");

    BarrierSolution sol;
    sol.alpha_ode = alpha;
    sol.beta_ode = beta;
    sol.b = b;
    sol.route = "backward";
    fill(sol, run, true);
    sol.slope_b = S;
    return sol;
}

}  // namespace

double BarrierSolution::operator()(double t) const {
    if (!interp) throw ContractViolation("barrier solution has no interpolant");
    if (t <= 0.0) return 0.0;
    if (t > b * (1.0 + 1e-12)) throw RangeError("barrier evaluated beyond its endpoint b");
    if (t <= interp->t0) return interp->H0 * (t / interp->t0);
    return std::exp(interp->f(std::log(std::min(t, b))));
}

BarrierSolution solve_barrier_ode(double alpha, double beta, double b, int n, const BarrierOptions& o) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw PreconditionError("barrier ODE needs 0 < alpha_ode < 2");
    if (!(beta >= 0.0)) throw PreconditionError("barrier ODE needs beta_ode >= 0");
    if (!(b > 0.0 && b < 1.0)) throw PreconditionError("barrier ODE needs 0 < b < 1");
    if (n < 8) throw PreconditionError("barrier ODE needs at least 8 samples");

    BarrierSolution sol = o.route == ShootingRoute::forward ? forward(alpha, beta, b, n, o)
                                                            : backward(alpha, beta, b, n, o);
    std::vector<double> x(sol.ts.size()), y(sol.ts.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::log(sol.ts[i]);
        y[i] = std::log(sol.H[i]);
    }
    auto li = std::make_shared<detail::LogInterp>(
        detail::LogInterp{boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y)),
                          sol.ts.front(), sol.H.front(), b});
    sol.interp = std::move(li);
    sol.props = verify_barrier_properties(sol);
    return sol;
}

BarrierProps verify_barrier_properties(const BarrierSolution& sol) {
    BarrierProps pr;
    const std::size_t m = sol.ts.size();
    if (m < 3) return pr;
    const double a = sol.alpha_ode, be = sol.beta_ode;

    pr.positive_ok = true;
    pr.concave_ok = true;
    pr.chord_ok = true;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(sol.H[i] > 0.0 && sol.Hp[i] > 0.0)) pr.positive_ok = false;
        // dD/dtau = -t^2 H'', so D carries concavity and H > t H' below the
        // resolution of H - t H' formed from H and H'.
        if (i + 1 < m && !(sol.D[i + 1] > sol.D[i] && sol.Hp[i + 1] <= sol.Hp[i])) pr.concave_ok = false;
        if (!(sol.D[i] > 0.0)) pr.chord_ok = false;
    }

    if (a + be < 1.0 - 1e-12) {
        pr.linear_checked = true;
        pr.c1 = std::numeric_limits<double>::infinity();
        pr.c2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            pr.c1 = std::min(pr.c1, sol.H[i] / sol.ts[i]);
            pr.c2 = std::max(pr.c2, sol.H[i] / sol.ts[i]);
        }
        pr.linear_bounds_ok = pr.c1 > 0.0 && std::isfinite(pr.c2);
    }

    if (std::abs(be - (1.0 - a)) <= 1e-12) {
        pr.log_rate_checked = true;
        const double target = 1.0 / (2.0 - a);
        // Slope of ln(H/t) against ln(-ln t) over the smallest decade.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int k = 0;
        for (std::size_t i = 0; i < m && sol.ts[i] <= 10.0 * sol.ts[0]; ++i, ++k) {
            const double X = std::log(-std::log(sol.ts[i]));
            const double Y = std::log(sol.H[i] / sol.ts[i]);
            sx += X;
            sy += Y;
            sxx += X * X;
            sxy += X * Y;
        }
        if (k >= 3) pr.theta = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        pr.c3 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            pr.c3 = std::min(pr.c3, sol.H[i] / (sol.ts[i] * std::pow(-std::log(sol.ts[i]), target)));
        pr.log_rate_ok = k >= 3 && pr.c3 > 0.0 && std::abs(pr.theta - target) <= 0.05 * target;
    }

    pr.C1 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        pr.C1 = std::max(pr.C1, sol.Hp[i] * std::pow(sol.ts[i], a) * std::pow(sol.H[i], be));
    pr.hp_bound_ok = pr.positive_ok && std::isfinite(pr.C1) && pr.C1 > 0.0;
    return pr;
}

GridFunction composite_barrier(double m, double c, const BarrierSolution& sol, const GridFunction& phi) {
    if (!(m > 0.0 && c > 0.0)) throw PreconditionError("composite barrier needs m > 0 and c > 0");
    const double top = phi.values.maxCoeff();
    if (c * top > sol.b * (1.0 + 1e-12))
        throw RangeError("composite barrier: c * max(phi) = " + std::to_string(c * top) + " exceeds b = " +
                         std::to_string(sol.b));
    GridFunction v(phi.grid);
    for (int i = 0; i < phi.size(); ++i) v[i] = phi[i] > 0.0 ? m * sol(c * phi[i]) : 0.0;
    return v;
}

GridFunction log_barrier(LogBarrierKind kind, const GridFunction& phi, double A, double bexp) {
    const double top = phi.values.maxCoeff();
    if (!(top > 0.0)) throw PreconditionError("log barrier needs max(phi) > 0");
    const double diam = phi.grid->domain.diameter();
    switch (kind) {
        case LogBarrierKind::phi_logpow:
            if (!(std::log(A / top) > 1.0))
                throw PreconditionError("phi_logpow needs log(A/phi) > 1, i.e. A > e * max(phi)");
            break;
        case LogBarrierKind::logpow_only:
            if (!(std::log(A / top) >= 2.0 * (1.0 - bexp)))
                throw PreconditionError("logpow_only needs log(B/phi) >= 2(1 - b) at every node");
            break;
        case LogBarrierKind::phi_loglog:
            if (!(A > 6.0 * diam)) throw PreconditionError("phi_loglog needs A > 6 diam(domain)");
            break;
    }
    GridFunction w(phi.grid);
    for (int i = 0; i < phi.size(); ++i) {
        const double f = phi[i];
        if (f <= 0.0) {
            if (kind == LogBarrierKind::logpow_only)
                w[i] = bexp < 0.0 ? 0.0 : bexp == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
            else
                w[i] = 0.0;
            continue;
        }
        const double L = std::log(A / f);
        switch (kind) {
            case LogBarrierKind::phi_logpow: w[i] = f * std::pow(L, bexp); break;
            case LogBarrierKind::logpow_only: w[i] = std::pow(L, bexp); break;
            case LogBarrierKind::phi_loglog: w[i] = f * std::log(L); break;
        }
    }
    return w;
}

GridFunction barrier_margin(const OperatorSpec& spec, const GridFunction& w, const GridFunction& rhs,
                            MarginSide side) {
    require_same_grid(w, rhs);
    const GridFunction Fw = discretize(spec, w);
    GridFunction m(w.grid);
    const auto& g = *w.grid;
    for (int i = 0; i < w.size(); ++i) {
        if (!g.interior[i]) continue;
        m[i] = side == MarginSide::sub ? rhs[i] - Fw[i] : Fw[i] - rhs[i];
    }
    return m;
}

void write_barrier_csv(std::ostream& os, const BarrierSolution& sol) {
    os << "t,H,Hp\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < sol.ts.size(); ++i) os << sol.ts[i] << ',' << sol.H[i] << ',' << sol.Hp[i] << '\n';
    os.precision(old);
}

}  // namespace sel
