#include "sel/scalar_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sel/errors.hpp"

namespace sel {

double WeightSpec::operator()(double delta) const {
    return std::exp(log_k(std::log(delta)));
}

double WeightSpec::log_k(double ln_t) const {
    const double qe = effective_q(), ae = effective_a();
    double v = -qe * ln_t;
    if (ae != 0.0) v -= ae * std::log(std::log(A) - ln_t);
    return v;
}

void WeightSpec::validate(const Domain& domain) const {
    if (form != Form::power && !(A > domain.diameter()))
        throw PreconditionError("log weights need A > diam(domain)");
    if (!(effective_q() >= 0.0)) throw PreconditionError("weight exponent q must be >= 0");
}

std::string to_string(WeightSpec::Form f) {
    switch (f) {
        case WeightSpec::Form::power: return "power";
        case WeightSpec::Form::power_log: return "power_log";
        case WeightSpec::Form::loglog_free: return "loglog_free";
    }
    return "?";
}

Eigen::VectorXd weight_field(const Grid& grid, const WeightSpec& w) {
    Eigen::VectorXd k = Eigen::VectorXd::Zero(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        if (grid.interior[i]) k[i] = w(grid.delta[i]);
    return k;
}

double boundary_tail_share(const Grid& grid, const Eigen::VectorXd& source) {
    const Eigen::VectorXd vol = control_volumes(grid);
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i)
        if (grid.interior[i]) dmin = std::min(dmin, grid.delta[i]);
    // on coarse grids the decade would reach into the core and flag any source
    const double cut = std::min(10.0 * dmin, 0.01 * grid.delta.maxCoeff());
    double total = 0.0, tail = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        if (!grid.interior[i]) continue;
        const double m = grid.delta[i] * source[i] * vol[i];
        total += m;
        if (grid.delta[i] <= cut) tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
}

namespace {

struct Residual {
    Eigen::VectorXd G;
    double scaled = 0.0;
};

Residual residual(const DiscreteOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& k,
                  double p, double eps) {
    const Grid& g = op.grid();
    Residual r;
    r.G = op.apply(u);
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) {
            r.G[i] = 0.0;
            continue;
        }
        const double rhs = p == 0.0 ? k[i] : k[i] * std::pow(u[i] + eps, -p);
        r.G[i] -= rhs;
        const double s = std::abs(r.G[i]) / std::max(1.0, std::abs(rhs));
        if (!(s <= r.scaled)) r.scaled = std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
    }
    return r;
}

}  // namespace

SolveResult solve_scalar_weighted(const DiscreteOperator& op, double p, const Eigen::VectorXd& k,
                                  const SolverOptions& opts) {
    const Grid& g = op.grid();
    const int N = g.size();
    if (p < 0.0) throw PreconditionError("singular exponent p must be >= 0");
    if (k.size() != N) throw ContractViolation("weight field size mismatch");

    Eigen::VectorXd u = opts.initial ? *opts.initial : Eigen::VectorXd::Zero(N);
    if (u.size() != N) throw ContractViolation("initial iterate size mismatch");
    for (int i = 0; i < N; ++i)
        if (!g.interior[i]) u[i] = 0.0;

    std::vector<double> path;
    if (p == 0.0) {
        path.push_back(0.0);
    } else {
        for (double e = opts.eps0; e >= opts.eps_min * (1.0 - 1e-12); e *= opts.eps_ratio) path.push_back(e);
        if (opts.singular_stage) path.push_back(0.0);
        if (path.empty()) path.push_back(0.0);
    }
    if (p > 0.0) {
        const double e0 = path.front();
        for (int i = 0; i < N; ++i)
            if (g.interior[i] && !(u[i] + e0 > 0.0))
                throw PreconditionError("initial iterate must keep u + eps > 0 for the first stage");
    }

    SolveResult res;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double scaled = 0.0;
    for (double eps : path) {
        res.epsilon_path.push_back(eps);
        Residual r = residual(op, u, k, p, eps);
        scaled = r.scaled;
        int it = 0;
        while (scaled >= opts.tol) {
            if (it++ >= opts.max_iter) {
                std::ostringstream os;
                os << "Newton did not converge within " << opts.max_iter << " steps at eps=" << eps
                   << " (scaled residual " << scaled << ")";
                throw ConvergenceError(os.str(), u);
            }
            Eigen::SparseMatrix<double> J = op.linearize(u);
            if (p > 0.0)
                for (int i = 0; i < N; ++i)
                    if (g.interior[i]) J.coeffRef(i, i) += p * k[i] * std::pow(u[i] + eps, -p - 1.0);
            J.makeCompressed();
            lu.compute(J);
            if (lu.info() != Eigen::Success) throw ConvergenceError("singular Newton matrix", u);
            const Eigen::VectorXd d = lu.solve(-r.G);

            double t = 1.0;
            if (p > 0.0) {
                // never lose more than half of u + eps in one step
                for (int i = 0; i < N; ++i)
                    if (g.interior[i] && d[i] < 0.0) t = std::min(t, 0.5 * (u[i] + eps) / -d[i]);
            }
            Eigen::VectorXd trial;
            Residual rt;
            for (;;) {
                trial = u + t * d;
                rt = residual(op, trial, k, p, eps);
                if (rt.scaled <= (1.0 - 1e-4 * t) * scaled || t < opts.step_floor) break;
                t *= 0.5;
            }
            const double step = (t * d).lpNorm<Eigen::Infinity>();
            if (rt.scaled > scaled) {
                // roundoff floor: accept a stagnated but tiny residual
                if (scaled < 1e-8) break;
                throw ConvergenceError("line search failed to reduce the residual at eps=" + std::to_string(eps), u);
            }
            u = trial;
            r = std::move(rt);
            scaled = r.scaled;
            ++res.iterations;
            if (step <= 4.0 * std::numeric_limits<double>::epsilon() * u.lpNorm<Eigen::Infinity>() &&
                scaled < 1e-8)
                break;
        }
        if (opts.keep_stages) res.stages.push_back(u);
    }

    res.final_residual = scaled;
    res.converged = true;
    if (!u.allFinite()) throw ConvergenceError("non-finite iterate", u);
    for (int i = 0; i < N; ++i)
        if (g.interior[i] && !(u[i] > 0.0))
            throw PositivityBreach("solution touches zero at interior node " + std::to_string(i), u, i);

    Eigen::VectorXd src = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < N; ++i)
        if (g.interior[i]) src[i] = p == 0.0 ? k[i] : k[i] * std::pow(u[i], -p);
    res.tail_share = boundary_tail_share(g, src);
    for (int i = 0; i < g.size(); ++i)
        if (!g.interior[i]) u[i] = 0.0;  // LU leaves roundoff on the identity rows
    res.u = GridFunction(op.grid_ptr(), u);
    if (opts.tail_share_max > 0.0 && res.tail_share > opts.tail_share_max) {
        std::ostringstream os;
        os << "source mass is not resolved: the boundary-most decade of delta carries "
           << res.tail_share << " of it (limit " << opts.tail_share_max
           << "); the discrete solution grows without bound under refinement";
        throw DivergenceError(os.str(), u, res.tail_share);
    }
    return res;
}

SolveResult solve_scalar_singular(const OperatorSpec& spec, const GridPtr& grid, double p,
                                  const WeightSpec& weight, const SolverOptions& opts) {
    weight.validate(grid->domain);
    DiscreteOperator op(spec, grid);
    return solve_scalar_weighted(op, p, weight_field(*grid, weight), opts);
}

ComparisonReport comparison_check(const OperatorSpec& spec, const GridFunction& u_sub,
                                  const GridFunction& u_super, double p, const WeightSpec& weight,
                                  double margin_tol) {
    require_same_grid(u_sub, u_super);
    const Grid& g = *u_sub.grid;
    DiscreteOperator op(spec, u_sub.grid);
    const Eigen::VectorXd k = weight_field(g, weight);
    const Eigen::VectorXd Fs = op.apply(u_sub.values), FS = op.apply(u_super.values);
    ComparisonReport rep;
    rep.sub_margin = rep.super_margin = rep.min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i) {
        const double gap = u_super[i] - u_sub[i];
        if (gap < rep.min_gap) rep.min_gap = gap;
        if (gap < 0.0 && rep.first_violation < 0) rep.first_violation = i;
        if (!g.interior[i]) continue;
        auto rhs = [&](double v) { return p == 0.0 ? k[i] : k[i] * std::pow(v, -p); };
        const double ms = (rhs(u_sub[i]) - Fs[i]) / std::max(1.0, std::abs(rhs(u_sub[i])));
        const double mS = (FS[i] - rhs(u_super[i])) / std::max(1.0, std::abs(rhs(u_super[i])));
        rep.sub_margin = std::min(rep.sub_margin, ms);
        rep.super_margin = std::min(rep.super_margin, mS);
    }
    rep.holds = rep.first_violation < 0;
    if (!(rep.sub_margin >= -margin_tol)) rep.warning += "u_sub is not a discrete subsolution; ";
    if (!(rep.super_margin >= -margin_tol)) rep.warning += "u_super is not a discrete supersolution; ";
    return rep;
}

IntegralReport integral_criterion(const WeightSpec& w) {
    IntegralReport rep;
    const double q = w.effective_q(), a = w.effective_a();
    rep.infinite = q > 2.0 || (q == 2.0 && a <= 1.0);

    // t = t1 exp(-x) with t1 = A/e, so log(A/t) = 1 + x; integrate t^2 k(t) dx
    // over the dyadic blocks [2^j, 2^(j+1)] and watch the block ratio.
    const double ln_t1 = std::log(w.A) - 1.0;
    auto log_integrand = [&](double x) { return 2.0 * (ln_t1 - x) + w.log_k(ln_t1 - x); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double prev = GK::integrate([&](double x) { return std::exp(log_integrand(x)); }, 0.0, 1.0, 10, 1e-12);
    double total = prev;
    rep.partials.push_back(total);
    rep.increment_ratio = 0.0;
    for (int j = 0; j < 40; ++j) {
        const double x0 = std::ldexp(1.0, j), x1 = std::ldexp(1.0, j + 1);
        if (log_integrand(x1) > 700.0) {
            rep.quadrature_infinite = true;
            rep.increment_ratio = std::numeric_limits<double>::infinity();
            break;
        }
        const double blk = GK::integrate([&](double x) { return std::exp(log_integrand(x)); }, x0, x1, 15, 1e-12);
        total += blk;
        rep.partials.push_back(total);
        if (prev > 0.0) rep.increment_ratio = blk / prev;
        if (blk == 0.0 || (prev > 0.0 && blk < 1e-300)) {
            rep.increment_ratio = 0.0;
            break;
        }
        prev = blk;
    }
    if (!rep.quadrature_infinite) rep.quadrature_infinite = rep.increment_ratio >= 1.0 - 1e-6;
    rep.agree = rep.quadrature_infinite == rep.infinite;
    return rep;
}

LowerBound lower_bound_check(const GridFunction& u, LowerBoundKind kind, double theta, double A) {
    const Grid& g = *u.grid;
    LowerBound lb;
    lb.c = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) continue;
        const double d = g.delta[i];
        double model = d;
        if (kind == LowerBoundKind::linear_logpow) model = d * std::pow(std::log(A / d), theta);
        if (kind == LowerBoundKind::loglog) model = d * std::log(std::log(A / d));
        const double c = u[i] / model;
        if (c < lb.c) {
            lb.c = c;
            lb.argmin = i;
        }
    }
    lb.ok = lb.c > 0.0 && std::isfinite(lb.c);
    return lb;
}

}  // namespace sel
