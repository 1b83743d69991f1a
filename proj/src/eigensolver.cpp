#include "sel/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sel/errors.hpp"
#include "sel/scalar_solver.hpp"

namespace sel {

EigenPair principal_eigenpair(const OperatorSpec& spec, const GridPtr& grid, const EigenOptions& opts) {
    if (!(opts.tol > 0.0)) throw PreconditionError("eigen tolerance must be positive");
    if (grid->interior_count() == 0) throw PreconditionError("grid has no interior nodes");
    const Grid& g = *grid;
    const DiscreteOperator op(spec, grid);

    Eigen::VectorXd phi = opts.initial ? *opts.initial : g.delta;
    if (phi.size() != g.size()) throw ContractViolation("initial eigen iterate has the wrong size");
    for (int i = 0; i < g.size(); ++i)
        if (!g.interior[i]) phi[i] = 0.0;
    const double top = phi.cwiseAbs().maxCoeff();
    if (!(top > 0.0)) throw PreconditionError("initial eigen iterate vanishes");
    phi /= top;

    SolverOptions so;
    so.tail_share_max = -1.0;
    so.tol = 1e-13;

    EigenPair out;
    double mu_prev = std::numeric_limits<double>::quiet_NaN();
    for (int it = 1; it <= opts.max_iter; ++it) {
        so.initial = phi / (std::isfinite(mu_prev) ? mu_prev : 1.0);
        const SolveResult r = solve_scalar_weighted(op, 0.0, phi, so);
        const Eigen::VectorXd& w = r.u.values;
        double hi = 0.0, lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i < g.size(); ++i) {
            if (!g.interior[i]) continue;
            if (!(w[i] > 0.0)) throw PositivityBreach("inverse iteration lost positivity", w, i);
            const double q = phi[i] / w[i];
            hi = std::max(hi, q);
            lo = std::min(lo, q);
        }
        phi = w / w.maxCoeff();
        out.iterations = it;
        out.mu = hi;
        out.mu_lower = lo;
        if (std::isfinite(mu_prev) && std::abs(hi - mu_prev) < opts.tol * std::max(1.0, hi)) {
            out.phi = GridFunction(grid, phi);
            const Eigen::VectorXd F = op.apply(phi);
            double res = 0.0;
            for (int i = 0; i < g.size(); ++i)
                if (g.interior[i]) res = std::max(res, std::abs(F[i] - hi * phi[i]));
            out.residual_norm = res / hi;
            return out;
        }
        mu_prev = hi;
    }
    throw ConvergenceError("inverse iteration did not settle within max_iter", phi);
}

EigenBounds verify_eigen_bounds(const EigenPair& pair) {
    const Grid& g = *pair.phi.grid;
    EigenBounds b;
    b.C_low = std::numeric_limits<double>::infinity();
    b.hopf_c = std::numeric_limits<double>::infinity();
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) dmin = std::min(dmin, g.delta[i]);
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) continue;
        const double q = pair.phi[i] / g.delta[i];
        b.C_low = std::min(b.C_low, q);
        b.C_high = std::max(b.C_high, q);
        if (g.delta[i] <= dmin * (1.0 + 1e-9)) b.hopf_c = std::min(b.hopf_c, q);
    }
    return b;
}

}  // namespace sel
