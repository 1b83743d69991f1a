#include "sel/system_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sel/errors.hpp"

namespace sel {

namespace {

ConeShape shape_first_case(const ExponentQuad& x, Subcase sc) {
    ConeShape sh;
    sh.subcase = sc;
    const double rho = (2.0 - x.r) / (1.0 + x.s);
    switch (sc) {
        case Subcase::I:
            sh.v_lo = sh.v_hi = rho;
            break;
        case Subcase::II:
            sh.a = 0.5 * (1.0 / std::exp(1.0) + 1.0);
            sh.v_hi = 1.0 - sh.a;
            break;
        case Subcase::III:
            break;
        case Subcase::IV:
            // II with the roles of u and v exchanged
            sh.a = 0.5 * (1.0 / std::exp(1.0) + 1.0);
            sh.u_hi = 1.0 - sh.a;
            break;
        case Subcase::V: {
            const double lo = std::max(0.0, (1.0 - x.s) / x.r);
            sh.a = 0.5 * (lo + 1.0);
            sh.u_hi = sh.a;
            sh.v_lo = (2.0 - sh.a * x.r) / (1.0 + x.s);
            sh.v_hi = rho;
            break;
        }
        case Subcase::VI:
            sh.a = 0.5;
            sh.u_hi = sh.v_hi = 1.0 - sh.a;
            break;
        case Subcase::case3:
            break;
    }
    return sh;
}

double interior_min(const Grid& g, const Eigen::VectorXd& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) m = std::min(m, f[i]);
    return m;
}

double interior_max(const Grid& g, const Eigen::VectorXd& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) m = std::max(m, f[i]);
    return m;
}

Eigen::VectorXd envelope_field(const Grid& g, const Envelope& e) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) f[i] = e(g.delta[i]);
    return f;
}

// Solve F(w) = k w^-p, warm-started at the singular stage when a positive
// iterate is at hand, with the full continuation as fallback.
Eigen::VectorXd scalar_solve(const DiscreteOperator& op, double p, const Eigen::VectorXd& k,
                             const Eigen::VectorXd& warm, const SolverOptions& base) {
    if (p > 0.0) {
        SolverOptions o = base;
        o.initial = warm;
        o.eps0 = 0.0;
        try {
            return solve_scalar_weighted(op, p, k, o).u.values;
        } catch (const SolverError&) {
        }
    }
    SolverOptions o = base;
    if (p == 0.0) o.initial = warm;
    return solve_scalar_weighted(op, p, k, o).u.values;
}

double log_sup_distance(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double d = 0.0;
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i]) d = std::max(d, std::abs(std::log(a[i]) - std::log(b[i])));
    return d;
}

}  // namespace

double Envelope::operator()(double delta) const {
    if (delta <= 0.0) return 0.0;
    double v = coef * std::pow(delta, pow);
    if (lpow != 0.0) v *= std::pow(std::log(A / delta), lpow);
    return v;
}

bool ConeSpec::contains(const GridFunction& u, const GridFunction& v, double slack) const {
    const Grid& g = *u.grid;
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) continue;
        const double d = g.delta[i];
        if (u[i] < u_lower(d) * (1.0 - slack) || u[i] > u_upper(d) * (1.0 + slack)) return false;
        if (v[i] < v_lower(d) * (1.0 - slack) || v[i] > v_upper(d) * (1.0 + slack)) return false;
    }
    return true;
}

ConeShape cone_shape(const ExponentQuad& quad) {
    const RegimeReport rep = classify(quad);
    if (!rep.existence)
        throw UnsupportedRegime("no existence case holds for (p,q,r,s); no invariant cone is available");
    switch (*rep.existence) {
        case ExistenceCase::E1:
            if (!rep.subcase_u) throw UnsupportedRegime("first existence case without a matching subcase");
            return shape_first_case(quad, *rep.subcase_u);
        case ExistenceCase::E2: {
            if (!rep.subcase_v) throw UnsupportedRegime("second existence case without a matching subcase");
            ConeShape sh = shape_first_case(quad.swapped(), *rep.subcase_v);
            std::swap(sh.u_lo, sh.v_lo);
            std::swap(sh.u_hi, sh.v_hi);
            sh.mirrored = true;
            return sh;
        }
        case ExistenceCase::E3: {
            ConeShape sh;
            sh.subcase = Subcase::case3;
            const double det = quad.det();
            sh.u_lo = sh.u_hi = 2.0 * (1.0 + quad.s - quad.q) / det;
            sh.v_lo = sh.v_hi = 2.0 * (1.0 + quad.p - quad.r) / det;
            sh.a = sh.u_lo;
            return sh;
        }
    }
    throw UnsupportedRegime("unknown existence case");
}

ConeConstants choose_cone_constants(double c1, double c2, const ExponentQuad& x) {
    if (!(c1 > 0.0 && c1 < 1.0 && c2 > 1.0 && c1 < c2))
        throw PreconditionError("cone constants need 0 < c1 < 1 < c2");
    const double det = x.det();
    if (!(det > 0.0)) throw Infeasible("cone constants need (1+p)(1+s) - qr > 0");
    const double eta = x.q / (1.0 + x.p), kap = x.r / (1.0 + x.s);
    const double l1 = std::log(c1), L2 = std::log(c2);
    const double sigma = L2 - l1;
    const double one = 1.0 - eta * kap;  // det / ((1+p)(1+s))
    // Each pair of inequalities is met with the same slack sigma.
    const double X1 = (L2 - eta * l1 + sigma * (1.0 + eta)) / one;
    const double x2 = l1 - sigma - kap * X1;
    const double X2 = (L2 - kap * l1 + sigma * (1.0 + kap)) / one;
    const double x1 = l1 - sigma - eta * X2;
    ConeConstants k{std::exp(x1), std::exp(X1), std::exp(x2), std::exp(X2), 0.0};
    k.margin = sigma / (1.0 + std::max(std::abs(X1) + std::abs(x2), std::abs(X2) + std::abs(x1)));
    const double viol = cone_constant_violation(k, c1, c2, x);
    if (!(viol <= 1e-9 * (1.0 + sigma)))
        throw Infeasible("cone constants fail their own check by " + std::to_string(viol));
    if (!(k.m1 < 1.0 && k.m2 < 1.0 && k.M1 > 1.0 && k.M2 > 1.0))
        throw Infeasible("cone constants left the range m < 1 < M");
    return k;
}

double cone_constant_violation(const ConeConstants& k, double c1, double c2, const ExponentQuad& x) {
    const double eta = x.q / (1.0 + x.p), kap = x.r / (1.0 + x.s);
    const double l1 = std::log(c1), L2 = std::log(c2);
    const double x1 = std::log(k.m1), X1 = std::log(k.M1), x2 = std::log(k.m2), X2 = std::log(k.M2);
    return std::max({kap * X1 + x2 - l1, L2 - X1 - eta * x2, eta * X2 + x1 - l1, L2 - X2 - kap * x1});
}

std::pair<double, double> prototype_constants(const OperatorSpec& spec, const GridPtr& grid,
                                              const ExponentQuad& x, const ConeShape& sh,
                                              const SolverOptions& opts) {
    const Grid& g = *grid;
    auto solve = [&](double p, double qw) {
        return solve_scalar_singular(spec, grid, p, WeightSpec::power(qw), opts).u.values;
    };
    auto ratio = [&](const Eigen::VectorXd& w, double pow) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
        for (int i = 0; i < g.size(); ++i)
            if (g.interior[i]) f[i] = w[i] / std::pow(g.delta[i], pow);
        return f;
    };
    // The upper envelope of u is fed by the lower envelope of v and so on.
    const Eigen::VectorXd u_hi = solve(x.p, x.q * sh.v_lo);
    const Eigen::VectorXd u_lo = sh.v_hi == sh.v_lo ? u_hi : solve(x.p, x.q * sh.v_hi);
    const Eigen::VectorXd v_hi = solve(x.s, x.r * sh.u_lo);
    const Eigen::VectorXd v_lo = sh.u_hi == sh.u_lo ? v_hi : solve(x.s, x.r * sh.u_hi);
    double c1 = std::min(interior_min(g, ratio(u_lo, sh.u_lo)), interior_min(g, ratio(v_lo, sh.v_lo)));
    double c2 = std::max(interior_max(g, ratio(u_hi, sh.u_hi)), interior_max(g, ratio(v_hi, sh.v_hi)));
    c1 = std::min(c1, 0.5);
    c2 = std::max(c2, 2.0);
    return {c1, c2};
}

ConeSpec cone_for_regime(const ExponentQuad& x, double c1, double c2, const GridPtr& grid, double A) {
    const Grid& g = *grid;
    ConeSpec cone;
    cone.shape = cone_shape(x);
    cone.c1 = c1;
    cone.c2 = c2;
    cone.k = choose_cone_constants(c1, c2, x);
    const auto& sh = cone.shape;
    cone.u_lower = {cone.k.m1, sh.u_lo, 0.0, A};
    cone.u_upper = {cone.k.M1, sh.u_hi, 0.0, A};
    cone.v_lower = {cone.k.m2, sh.v_lo, 0.0, A};
    cone.v_upper = {cone.k.M2, sh.v_hi, 0.0, A};

    const double diam = g.domain.diameter();
    if (sh.subcase == Subcase::II || sh.subcase == Subcase::IV) {
        // The borderline component carries log^(1/(1+e))(A/delta) under
        // delta^-a; the check is reported, the envelopes do not depend on A.
        const bool on_v = (sh.subcase == Subcase::II) != sh.mirrored;
        const double e = on_v ? x.s : x.p;
        bool ok = true;
        for (int i = 0; i < g.size(); ++i)
            if (g.interior[i] && std::pow(std::log(A / g.delta[i]), 1.0 / (1.0 + e)) > std::pow(g.delta[i], -sh.a))
                ok = false;
        if (!ok) cone.notes.push_back("log^(1/(1+s))(A/delta) <= delta^-a fails on this grid for A = " + std::to_string(A));
    }
    if (sh.subcase == Subcase::V) {
        const ExponentQuad y = sh.mirrored ? x.swapped() : x;
        const double M_u = sh.mirrored ? cone.k.M2 : cone.k.M1, m_u = sh.mirrored ? cone.k.m2 : cone.k.m1;
        const double M_v = sh.mirrored ? cone.k.M1 : cone.k.M2, m_v = sh.mirrored ? cone.k.m1 : cone.k.m2;
        if (!(m_u * std::pow(diam, 1.0 - sh.a) < M_u) || !(m_v * std::pow(diam, y.r * (1.0 - sh.a) / (1.0 + y.s)) < M_v))
            cone.notes.push_back("subcase V diameter conditions on the constants fail");
    }
    if (sh.subcase == Subcase::VI) {
        if (!(cone.k.m1 * std::pow(diam, sh.a) < cone.k.M1) || !(cone.k.m2 * std::pow(diam, sh.a) < cone.k.M2))
            cone.notes.push_back("subcase VI diameter conditions on the constants fail");
    }
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) continue;
        const double d = g.delta[i];
        if (cone.u_lower(d) > cone.u_upper(d) || cone.v_lower(d) > cone.v_upper(d)) {
            cone.notes.push_back("lower envelope exceeds upper envelope somewhere on the grid");
            break;
        }
    }
    return cone;
}

ConeSpec build_cone(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& quad,
                    const SolverOptions& opts) {
    const ConeShape sh = cone_shape(quad);
    const auto [c1, c2] = prototype_constants(spec, grid, quad, sh, opts);
    return cone_for_regime(quad, c1, c2, grid);
}

bool SystemResult::all_in_cone() const {
    return std::all_of(stayed_in_cone.begin(), stayed_in_cone.end(), [](char c) { return c != 0; });
}

SystemResidual system_residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& v,
                               const ExponentQuad& x) {
    require_same_grid(u, v);
    const Grid& g = *u.grid;
    for (int i = 0; i < g.size(); ++i)
        if (g.interior[i] && !(u[i] > 0.0 && v[i] > 0.0))
            throw PositivityBreach("system residual needs u, v > 0 at interior nodes", u.values, i);
    const DiscreteOperator op(spec, u.grid);
    const Eigen::VectorXd Fu = op.apply(u.values), Fv = op.apply(v.values);
    const double w = std::min(x.q, x.r);
    SystemResidual r;
    for (int i = 0; i < g.size(); ++i) {
        if (!g.interior[i]) continue;
        const double ru = std::abs(Fu[i] - std::pow(u[i], -x.p) * std::pow(v[i], -x.q));
        const double rv = std::abs(Fv[i] - std::pow(u[i], -x.r) * std::pow(v[i], -x.s));
        const double dw = std::pow(g.delta[i], w);
        r.raw_u = std::max(r.raw_u, ru);
        r.raw_v = std::max(r.raw_v, rv);
        r.u = std::max(r.u, dw * ru);
        r.v = std::max(r.v, dw * rv);
    }
    return r;
}

SystemResult picard_iterate(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& x,
                            const ConeSpec& cone, const PicardOptions& opts) {
    x.validate();
    const Grid& g = *grid;
    const int N = g.size();
    const DiscreteOperator op(spec, grid);
    const Eigen::VectorXd ul = envelope_field(g, cone.u_lower), uh = envelope_field(g, cone.u_upper);
    const Eigen::VectorXd vl = envelope_field(g, cone.v_lower), vh = envelope_field(g, cone.v_upper);

    Eigen::VectorXd u = opts.u0 ? *opts.u0 : Eigen::VectorXd(ul.cwiseProduct(uh).cwiseSqrt());
    Eigen::VectorXd v = opts.v0 ? *opts.v0 : Eigen::VectorXd(vl.cwiseProduct(vh).cwiseSqrt());
    if (u.size() != N || v.size() != N) throw ContractViolation("Picard start has the wrong size");
    for (int i = 0; i < N; ++i) {
        if (!g.interior[i]) {
            u[i] = v[i] = 0.0;
        } else if (!(u[i] > 0.0 && v[i] > 0.0)) {
            throw PreconditionError("Picard start must be positive at interior nodes");
        }
    }

    SystemResult res;
    if (opts.keep_history) {
        res.history_u.push_back(u);
        res.history_v.push_back(v);
    }
    Eigen::VectorXd k(N);
    for (int it = 1; it <= opts.max_iter; ++it) {
        k.setZero();
        for (int i = 0; i < N; ++i)
            if (g.interior[i]) k[i] = std::pow(v[i], -x.q);
        Eigen::VectorXd un = scalar_solve(op, x.p, k, u, opts.scalar);
        k.setZero();
        for (int i = 0; i < N; ++i)
            if (g.interior[i]) k[i] = std::pow(un[i], -x.r);
        Eigen::VectorXd vn = scalar_solve(op, x.s, k, v, opts.scalar);

        if (opts.clamp) {
            for (int i = 0; i < N; ++i) {
                if (!g.interior[i]) continue;
                un[i] = std::clamp(un[i], ul[i], uh[i]);
                vn[i] = std::clamp(vn[i], vl[i], vh[i]);
            }
        }
        const double change =
            std::max((un - u).lpNorm<Eigen::Infinity>(), (vn - v).lpNorm<Eigen::Infinity>());
        u = std::move(un);
        v = std::move(vn);
        res.picard_iterations = it;
        res.changes.push_back(change);
        res.stayed_in_cone.push_back(cone.contains(GridFunction(grid, u), GridFunction(grid, v)));
        if (opts.keep_history) {
            res.history_u.push_back(u);
            res.history_v.push_back(v);
        }
        if (change < opts.tol) {
            res.u = GridFunction(grid, u);
            res.v = GridFunction(grid, v);
            const SystemResidual r = system_residual(spec, res.u, res.v, x);
            res.residual_u = r.u;
            res.residual_v = r.v;
            res.raw_residual_u = r.raw_u;
            res.raw_residual_v = r.raw_v;
            return res;
        }
    }
    throw ConvergenceError("Picard iteration did not settle within max_iter", u);
}

UniquenessReport uniqueness_probe(const OperatorSpec& spec, const GridPtr& grid, const ExponentQuad& x,
                                  const ConeSpec& cone, const PicardOptions& opts) {
    if (!classify(x).unique)
        throw PreconditionError("uniqueness probe needs p+q < 1, r < 2 or r+s < 1, q < 2 with det > 0");
    const Grid& g = *grid;
    const Eigen::VectorXd ul = envelope_field(g, cone.u_lower), uh = envelope_field(g, cone.u_upper);
    const Eigen::VectorXd vl = envelope_field(g, cone.v_lower), vh = envelope_field(g, cone.v_upper);
    // Geometric points a quarter and three quarters of the way through the cone.
    auto blend = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double t) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(g.size());
        for (int i = 0; i < g.size(); ++i)
            if (g.interior[i]) f[i] = std::pow(lo[i], 1.0 - t) * std::pow(hi[i], t);
        return f;
    };
    PicardOptions oa = opts, ob = opts;
    oa.keep_history = ob.keep_history = true;
    if (!opts.u0) {
        oa.u0 = blend(ul, uh, 0.25);
        oa.v0 = blend(vl, vh, 0.25);
        ob.u0 = blend(ul, uh, 0.75);
        ob.v0 = blend(vl, vh, 0.75);
    }
    const SystemResult a = picard_iterate(spec, grid, x, cone, oa);
    const SystemResult b = picard_iterate(spec, grid, x, cone, ob);

    UniquenessReport rep;
    rep.iterations_a = a.picard_iterations;
    rep.iterations_b = b.picard_iterations;
    rep.predicted = x.q * x.r / ((1.0 + x.p) * (1.0 + x.s));
    rep.distance = std::max((a.u.values - b.u.values).lpNorm<Eigen::Infinity>(),
                            (a.v.values - b.v.values).lpNorm<Eigen::Infinity>());
    const std::size_t n = std::max(a.history_u.size(), b.history_u.size());
    std::vector<double> du, dv;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& ua = a.history_u[std::min(k, a.history_u.size() - 1)];
        const auto& ub = b.history_u[std::min(k, b.history_u.size() - 1)];
        const auto& va = a.history_v[std::min(k, a.history_v.size() - 1)];
        const auto& vb = b.history_v[std::min(k, b.history_v.size() - 1)];
        du.push_back(log_sup_distance(g, ua, ub));
        dv.push_back(log_sup_distance(g, va, vb));
        rep.log_distances.push_back(std::max(du.back(), dv.back()));
    }
    // The first sweep only forgets the starting point; below 1e-7 the
    // distances are dominated by the scalar solver tolerance.
    constexpr double floor = 1e-7;
    for (std::size_t k = 2; k < n; ++k) {
        double ratio = 0.0;
        bool any = false;
        if (du[k - 1] > floor) {
            ratio = std::max(ratio, du[k] / du[k - 1]);
            any = true;
        }
        if (dv[k - 1] > floor) {
            ratio = std::max(ratio, dv[k] / dv[k - 1]);
            any = true;
        }
        if (any) rep.ratios.push_back(ratio);
    }
    rep.contraction = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
    return rep;
}

}  // namespace sel
