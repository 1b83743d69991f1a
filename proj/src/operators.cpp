#include "sel/operators.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sel {

Eigen::Matrix2d pucci_policy(const Eigen::Matrix2d& M, double lambda, double Lambda, PucciSign sign) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(M);
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    for (int i = 0; i < 2; ++i) {
        const Eigen::Vector2d e = es.eigenvectors().col(i);
        A += pucci_policy(es.eigenvalues()[i], lambda, Lambda, sign) * e * e.transpose();
    }
    return A;
}

double pucci_policy(double m, double lambda, double Lambda, PucciSign sign) {
    if (sign == PucciSign::plus) return m > 0.0 ? lambda : Lambda;
    return m > 0.0 ? Lambda : lambda;
}

void OperatorSpec::validate() const {
    if (!(lambda > 0.0) || !(Lambda >= lambda))
        throw PreconditionError("operator needs 0 < lambda <= Lambda");
    if (!(Gamma >= 0.0) || !(gamma >= 0.0))
        throw PreconditionError("operator needs Gamma >= 0 and gamma >= 0");
}

void OperatorSpec::validate_on(const Grid& grid) const {
    validate();
    for (int i = 0; i < grid.size(); ++i) {
        const Eigen::Vector2d x = grid.point(i);
        if (drift && drift(x).norm() > Gamma * (1.0 + 1e-12))
            throw PreconditionError("drift exceeds Gamma at node " + std::to_string(i));
        const double cv = c(x);
        if (cv < 0.0 || cv > gamma * (1.0 + 1e-12))
            throw PreconditionError("zeroth-order coefficient leaves [0, gamma] at node " + std::to_string(i));
    }
}

double evaluate_F(const OperatorSpec& spec, const HessianData& h) {
    const int d = static_cast<int>(h.matrix.rows());
    double v = pucci(spec, h.matrix);
    const Eigen::Vector2d b = spec.b(h.location);
    for (int k = 0; k < d && k < h.gradient.size(); ++k) v += b[k] * h.gradient[k];
    return v + spec.c(h.location) * h.value;
}

DiscreteOperator::DiscreteOperator(OperatorSpec spec, GridPtr grid)
    : spec_(std::move(spec)), grid_(std::move(grid)) {
    spec_.validate_on(*grid_);
    switch (grid_->domain.kind) {
        case DomainKind::interval: build_interval(); break;
        case DomainKind::rectangle: build_rectangle(); break;
        case DomainKind::disk: build_disk(); break;
    }
    for (auto& s : st_) {
        const Eigen::Vector2d x = grid_->point(s.node);
        s.b = spec_.b(x);
        s.c = spec_.c(x);
    }
}

namespace {

void second_diff(StencilRow& row, int im, int i0, int ip, double hm, double hp) {
    if (!(hm > 0.0) || !(hp > 0.0)) throw ResolutionError("zero spacing next to node " + std::to_string(i0));
    const double s = hm + hp;
    row.add(im, 2.0 / (hm * s));
    row.add(ip, 2.0 / (hp * s));
    row.add(i0, -2.0 / (hm * s) - 2.0 / (hp * s));
}

void central_diff(StencilRow& row, int im, int i0, int ip, double hm, double hp) {
    const double s = hm + hp;
    row.add(im, -hp / (hm * s));
    row.add(i0, (hp - hm) / (hm * hp));
    row.add(ip, hm / (hp * s));
}

void one_sided(StencilRow& fwd, StencilRow& bwd, int im, int i0, int ip, double hm, double hp) {
    fwd.add(ip, 1.0 / hp);
    fwd.add(i0, -1.0 / hp);
    bwd.add(i0, 1.0 / hm);
    bwd.add(im, -1.0 / hm);
}

}  // namespace

void DiscreteOperator::build_interval() {
    const auto& x = grid_->axis0;
    const int n = grid_->n;
    for (int i = 1; i < n - 1; ++i) {
        NodeStencil s;
        s.node = i;
        const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        second_diff(s.hess[0], i - 1, i, i + 1, hm, hp);
        s.ndir = 1;
        s.dir[0] = {1.0, 0.0};
        one_sided(s.fwd[0], s.bwd[0], i - 1, i, i + 1, hm, hp);
        st_.push_back(std::move(s));
    }
}

void DiscreteOperator::build_rectangle() {
    const auto& x = grid_->axis0;
    const auto& y = grid_->axis1;
    const int n = grid_->n;
    auto id = [n](int i, int j) { return i * n + j; };
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            NodeStencil s;
            s.node = id(i, j);
            const double hxm = x[i] - x[i - 1], hxp = x[i + 1] - x[i];
            const double hym = y[j] - y[j - 1], hyp = y[j + 1] - y[j];
            second_diff(s.hess[0], id(i - 1, j), id(i, j), id(i + 1, j), hxm, hxp);
            second_diff(s.hess[1], id(i, j - 1), id(i, j), id(i, j + 1), hym, hyp);
            const double w = 1.0 / ((hxm + hxp) * (hym + hyp));
            s.hess[2].add(id(i + 1, j + 1), w);
            s.hess[2].add(id(i + 1, j - 1), -w);
            s.hess[2].add(id(i - 1, j + 1), -w);
            s.hess[2].add(id(i - 1, j - 1), w);
            s.ndir = 2;
            s.dir[0] = {1.0, 0.0};
            s.dir[1] = {0.0, 1.0};
            one_sided(s.fwd[0], s.bwd[0], id(i - 1, j), id(i, j), id(i + 1, j), hxm, hxp);
            one_sided(s.fwd[1], s.bwd[1], id(i, j - 1), id(i, j), id(i, j + 1), hym, hyp);
            st_.push_back(std::move(s));
        }
}

void DiscreteOperator::build_disk() {
    const auto& r = grid_->axis0;
    const auto& th = grid_->axis1;
    const int n = grid_->n, N = grid_->n_theta;
    const double dth = 2.0 * std::numbers::pi / N;
    auto id = [N](int k, int j) { return k == 0 ? 0 : 1 + (k - 1) * N + ((j % N) + N) % N; };

    {
        // Centre: quadratic Fourier fit on the first ring.
        NodeStencil s;
        s.node = 0;
        const double r1 = r[1];
        if (!(r1 > 0.0)) throw ResolutionError("first ring of the disk has zero radius");
        for (int j = 0; j < N; ++j) {
            const double c = std::cos(th[j]), sn = std::sin(th[j]);
            const double c2 = std::cos(2 * th[j]), s2 = std::sin(2 * th[j]);
            const double tr = 4.0 / (N * r1 * r1);
            const double dif = 8.0 / (N * r1 * r1) * c2;
            const double hxx = 0.5 * (tr + dif), hyy = 0.5 * (tr - dif);
            const double hxy = 4.0 / (N * r1 * r1) * s2;
            s.hess[0].add(id(1, j), hxx);
            s.hess[1].add(id(1, j), hyy);
            s.hess[2].add(id(1, j), hxy);
            s.fwd[0].add(id(1, j), 2.0 * c / (N * r1));
            s.fwd[1].add(id(1, j), 2.0 * sn / (N * r1));
        }
        // Each row annihilates constants: subtract the centre value.
        for (int k = 0; k < 3; ++k) {
            double tot = 0.0;
            for (auto& [j, w] : s.hess[k].terms) tot += w;
            s.hess[k].add(0, -tot);
        }
        for (int k = 0; k < 2; ++k) {
            double tot = 0.0;
            for (auto& [j, w] : s.fwd[k].terms) tot += w;
            s.fwd[k].add(0, -tot);
            s.bwd[k] = s.fwd[k];
        }
        s.ndir = 2;
        s.dir[0] = {1.0, 0.0};
        s.dir[1] = {0.0, 1.0};
        st_.push_back(std::move(s));
    }

    for (int k = 1; k < n - 1; ++k)
        for (int j = 0; j < N; ++j) {
            NodeStencil s;
            s.node = id(k, j);
            const double rr = r[k];
            const double hm = r[k] - r[k - 1], hp = r[k + 1] - r[k];
            StencilRow urr, ur, uth, uthth, urth;
            second_diff(urr, id(k - 1, j), id(k, j), id(k + 1, j), hm, hp);
            central_diff(ur, id(k - 1, j), id(k, j), id(k + 1, j), hm, hp);
            uth.add(id(k, j + 1), 0.5 / dth);
            uth.add(id(k, j - 1), -0.5 / dth);
            uthth.add(id(k, j + 1), 1.0 / (dth * dth));
            uthth.add(id(k, j - 1), 1.0 / (dth * dth));
            uthth.add(id(k, j), -2.0 / (dth * dth));
            const double wm = 1.0 / ((hm + hp) * 2.0 * dth);
            urth.add(id(k + 1, j + 1), wm);
            urth.add(id(k + 1, j - 1), -wm);
            urth.add(id(k - 1, j + 1), -wm);
            urth.add(id(k - 1, j - 1), wm);

            const double c = std::cos(th[j]), sn = std::sin(th[j]);
            // T = u_r/r + u_thth/r^2, C = u_rth/r - u_th/r^2
            auto emit = [&](StencilRow& out, double a_rr, double a_T, double a_C) {
                for (auto [m, w] : urr.terms) out.add(m, a_rr * w);
                for (auto [m, w] : ur.terms) out.add(m, a_T * w / rr);
                for (auto [m, w] : uthth.terms) out.add(m, a_T * w / (rr * rr));
                for (auto [m, w] : urth.terms) out.add(m, a_C * w / rr);
                for (auto [m, w] : uth.terms) out.add(m, -a_C * w / (rr * rr));
            };
            emit(s.hess[0], c * c, sn * sn, -2.0 * c * sn);
            emit(s.hess[1], sn * sn, c * c, 2.0 * c * sn);
            emit(s.hess[2], c * sn, -c * sn, c * c - sn * sn);

            s.ndir = 2;
            s.dir[0] = {c, sn};
            s.dir[1] = {-sn, c};
            one_sided(s.fwd[0], s.bwd[0], id(k - 1, j), id(k, j), id(k + 1, j), hm, hp);
            s.fwd[1].add(id(k, j + 1), 1.0 / (rr * dth));
            s.fwd[1].add(id(k, j), -1.0 / (rr * dth));
            s.bwd[1].add(id(k, j), 1.0 / (rr * dth));
            s.bwd[1].add(id(k, j - 1), -1.0 / (rr * dth));
            st_.push_back(std::move(s));
        }
}

Eigen::Matrix2d DiscreteOperator::hessian(const NodeStencil& s, const Eigen::VectorXd& u) const {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    H(0, 0) = s.hess[0].apply(u);
    if (grid_->dim() == 2) {
        H(1, 1) = s.hess[1].apply(u);
        H(0, 1) = H(1, 0) = s.hess[2].apply(u);
    }
    return H;
}

double DiscreteOperator::gradient_term(const NodeStencil& s, const Eigen::VectorXd& u) const {
    double v = 0.0;
    for (int k = 0; k < s.ndir; ++k) {
        const double bk = s.b.dot(s.dir[k]);
        if (bk != 0.0) v += bk * (bk >= 0.0 ? s.bwd[k] : s.fwd[k]).apply(u);
    }
    return v;
}

HessianData DiscreteOperator::data(const NodeStencil& s, const Eigen::VectorXd& u) const {
    HessianData h;
    const int d = grid_->dim();
    const Eigen::Matrix2d H = hessian(s, u);
    h.matrix = H.topLeftCorner(d, d);
    h.gradient = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < s.ndir; ++k) {
        const double bk = s.b.dot(s.dir[k]);
        const double dk = (bk >= 0.0 ? s.bwd[k] : s.fwd[k]).apply(u);
        h.gradient += dk * s.dir[k].head(d);
    }
    h.value = u[s.node];
    h.location = grid_->point(s.node);
    return h;
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u) const {
    if (u.size() != grid_->size()) throw ContractViolation("grid function size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
    const bool two_d = grid_->dim() == 2;
    for (const auto& s : st_) {
        const Eigen::Matrix2d H = hessian(s, u);
        const double P = two_d ? pucci(spec_, H) : (spec_.sign == PucciSign::plus
                                                         ? pucci_plus(H(0, 0), spec_.lambda, spec_.Lambda)
                                                         : pucci_minus(H(0, 0), spec_.lambda, spec_.Lambda));
        out[s.node] = P + gradient_term(s, u) + s.c * u[s.node];
    }
    return out;
}

Eigen::SparseMatrix<double> DiscreteOperator::linearize(const Eigen::VectorXd& u) const {
    const int N = grid_->size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(st_.size() * 16 + N);
    for (int i = 0; i < N; ++i)
        if (!grid_->interior[i]) trip.emplace_back(i, i, 1.0);
    const bool two_d = grid_->dim() == 2;
    for (const auto& s : st_) {
        const int i = s.node;
        const Eigen::Matrix2d H = hessian(s, u);
        Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
        if (two_d)
            A = pucci_policy(H, spec_.lambda, spec_.Lambda, spec_.sign);
        else
            A(0, 0) = pucci_policy(H(0, 0), spec_.lambda, spec_.Lambda, spec_.sign);
        for (auto [j, w] : s.hess[0].terms) trip.emplace_back(i, j, -A(0, 0) * w);
        if (two_d) {
            for (auto [j, w] : s.hess[1].terms) trip.emplace_back(i, j, -A(1, 1) * w);
            for (auto [j, w] : s.hess[2].terms) trip.emplace_back(i, j, -2.0 * A(0, 1) * w);
        }
        for (int k = 0; k < s.ndir; ++k) {
            const double bk = s.b.dot(s.dir[k]);
            if (bk == 0.0) continue;
            for (auto [j, w] : (bk >= 0.0 ? s.bwd[k] : s.fwd[k]).terms) trip.emplace_back(i, j, bk * w);
        }
        if (s.c != 0.0) trip.emplace_back(i, i, s.c);
    }
    Eigen::SparseMatrix<double> L(N, N);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

GridFunction discretize(const OperatorSpec& spec, const GridFunction& u) {
    DiscreteOperator op(spec, u.grid);
    return GridFunction(u.grid, op.apply(u.values));
}

SumMarginReport check_subsolution_sum(const OperatorSpec& F, const OperatorSpec& F1, const OperatorSpec& F2,
                                      const GridFunction& u, const GridFunction& v,
                                      const GridFunction& f, const GridFunction& g) {
    require_same_grid(u, v);
    require_same_grid(u, f);
    require_same_grid(u, g);
    const Eigen::VectorXd w = u.values + v.values;
    const Eigen::VectorXd Fw = DiscreteOperator(F, u.grid).apply(w);
    const Eigen::VectorXd Fu = DiscreteOperator(F1, u.grid).apply(u.values);
    const Eigen::VectorXd Fv = DiscreteOperator(F2, u.grid).apply(v.values);
    SumMarginReport rep;
    rep.margin = GridFunction(u.grid, Fu + Fv - Fw);
    rep.sub_margin = GridFunction(u.grid, f.values + g.values - Fw);
    const auto& in = u.grid->interior;
    rep.min_margin = rep.min_sub_margin = std::numeric_limits<double>::infinity();
    rep.max_margin = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < u.size(); ++i) {
        if (!in[i]) {
            rep.margin[i] = rep.sub_margin[i] = 0.0;
            continue;
        }
        rep.min_margin = std::min(rep.min_margin, rep.margin[i]);
        rep.max_margin = std::max(rep.max_margin, rep.margin[i]);
        rep.min_sub_margin = std::min(rep.min_sub_margin, rep.sub_margin[i]);
    }
    return rep;
}

}  // namespace sel
