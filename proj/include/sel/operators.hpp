#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "sel/errors.hpp"
#include "sel/geometry.hpp"

namespace sel {

namespace detail {

template <class Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& M) {
    using std::abs;
    using Scalar = typename Derived::Scalar;
    if (M.rows() != M.cols()) throw ContractViolation("Pucci operators need a square matrix");
    const Scalar scale = M.cwiseAbs().maxCoeff();
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * (Scalar(1) + scale))
        throw ContractViolation("Pucci operators need a symmetric matrix");
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sym_eigenvalues(const Eigen::MatrixBase<Derived>& M) {
    using Scalar = typename Derived::Scalar;
    using std::sqrt;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ev(M.rows());
    if (M.rows() == 1) {
        ev[0] = M(0, 0);
    } else if (M.rows() == 2) {
        const Scalar m = (M(0, 0) + M(1, 1)) / Scalar(2);
        const Scalar d = (M(0, 0) - M(1, 1)) / Scalar(2);
        const Scalar rad = sqrt(d * d + M(0, 1) * M(0, 1));
        ev << m - rad, m + rad;
    } else {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A = M;
        ev = Eigen::SelfAdjointEigenSolver<decltype(A)>(A, Eigen::EigenvaluesOnly).eigenvalues();
    }
    return ev;
}

}  // namespace detail

// sup over A with spectrum in [lambda, Lambda] of -Tr(AM).
template <class Derived>
typename Derived::Scalar pucci_plus(const Eigen::MatrixBase<Derived>& M,
                                    typename Derived::Scalar lambda,
                                    typename Derived::Scalar Lambda) {
    using Scalar = typename Derived::Scalar;
    detail::require_symmetric(M);
    const auto ev = detail::sym_eigenvalues(M);
    Scalar pos(0), neg(0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) (ev[i] > Scalar(0) ? pos : neg) += ev[i];
    return -lambda * pos - Lambda * neg;
}

template <class Derived>
typename Derived::Scalar pucci_minus(const Eigen::MatrixBase<Derived>& M,
                                     typename Derived::Scalar lambda,
                                     typename Derived::Scalar Lambda) {
    using Scalar = typename Derived::Scalar;
    detail::require_symmetric(M);
    const auto ev = detail::sym_eigenvalues(M);
    Scalar pos(0), neg(0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) (ev[i] > Scalar(0) ? pos : neg) += ev[i];
    return -Lambda * pos - lambda * neg;
}

template <class Scalar>
Scalar pucci_plus(Scalar m, Scalar lambda, Scalar Lambda) {
    return m > Scalar(0) ? -lambda * m : -Lambda * m;
}

template <class Scalar>
Scalar pucci_minus(Scalar m, Scalar lambda, Scalar Lambda) {
    return m > Scalar(0) ? -Lambda * m : -lambda * m;
}

enum class PucciSign { plus, minus };

// The coefficient matrix that attains the extremum, so that the operator value
// equals -Tr(A M). Used as the policy in Newton/Howard iterations.
Eigen::Matrix2d pucci_policy(const Eigen::Matrix2d& M, double lambda, double Lambda, PucciSign sign);
double pucci_policy(double m, double lambda, double Lambda, PucciSign sign);

// F(M, p, r, x) = P(M) + b(x).p + c(x) r with 0 <= c <= gamma and |b| <= Gamma.
struct OperatorSpec {
    double lambda = 1.0;
    double Lambda = 1.0;
    PucciSign sign = PucciSign::plus;
    double Gamma = 0.0;
    double gamma = 0.0;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> drift;  // empty means zero
    std::function<double(const Eigen::Vector2d&)> zeroth;           // empty means zero

    static OperatorSpec laplacian() { return {}; }
    static OperatorSpec pucci(PucciSign s, double lambda, double Lambda) {
        OperatorSpec o;
        o.sign = s;
        o.lambda = lambda;
        o.Lambda = Lambda;
        return o;
    }

    Eigen::Vector2d b(const Eigen::Vector2d& x) const {
        return drift ? drift(x) : Eigen::Vector2d::Zero();
    }
    double c(const Eigen::Vector2d& x) const { return zeroth ? zeroth(x) : 0.0; }

    // Convexity in (M, p, r) is recorded but never exercised: P+ is a sup of
    // linear maps, P- is not convex.
    bool convex() const { return sign == PucciSign::plus; }

    void validate() const;
    void validate_on(const Grid& grid) const;
};

template <class Derived>
double pucci(const OperatorSpec& spec, const Eigen::MatrixBase<Derived>& M) {
    return spec.sign == PucciSign::plus ? pucci_plus(M, spec.lambda, spec.Lambda)
                                        : pucci_minus(M, spec.lambda, spec.Lambda);
}

struct HessianData {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd gradient;
    double value = 0.0;
    Eigen::Vector2d location = Eigen::Vector2d::Zero();
};

double evaluate_F(const OperatorSpec& spec, const HessianData& h);

// Sparse linear combination of nodal values.
struct StencilRow {
    std::vector<std::pair<int, double>> terms;
    double apply(const Eigen::VectorXd& u) const {
        double s = 0.0;
        for (auto [j, w] : terms) s += w * u[j];
        return s;
    }
    void add(int j, double w) { terms.emplace_back(j, w); }
};

struct NodeStencil {
    int node = -1;
    StencilRow hess[3];  // xx, yy, xy; 1D uses xx only
    int ndir = 0;
    Eigen::Vector2d dir[2];
    StencilRow fwd[2], bwd[2];
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    double c = 0.0;
};

// Monotone finite differences on the grid: nonuniform three-point second
// differences, a diagonal mixed difference in 2D, polar stencils on the disk
// with a Fourier fit at the centre, and drift-upwinded first differences.
class DiscreteOperator {
public:
    DiscreteOperator(OperatorSpec spec, GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const OperatorSpec& spec() const { return spec_; }
    const std::vector<NodeStencil>& stencils() const { return st_; }

    Eigen::Matrix2d hessian(const NodeStencil& s, const Eigen::VectorXd& u) const;
    double gradient_term(const NodeStencil& s, const Eigen::VectorXd& u) const;
    HessianData data(const NodeStencil& s, const Eigen::VectorXd& u) const;

    // F at interior nodes, zero at boundary nodes.
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

    // Rows of the frozen-policy linear map for interior nodes (boundary rows
    // are identity), so that L*u reproduces apply(u) at interior nodes.
    Eigen::SparseMatrix<double> linearize(const Eigen::VectorXd& u) const;

private:
    void build_interval();
    void build_rectangle();
    void build_disk();

    OperatorSpec spec_;
    GridPtr grid_;
    std::vector<NodeStencil> st_;
};

GridFunction discretize(const OperatorSpec& spec, const GridFunction& u);

struct SumMarginReport {
    GridFunction margin;      // F1(u) + F2(v) - F(u+v), interior nodes
    double min_margin = 0.0;
    double max_margin = 0.0;
    GridFunction sub_margin;  // f + g - F(u+v)
    double min_sub_margin = 0.0;
};

SumMarginReport check_subsolution_sum(const OperatorSpec& F, const OperatorSpec& F1, const OperatorSpec& F2,
                                      const GridFunction& u, const GridFunction& v,
                                      const GridFunction& f, const GridFunction& g);

}  // namespace sel
