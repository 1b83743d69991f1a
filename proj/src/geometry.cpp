#include "sel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "sel/errors.hpp"

namespace sel {

Domain Domain::interval(double a, double b) {
    Domain d;
    d.kind = DomainKind::interval;
    d.lo = {a, 0.0};
    d.hi = {b, 0.0};
    d.validate();
    return d;
}

Domain Domain::rectangle(double x0, double x1, double y0, double y1) {
    Domain d;
    d.kind = DomainKind::rectangle;
    d.lo = {x0, y0};
    d.hi = {x1, y1};
    d.validate();
    return d;
}

Domain Domain::disk(double R) {
    Domain d;
    d.kind = DomainKind::disk;
    d.radius = R;
    d.validate();
    return d;
}

void Domain::validate() const {
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    switch (kind) {
        case DomainKind::interval:
            if (bad(hi.x() - lo.x())) throw DomainError("interval needs a < b");
            break;
        case DomainKind::rectangle:
            if (bad(hi.x() - lo.x()) || bad(hi.y() - lo.y()))
                throw DomainError("rectangle needs positive side lengths");
            break;
        case DomainKind::disk:
            if (bad(radius)) throw DomainError("disk needs a positive radius");
            break;
    }
}

double Domain::diameter() const {
    switch (kind) {
        case DomainKind::interval: return hi.x() - lo.x();
        case DomainKind::rectangle: return std::hypot(hi.x() - lo.x(), hi.y() - lo.y());
        case DomainKind::disk: return 2.0 * radius;
    }
    return 0.0;
}

std::string to_string(DomainKind k) {
    switch (k) {
        case DomainKind::interval: return "interval";
        case DomainKind::rectangle: return "rectangle";
        case DomainKind::disk: return "disk";
    }
    return "?";
}

double grading_map(double s, double strength) {
    if (strength == 0.0) return s;
    const double e = 1.0 + strength;
    if (s <= 0.5) return 0.5 * std::pow(2.0 * s, e);
    return 1.0 - 0.5 * std::pow(2.0 * (1.0 - s), e);
}

namespace {

std::vector<double> axis_nodes(double a, double b, int n, const Grading& g) {
    std::vector<double> x(n);
    const double L = b - a;
    const double k = g.kind == Grading::Kind::uniform ? 0.0 : g.strength;
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        if (k == 0.0) {
            x[i] = a + L * s;
        } else if (2 * i <= n - 1) {
            x[i] = a + L * 0.5 * std::pow(2.0 * s, 1.0 + k);
        } else {
            const double sr = static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
            x[i] = b - L * 0.5 * std::pow(2.0 * sr, 1.0 + k);
        }
    }
    x.front() = a;
    x.back() = b;
    for (int i = 1; i < n; ++i)
        if (!(x[i] > x[i - 1]))
            throw ResolutionError("graded axis lost strict monotonicity; lower the strength or n");
    return x;
}

}  // namespace

int Grid::interior_count() const {
    return static_cast<int>(std::count(interior.begin(), interior.end(), 1));
}

double Grid::min_spacing() const {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < axis0.size(); ++i) h = std::min(h, axis0[i] - axis0[i - 1]);
    if (domain.kind == DomainKind::rectangle)
        for (std::size_t i = 1; i < axis1.size(); ++i) h = std::min(h, axis1[i] - axis1[i - 1]);
    return h;
}

GridPtr build_grid(const Domain& domain, int n, Grading grading, int n_theta) {
    domain.validate();
    if (n < 8) throw ResolutionError("grid needs n >= 8 nodes per axis, got " + std::to_string(n));
    if (grading.kind == Grading::Kind::boundary_graded &&
        !(grading.strength >= 0.0 && grading.strength <= 4.0))
        throw DomainError("grading strength must lie in [0, 4]");

    auto g = std::make_shared<Grid>();
    g->domain = domain;
    g->n = n;
    g->grading = grading;

    switch (domain.kind) {
        case DomainKind::interval: {
            g->axis0 = axis_nodes(domain.lo.x(), domain.hi.x(), n, grading);
            g->nodes.setZero(n, 2);
            g->delta.resize(n);
            g->interior.assign(n, 1);
            for (int i = 0; i < n; ++i) {
                g->nodes(i, 0) = g->axis0[i];
                g->delta[i] = distance_to_boundary(domain, g->axis0[i]);
            }
            g->interior.front() = g->interior.back() = 0;
            break;
        }
        case DomainKind::rectangle: {
            g->axis0 = axis_nodes(domain.lo.x(), domain.hi.x(), n, grading);
            g->axis1 = axis_nodes(domain.lo.y(), domain.hi.y(), n, grading);
            const int N = n * n;
            g->nodes.resize(N, 2);
            g->delta.resize(N);
            g->interior.assign(N, 0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const int k = i * n + j;
                    g->nodes(k, 0) = g->axis0[i];
                    g->nodes(k, 1) = g->axis1[j];
                    g->delta[k] = distance_to_boundary(domain, g->point(k));
                    g->interior[k] = (i > 0 && i < n - 1 && j > 0 && j < n - 1) ? 1 : 0;
                }
            break;
        }
        case DomainKind::disk: {
            if (n_theta == 0) n_theta = 4 * (n - 1);
            if (n_theta < 8 || n_theta % 4 != 0)
                throw ResolutionError("disk needs an angular count that is a multiple of 4 and >= 8");
            g->n_theta = n_theta;
            const double R = domain.radius;
            const double k = grading.kind == Grading::Kind::uniform ? 0.0 : grading.strength;
            g->axis0.resize(n);
            for (int i = 0; i < n; ++i) {
                const double s = static_cast<double>(i) / static_cast<double>(n - 1);
                g->axis0[i] = k == 0.0 ? R * s : R * (1.0 - std::pow(1.0 - s, 1.0 + k));
            }
            g->axis0.back() = R;
            g->axis1.resize(n_theta);
            for (int j = 0; j < n_theta; ++j)
                g->axis1[j] = 2.0 * std::numbers::pi * j / n_theta;
            const int N = 1 + (n - 1) * n_theta;
            g->nodes.resize(N, 2);
            g->delta.resize(N);
            g->interior.assign(N, 1);
            g->nodes.row(0).setZero();
            g->delta[0] = R;
            for (int r = 1; r < n; ++r)
                for (int j = 0; j < n_theta; ++j) {
                    const int idx = 1 + (r - 1) * n_theta + j;
                    const double rad = g->axis0[r];
                    g->nodes(idx, 0) = rad * std::cos(g->axis1[j]);
                    g->nodes(idx, 1) = rad * std::sin(g->axis1[j]);
                    if (r == n - 1) {
                        g->delta[idx] = 0.0;
                        g->interior[idx] = 0;
                    } else {
                        g->delta[idx] = distance_to_boundary(domain, g->point(idx));
                    }
                }
            break;
        }
    }
    return g;
}

double distance_to_boundary(const Domain& domain, const Eigen::Vector2d& p) {
    const double tol = 1e-12 * domain.diameter();
    switch (domain.kind) {
        case DomainKind::interval: {
            const double x = p.x();
            if (x < domain.lo.x() - tol || x > domain.hi.x() + tol)
                throw DomainError("point outside the interval");
            return std::max(0.0, std::min(x - domain.lo.x(), domain.hi.x() - x));
        }
        case DomainKind::rectangle: {
            if ((p.array() < domain.lo.array() - tol).any() || (p.array() > domain.hi.array() + tol).any())
                throw DomainError("point outside the rectangle");
            const double d = std::min({p.x() - domain.lo.x(), domain.hi.x() - p.x(),
                                       p.y() - domain.lo.y(), domain.hi.y() - p.y()});
            return std::max(0.0, d);
        }
        case DomainKind::disk: {
            const double r = p.norm();
            if (r > domain.radius + tol) throw DomainError("point outside the disk");
            return std::max(0.0, domain.radius - r);
        }
    }
    return 0.0;
}

Eigen::VectorXd control_volumes(const Grid& g) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(g.size());
    const auto& a = g.axis0;
    auto half = [](const std::vector<double>& x, int i) { return 0.5 * (x[i + 1] - x[i - 1]); };
    switch (g.domain.kind) {
        case DomainKind::interval:
            for (int i = 1; i < g.n - 1; ++i) w[i] = half(a, i);
            break;
        case DomainKind::rectangle:
            for (int i = 1; i < g.n - 1; ++i)
                for (int j = 1; j < g.n - 1; ++j) w[i * g.n + j] = half(a, i) * half(g.axis1, j);
            break;
        case DomainKind::disk: {
            const double dth = 2.0 * std::numbers::pi / g.n_theta;
            w[0] = std::numbers::pi * 0.25 * a[1] * a[1];
            for (int k = 1; k < g.n - 1; ++k)
                for (int j = 0; j < g.n_theta; ++j) w[1 + (k - 1) * g.n_theta + j] = a[k] * half(a, k) * dth;
            break;
        }
    }
    return w;
}

GridFunction::GridFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw ContractViolation("grid function without a grid");
    if (values.size() != grid->size())
        throw ContractViolation("grid function has " + std::to_string(values.size()) +
                                " values for " + std::to_string(grid->size()) + " nodes");
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.grid != b.grid && (a.grid->size() != b.grid->size() ||
                             a.grid->nodes != b.grid->nodes))
        throw ContractViolation("grid functions live on different grids");
}

namespace {

void write_coords(std::ostream& os, const Grid& g, int i) {
    os << g.nodes(i, 0);
    if (g.dim() == 2) os << ',' << g.nodes(i, 1);
    os << ',' << g.delta[i] << ',' << int(g.interior[i]);
}

void write_header(std::ostream& os, const Grid& g) {
    os << (g.dim() == 2 ? "x,y,delta,interior" : "x,delta,interior");
}

}  // namespace

void write_grid_csv(std::ostream& os, const Grid& g) {
    os << std::setprecision(17);
    write_header(os, g);
    os << '\n';
    for (int i = 0; i < g.size(); ++i) {
        write_coords(os, g, i);
        os << '\n';
    }
}

void write_csv(std::ostream& os, const GridFunction& f, const std::string& column) {
    write_csv(os, {{column, &f}});
}

void write_csv(std::ostream& os, const std::vector<std::pair<std::string, const GridFunction*>>& cols) {
    if (cols.empty()) throw ContractViolation("no columns to write");
    const Grid& g = *cols.front().second->grid;
    for (auto& c : cols) require_same_grid(*cols.front().second, *c.second);
    os << std::setprecision(17);
    write_header(os, g);
    for (auto& c : cols) os << ',' << c.first;
    os << '\n';
    for (int i = 0; i < g.size(); ++i) {
        write_coords(os, g, i);
        for (auto& c : cols) os << ',' << c.second->values[i];
        os << '\n';
    }
}

}  // namespace sel
