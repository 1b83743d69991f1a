#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sel {

enum class DomainKind { interval, rectangle, disk };

// Intervals use lo.x()..hi.x(); rectangles lo..hi; disks are centred at the
// origin with the given radius.
struct Domain {
    DomainKind kind = DomainKind::interval;
    Eigen::Vector2d lo = Eigen::Vector2d::Zero();
    Eigen::Vector2d hi = Eigen::Vector2d::Ones();
    double radius = 1.0;

    static Domain interval(double a, double b);
    static Domain rectangle(double x0, double x1, double y0, double y1);
    static Domain disk(double R);

    int dim() const { return kind == DomainKind::interval ? 1 : 2; }
    double diameter() const;
    void validate() const;
};

std::string to_string(DomainKind k);

struct Grading {
    enum class Kind { uniform, boundary_graded };
    Kind kind = Kind::uniform;
    double strength = 0.0;

    static Grading uniform() { return {}; }
    static Grading boundary_graded(double k) { return {Kind::boundary_graded, k}; }
    double exponent() const { return kind == Kind::uniform ? 1.0 : 1.0 + strength; }
};

// Symmetric two-sided map on [0,1]: s -> (2s)^(1+k)/2 on the left half,
// mirrored on the right half. k = 0 is the identity.
double grading_map(double s, double strength);

// Node ordering is lexicographic by axis. Rectangle: index = i*n + j with i
// the x index. Disk: index 0 is the centre, ring k (1..n-1, ring n-1 is the
// boundary) and angle j sit at 1 + (k-1)*n_theta + j.
struct Grid {
    Domain domain;
    int n = 0;
    Grading grading;
    int n_theta = 0;
    Eigen::MatrixX2d nodes;
    std::vector<char> interior;
    Eigen::VectorXd delta;
    std::vector<double> axis0;  // x positions, or radii for the disk
    std::vector<double> axis1;  // y positions, or angles for the disk

    int size() const { return static_cast<int>(nodes.rows()); }
    int dim() const { return domain.dim(); }
    int interior_count() const;
    Eigen::Vector2d point(int i) const { return nodes.row(i).transpose(); }
    double min_spacing() const;
};

using GridPtr = std::shared_ptr<const Grid>;

// n is the node count per axis (radial count for the disk, centre and
// boundary ring included). n_theta = 0 picks 4*(n-1) angles for the disk.
GridPtr build_grid(const Domain& domain, int n, Grading grading = Grading::uniform(),
                   int n_theta = 0);

double distance_to_boundary(const Domain& domain, const Eigen::Vector2d& point);
inline double distance_to_boundary(const Domain& domain, double x) {
    return distance_to_boundary(domain, Eigen::Vector2d(x, 0.0));
}

struct GridFunction {
    GridPtr grid;
    Eigen::VectorXd values;

    GridFunction() = default;
    GridFunction(GridPtr g, Eigen::VectorXd v);
    explicit GridFunction(GridPtr g) : GridFunction(g, Eigen::VectorXd::Zero(g->size())) {}

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
    bool finite() const { return values.allFinite(); }
};

template <class Fn>
GridFunction sample(const GridPtr& grid, Fn&& f) {
    Eigen::VectorXd v(grid->size());
    for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->point(i));
    return GridFunction(grid, std::move(v));
}

// Nodal control volumes (lengths in 1D, areas in 2D) used for discrete
// integrals of nodal fields; boundary nodes get zero.
Eigen::VectorXd control_volumes(const Grid& grid);

inline GridFunction delta_function(const GridPtr& grid) { return GridFunction(grid, grid->delta); }

void require_same_grid(const GridFunction& a, const GridFunction& b);

void write_grid_csv(std::ostream& os, const Grid& grid);
void write_csv(std::ostream& os, const GridFunction& f, const std::string& column = "value");
void write_csv(std::ostream& os, const std::vector<std::pair<std::string, const GridFunction*>>& cols);

}  // namespace sel
