#pragma once

#include <functional>
#include <string>
#include <vector>

#include "malab/model.hpp"

namespace malab {

using Sampler = std::function<double(const Point&)>;

/// Convex region: a disc or a convex polygon.
class Region {
public:
    static Region disc(const Point& center, double radius);
    /// Vertices in either orientation; throws SolverError when not strictly convex.
    static Region polygon(std::vector<Point> vertices);
    static Region rectangle(const Point& lo, const Point& hi);

    bool is_disc() const { return disc_; }
    const Point& center() const { return center_; }
    double radius() const { return radius_; }
    const std::vector<Point>& vertices() const { return vertices_; }

    /// Negative inside. Exact for the disc; for polygons the max over edge
    /// half-plane distances (exact inside, a lower bound outside).
    double signed_distance(const Point& x) const;
    bool contains(const Point& x) const { return signed_distance(x) <= 0.0; }
    /// For a inside, the fraction t in (0, inf) where a + t (b - a) leaves the region.
    double exit_fraction(const Point& a, const Point& b) const;
    Point bbox_min() const;
    Point bbox_max() const;

private:
    bool disc_ = true;
    Point center_ = Point::Zero();
    double radius_ = 1.0;
    std::vector<Point> vertices_;        // counter-clockwise
    std::vector<Point> normals_;         // unit outward normals
    std::vector<double> offsets_;        // n . x <= offset
};

enum class NodeKind : unsigned char { Unknown, Dirichlet, Outside };

/// Region plus an axis-aligned lattice anchor + (i, j) h covering it with a
/// margin of two nodes. Nodes within snap_fraction * h of the boundary carry
/// Dirichlet data; interior nodes are unknowns.
class Domain {
public:
    Domain(Region region, double h, const Point& lattice_origin = Point::Zero(), double snap_fraction = 1e-2);
    /// Disc of the given radius resolved by n nodes across its diameter.
    static Domain disc(const Point& center, double radius, int n);

    const Region& region() const { return region_; }
    double h() const { return h_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return kinds_.size(); }
    const Point& anchor() const { return anchor_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    Point node(int i, int j) const { return anchor_ + h_ * Point(i, j); }
    Point node(std::size_t k) const { return node(static_cast<int>(k % nx_), static_cast<int>(k / nx_)); }
    NodeKind kind(std::size_t k) const { return kinds_[k]; }
    std::size_t unknown_count() const { return unknowns_; }
    bool same_lattice(const Domain& other) const;

private:
    Region region_;
    double h_;
    Point anchor_;
    int nx_ = 0, ny_ = 0;
    std::vector<NodeKind> kinds_;
    std::size_t unknowns_ = 0;
};

/// Nodal values on a Domain. Outside nodes hold an extension (the boundary
/// sampler) so that bicubic interpolation works up to the boundary.
class GridFunction {
public:
    GridFunction(Domain domain, std::vector<double> values, Sampler boundary = {});

    const Domain& domain() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const Sampler& boundary() const { return boundary_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double at(int i, int j) const { return values_[domain_.index(i, j)]; }

    /// Bicubic (Catmull-Rom) interpolation of the lattice values.
    double interpolate(const Point& x) const;
    /// Max |value| over Unknown and Dirichlet nodes.
    double sup_norm() const;
    /// CSV with header x1,x2,value over nodes inside the region.
    void write_csv(const std::string& path) const;

private:
    Domain domain_;
    std::vector<double> values_;
    Sampler boundary_;
};

/// Sample an analytic function at every node of a domain.
GridFunction sample(const Domain& domain, const Sampler& fn);

struct SolverConfig {
    int stencil_directions = 8;   // number of orthogonal direction pairs
    double newton_tol = 1e-8;
    int max_iters = 100;
    double damping = 1.0;
    double convexity_floor = 1e-12;
    int gauss_seidel_sweeps = 20;  // per fallback
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    std::size_t floor_activations = 0;
    int fallbacks = 0;
    double wall_seconds = 0.0;
    bool converged = false;
    std::size_t unknowns = 0;
    std::string to_json() const;
};

struct SolveResult {
    GridFunction solution;
    SolveReport report;
};

/// The lattice directions used by a config, as (p, q) pairs; direction 2k and
/// 2k + 1 are orthogonal.
std::vector<std::pair<int, int>> stencil_directions(int pairs);

/// Monotone wide-stencil Dirichlet solve of det D^2 v = rhs, v = boundary.
SolveResult solve_dirichlet(const Domain& domain, const Sampler& rhs, const Sampler& boundary,
                            const SolverConfig& config = {});

/// As solve_dirichlet with a caller-supplied initial guess on the same lattice.
SolveResult solve_dirichlet(const Domain& domain, const Sampler& rhs, const Sampler& boundary,
                            const SolverConfig& config, const GridFunction& initial);

/// Per-node scheme residual (zero off the unknowns).
GridFunction residual_field(const GridFunction& v, const Sampler& rhs, const SolverConfig& config = {});

/// Minimum of all directional second differences over unknown nodes.
double min_directional_difference(const GridFunction& v, const SolverConfig& config = {});

/// Sup over unknown nodes of |v1 - v2|.
double abp_gap(const GridFunction& v1, const GridFunction& v2);

struct ComparisonReport {
    double max_violation = 0.0;  // max(v_sub - v_super, 0) over interior nodes
    Point witness = Point::Zero();
    std::size_t violations = 0;  // nodes with v_sub > v_super + tolerance
    double tolerance = 0.0;
};

/// Nodewise ordering check v_sub <= v_super. Throws SolverError when the
/// boundary nodes are not ordered.
ComparisonReport comparison_check(const GridFunction& v_sub, const GridFunction& v_super, double tolerance = 0.0);

/// One nested level: re-solve on the axis-aligned rectangle [lo, hi] (snapped
/// outward to coarse nodes) with spacing h / factor and boundary data
/// interpolated from the coarse solution.
SolveResult refine_solve(const GridFunction& coarse, const Point& lo, const Point& hi, int factor,
                         const Sampler& rhs, const SolverConfig& config = {});

}  // namespace malab
