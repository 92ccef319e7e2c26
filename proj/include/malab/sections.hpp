#pragma once

#include <string>
#include <vector>

#include "malab/masolver.hpp"
#include "malab/metrics.hpp"

namespace malab {

/// Sublevel set {u < h} around a minimum point, with its centred John ellipse.
struct Section {
    double h = 0.0;
    Point center = Point::Zero();
    std::vector<double> angles;
    std::vector<double> radii;
    std::vector<Point> polygon;  // absolute coordinates, angular order
    Matrix2 M = Matrix2::Identity();  // E = {x : (x - c)^T M (x - c) <= 1}
    Matrix2 L = Matrix2::Identity();  // L(B_1) = E, symmetric positive
    double axis_major = 1.0;
    double axis_minor = 1.0;
    double eccentricity = 1.0;  // minor / major
    double sandwich = 1.0;      // C with E / C inside Z and Z inside C E

    Region region() const;
};

/// Rays from center out to u = h, bisected to relative tolerance 1e-10.
/// u must attain its minimum at center. Throws SectionError when a ray
/// leaves the ball of radius max_radius before reaching h.
Section extract_section(const Sampler& u, double h, int angles, const Point& center = Point::Zero(),
                        double max_radius = 1.0);

/// Minimum-area ellipse centred at center containing every point.
/// Returns M with E = {x : (x - center)^T M (x - center) <= 1}.
Matrix2 centered_mvee(const std::vector<Point>& points, double tol = 1e-9, const Point& center = Point::Zero());

/// Smallest C with E / C inside the polygon and the polygon inside C E.
double sandwich_constant(const std::vector<Point>& polygon, const Matrix2& M, const Point& center);

/// u_h(z) = u(c + L z) / h and f_h(z) = f(c + L z).
struct NormalizedSolution {
    Section section;
    Sampler u_h;
    Sampler f_h;
    /// Samples f_h on an n x n lattice clipped to S_h = L^{-1}(Z_h - c).
    SampleSet rhs_samples(int n) const;
};

NormalizedSolution normalize(const Sampler& u, const Sampler& f, const Section& s);

struct EccentricityRow {
    double h, axis_major, axis_minor, eccentricity, sandwich;
};

struct EccentricityTrace {
    ExponentFit fit;  // log eccentricity against log h
    std::vector<EccentricityRow> rows;
    double max_sandwich = 0.0;
    void write_csv(const std::string& path) const;
};

EccentricityTrace eccentricity_trace(const Sampler& u, const std::vector<double>& h_list, int angles = 256,
                                     const Point& center = Point::Zero(), double max_radius = 1.0);

/// Largest dyadic h = 2^-k whose section stays inside the disc of the given radius.
double largest_contained_height(const Sampler& u, const Point& center = Point::Zero(), double radius = 0.9,
                                int angles = 64);

struct StrictConvexityEstimate {
    double sigma = 2.0;
    double c0 = 0.0;
    double r_squared = 1.0;
    std::vector<std::pair<double, double>> samples;  // (distance, min defect)
    std::size_t pairs = 0;
};

/// Fits u(z) - u(x) - <Du(x), z - x> >= c0 |z - x|^sigma over pairs drawn in
/// the disc of the given radius about center, or on the line center + t dir
/// when dir is nonzero. sigma comes from the dyadic lower envelope, c0 is the
/// largest constant valid on every tested pair.
StrictConvexityEstimate measure_strict_convexity(const Sampler& u, const std::function<Point(const Point&)>& du,
                                                 const Point& center, double radius, std::size_t pair_budget,
                                                 const Point& dir = Point::Zero(), std::uint64_t seed = 0);

struct Quadratic {
    double c = 0.0;
    Point b = Point::Zero();
    Matrix2 A = Matrix2::Zero();  // Q(x) = c + <b, x> + <A x, x>
    double operator()(const Point& x) const { return c + b.dot(x) + x.dot(A * x); }
    /// Copy rescaled so that det(2A) = 1; throws when A is not positive definite.
    Quadratic unit_determinant() const;
};

/// Least squares quadratic through (x_i - center, v_i).
Quadratic fit_quadratic(const std::vector<Point>& x, const std::vector<double>& v, const Point& center);

struct BlowupStep {
    int k = 0;
    double radius = 0.0;
    Quadratic q;
    double defect = 0.0;  // max |u - Q_k| on B_{radius} / radius^{2+alpha}
    double drift = 0.0;   // |A_k - A_{k+1}| / radius^alpha (Frobenius), 0 on the last step
    std::size_t samples = 0;
};

struct BlowupTrace {
    double alpha = 0.5;
    double r_hat = 0.5;
    std::vector<BlowupStep> steps;
    /// Largest ratio between consecutive defects, and the smallest.
    double max_growth() const;
    double min_growth() const;
    /// max defect over min defect.
    double variation() const;
    /// max defect over the first-scale defect; a bounded trace stays below 2.
    double growth_over_first() const;
    void write_csv(const std::string& path) const;
};

/// Per scale k = 1..steps, fits on B_{r_hat^k}(center). An evaluator is
/// sampled on a 17 x 17 lattice per ball.
BlowupTrace blowup_track(const Sampler& u, double alpha, double r_hat, int steps, const Point& center = Point::Zero());
/// Same on the nodes of a discrete solution. Throws SectionError when a ball
/// holds fewer than 25 nodes.
BlowupTrace blowup_track(const GridFunction& u, double alpha, double r_hat, int steps,
                         const Point& center = Point::Zero());

struct ChainBound {
    double bound = 0.0;   // sum of consecutive Hessian differences
    double direct = 0.0;  // |D2u(x) - D2u(y)|
    std::vector<Point> points;
};

/// Splits [x, y] into N equal pieces, doubling N until every point lies in
/// the half-scaled section Z_{h_bar}(x_i) / 2 of its predecessor. Norms are
/// Frobenius.
ChainBound covering_chain(const Sampler& u, const std::function<Point(const Point&)>& du,
                          const std::function<Matrix2(const Point&)>& d2u, const Point& x, const Point& y,
                          double h_bar);

struct LocalizationReport {
    double h = 0.0;
    double u_minus_w = 0.0;   // sup over nodes of |u - w|
    double f_minus_one = 0.0; // sup over nodes of |f - 1|
    Quadratic q_hat;          // Taylor fit of w at its minimum
    std::vector<std::pair<double, double>> defects;  // (radius, |u - Q| / radius^{2+alpha})
    SolveReport u_solve, w_solve;
};

/// On the section polygon solves det D2 v = f and det D2 w = 1, both with
/// boundary values u, and compares them. The quadratic fit uses nodes in
/// B_{r_hat} about the discrete minimum of w.
LocalizationReport localization_experiment(const Section& s, const Sampler& u, const Sampler& f, double delta, double eps_hat,
                                 const SolverConfig& config = {}, int n = 65, double r_hat = 0.25,
                                 double alpha = 0.5);

}  // namespace malab
