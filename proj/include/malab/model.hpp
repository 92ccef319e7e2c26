#pragma once

#include <memory>

#include <Eigen/Dense>

#include "malab/profile.hpp"

namespace malab {

using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

/// A_r(x1, x2) = (r^{1/(gamma+1)} x1, r^{gamma/(gamma+1)} x2); det A_r = r.
struct ScalingMap {
    double r = 1.0;
    double gamma = 2.0;

    Point apply(const Point& x) const;
    ScalingMap inverse() const { return {1.0 / r, gamma}; }
    double sx() const;  // horizontal factor r^{1/(gamma+1)}
    double sy() const;  // vertical factor r^{gamma/(gamma+1)}
};

Point apply_scaling(const ScalingMap& map, const Point& x);

/// Q_r = A_r([-1, 1]^2).
struct AnisoRect {
    double r = 1.0;
    double gamma = 2.0;

    double half_width() const;
    double half_height() const;
    double area() const { return 4.0 * r; }
    bool contains(const Point& x) const;
};

/// u(x1, x2) = |x2|^{(gamma+1)/gamma} g(x1 |x2|^{-1/gamma}) on the chart
/// |x1| <= |x2|^{1/gamma}, and |x1|^{gamma+1} g~(x2 |x1|^{-gamma}) elsewhere.
class ModelSolution {
public:
    explicit ModelSolution(std::shared_ptr<const BoundaryProfile> profile);

    const BoundaryProfile& profile() const { return *profile_; }
    std::shared_ptr<const BoundaryProfile> profile_ptr() const { return profile_; }
    double gamma() const { return profile_->gamma(); }

    double u(const Point& x) const;
    /// Gradient; the origin returns 0, the subgradient at the minimum.
    Point du(const Point& x) const;
    /// Hessian; throws ModelError at the origin where it is unbounded.
    Matrix2 d2u(const Point& x) const;
    /// f = det D^2 u; throws ModelError at the origin where f is discontinuous.
    double f(const Point& x) const;

    /// True when x is evaluated on the g chart (|x1| <= |x2|^{1/gamma}).
    bool on_g_chart(const Point& x) const;

private:
    std::shared_ptr<const BoundaryProfile> profile_;
};

double eval_u(const ModelSolution& ms, const Point& x);
Point eval_Du(const ModelSolution& ms, const Point& x);
Matrix2 eval_D2u(const ModelSolution& ms, const Point& x);
double eval_f(const ModelSolution& ms, const Point& x);

/// f_r: equals f outside Q_r and F(x1/sx) F~(x2/sy) / F~(1) inside.
class PerturbedRHS {
public:
    PerturbedRHS(std::shared_ptr<const BoundaryProfile> profile, double r);

    double r() const { return r_; }
    AnisoRect rect() const { return {r_, profile_->gamma()}; }
    double operator()(const Point& x) const;

private:
    std::shared_ptr<const BoundaryProfile> profile_;
    ModelSolution model_;
    double r_;
    double sx_, sy_, ft1_;
};

double eval_fr(const PerturbedRHS& p, const Point& x);

}  // namespace malab
