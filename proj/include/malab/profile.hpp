#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace malab {

/// Construction stage of the boundary profile. Each stage is the previous one
/// plus one modification, so tests can inspect the intermediate objects.
enum class ProfileStage { G0, G1, G2, Mollified };

std::string_view to_string(ProfileStage stage);
ProfileStage stage_from_string(std::string_view name);

struct ProfileParams {
    double gamma = 2.0;
    double t0 = 0.05;         // half-width of the parabola replacing g0 near 0
    double t0_tilde = 0.05;   // half-width of the parabola replacing g~ near 0
    double moll_eps = 1e-3;   // mollifier radius
    double cutoff_width = 5e-3;
    ProfileStage stage = ProfileStage::Mollified;
};

/// Even convex profile g on the extended line, with its matched companion
/// g~(t) = |t|^{(gamma+1)/gamma} g(|t|^{-1/gamma}).
///
/// Closed forms are used wherever they hold. Inside the cutoff neighbourhood
/// of a seam (mollified stage only) the convolution with the bump is
/// evaluated by Gauss-Legendre quadrature split at the seam, which is exact up
/// to rounding because the integrand is piecewise smooth.
///
/// Immutable after construction; all evaluators are const and thread-safe.
class BoundaryProfile {
public:
    explicit BoundaryProfile(const ProfileParams& params);

    const ProfileParams& params() const { return params_; }
    double gamma() const { return params_.gamma; }
    ProfileStage stage() const { return params_.stage; }

    /// Seam set {-T, -t0, t0, T} with T = t0_tilde^{-1/gamma}, sorted. Empty for g0;
    /// {-t0, t0} for g1.
    const std::vector<double>& seams() const { return seams_; }

    double a() const { return a_; }
    double b() const { return b_; }
    double a_tilde() const { return a_tilde_; }
    double b_tilde() const { return b_tilde_; }
    /// T = t0_tilde^{-1/gamma}, the outer seam in g coordinates.
    double outer_seam() const { return outer_seam_; }

    /// g and its first two derivatives; t may be +-infinity.
    double g(double t, int order = 0) const;
    /// Same quantity for the g2 stage regardless of params().stage. Used to
    /// measure how far mollification moves the profile.
    double g2(double t, int order = 0) const;
    double g_tilde(double t, int order = 0) const;

    /// det D^2 u along horizontal-type lines: F[g, gamma](t).
    double F(double t) const;
    /// det D^2 u along vertical-type lines: F~[g~, gamma](t).
    double F_tilde(double t) const;

private:
    double g_unmollified(double at, int order, ProfileStage stage) const;
    double g_positive(double at, int order) const;
    double g_tilde_positive(double at, int order) const;
    double F_native(double t) const;
    double F_tilde_native(double t) const;
    bool at_seam(double at) const;

    ProfileParams params_;
    std::vector<double> seams_;
    double a_ = 1.0, b_ = 0.0, a_tilde_ = 1.0, b_tilde_ = 0.0;
    double outer_seam_ = 0.0;
};

/// Builds and validates a profile. For the mollified stage the positivity
/// audit of rhs_bounds runs and a ProfileError naming the failing interval is
/// thrown when it fails.
BoundaryProfile build_profile(const ProfileParams& params);

double eval_g(const BoundaryProfile& p, double t, int order = 0);
double eval_g_tilde(const BoundaryProfile& p, double t, int order = 0);
double F_op(const BoundaryProfile& p, double t);
double F_tilde_op(const BoundaryProfile& p, double t);

struct RhsBounds {
    double lambda = 0.0;
    double Lambda = 0.0;
    double argmin = 0.0;          // abscissa of the minimum
    bool argmin_in_tilde = false; // whether the minimum came from F~
    double argmax = 0.0;
    bool argmax_in_tilde = false;
    std::size_t samples = 0;
    bool positive() const { return lambda > 0.0; }
    std::string report() const;
};

/// min and max of F and F~ over [-1, 1] on a uniform grid of `samples` points
/// plus dense sampling around every seam. Together these cover every value of
/// f = det D^2 u.
RhsBounds rhs_bounds(const BoundaryProfile& p, std::size_t samples);

/// Throws ProfileError("positivity violated ...") when bounds.lambda <= 0.
void require_positive(const RhsBounds& bounds);

struct SeamResidual {
    double seam = 0.0;
    double jump_g = 0.0;
    double jump_dg = 0.0;
    double jump_d2g = 0.0;
};

/// One-sided limits of g, g', g'' at each seam, evaluated at seam +- offset.
std::vector<SeamResidual> seam_residuals(const BoundaryProfile& p, double offset = 1e-12);

/// (sup|g - g2| + sup|g' - g2'|) / moll_eps over the seam neighbourhoods.
double mollification_constant(const BoundaryProfile& p, std::size_t samples_per_seam = 2001);

}  // namespace malab
