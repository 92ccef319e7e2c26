#include "malab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "malab/error.hpp"
#include "malab/quadrature.hpp"

namespace malab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Normalized bump (315/256)(1 - s^2)^4 on [-1, 1]; C^3 at the endpoints.
double bump(double s) {
    const double w = 1.0 - s * s;
    if (w <= 0.0) return 0.0;
    const double w2 = w * w;
    return 315.0 / 256.0 * w2 * w2;
}

// Quintic smoothstep and its derivatives (C^2 transition from 0 to 1).
double smoothstep(double s, int order) {
    switch (order) {
        case 0: return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        case 1: return 30.0 * s * s * (1.0 - s) * (1.0 - s);
        default: return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    }
}

// Cutoff eta around a seam: 1 on |x - seam| <= w/2, 0 beyond w. Returns the
// requested derivative with respect to x.
double cutoff(double x, double seam, double w, int order) {
    const double d = std::abs(x - seam);
    if (d <= 0.5 * w) return order == 0 ? 1.0 : 0.0;
    if (d >= w) return 0.0;
    const double half = 0.5 * w;
    const double s = (d - half) / half;
    if (order == 0) return 1.0 - smoothstep(s, 0);
    const double sign = x >= seam ? 1.0 : -1.0;
    if (order == 1) return -smoothstep(s, 1) * sign / half;
    return -smoothstep(s, 2) / (half * half);
}

double signum(double t) { return t < 0.0 ? -1.0 : 1.0; }

}  // namespace

std::string_view to_string(ProfileStage stage) {
    switch (stage) {
        case ProfileStage::G0: return "g0";
        case ProfileStage::G1: return "g1";
        case ProfileStage::G2: return "g2";
        case ProfileStage::Mollified: return "mollified";
    }
    return "unknown";
}

ProfileStage stage_from_string(std::string_view name) {
    if (name == "g0") return ProfileStage::G0;
    if (name == "g1") return ProfileStage::G1;
    if (name == "g2") return ProfileStage::G2;
    if (name == "mollified") return ProfileStage::Mollified;
    throw ProfileError("unknown profile stage '" + std::string(name) + "'");
}

BoundaryProfile::BoundaryProfile(const ProfileParams& params) : params_(params) {
    const double g = params.gamma;
    if (!(g > 1.0) || !std::isfinite(g)) throw ProfileError("gamma must be a finite real > 1");
    const ProfileStage st = params.stage;
    if (st >= ProfileStage::G1) {
        if (!(params.t0 > 0.0 && params.t0 < 1.0)) throw ProfileError("t0 must lie in (0, 1)");
        a_ = 1.0 - 0.5 * (g - 1.0) * std::pow(params.t0, g + 1.0);
        b_ = 0.5 * (g + 1.0) * std::pow(params.t0, g - 1.0);
        seams_ = {-params.t0, params.t0};
    }
    if (st >= ProfileStage::G2) {
        if (!(params.t0_tilde > 0.0 && params.t0_tilde < 1.0)) {
            throw ProfileError("t0_tilde must lie in (0, 1)");
        }
        outer_seam_ = std::pow(params.t0_tilde, -1.0 / g);
        if (!(params.t0 < outer_seam_)) throw ProfileError("surgery regions overlap: need t0 < t0_tilde^(-1/gamma)");
        a_tilde_ = 1.0 + (g - 1.0) / (2.0 * g) * std::pow(params.t0_tilde, (g + 1.0) / g);
        b_tilde_ = (g + 1.0) / (2.0 * g) * std::pow(params.t0_tilde, -(g - 1.0) / g);
        seams_ = {-outer_seam_, -params.t0, params.t0, outer_seam_};
    }
    if (st == ProfileStage::Mollified) {
        const double half_gap = std::min(params.t0, 0.5 * (outer_seam_ - params.t0));
        if (!(params.moll_eps > 0.0)) throw ProfileError("moll_eps must be > 0 for the mollified stage");
        if (!(params.moll_eps < params.cutoff_width)) throw ProfileError("need moll_eps < cutoff_width");
        if (!(params.cutoff_width < half_gap)) {
            throw ProfileError("cutoff_width must be below half the distance between seams (" +
                               std::to_string(half_gap) + ")");
        }
    }
}

bool BoundaryProfile::at_seam(double at) const {
    if (params_.stage == ProfileStage::G0 || params_.stage == ProfileStage::Mollified) return false;
    if (at == params_.t0) return true;
    return params_.stage == ProfileStage::G2 && at == outer_seam_;
}

// g for a non-mollified stage at a non-negative abscissa. Exactly at a seam the
// second derivative is taken from the outer piece.
double BoundaryProfile::g_unmollified(double at, int order, ProfileStage stage) const {
    const double g = params_.gamma;
    const double inv = 1.0 / (g + 1.0);
    if (std::isinf(at)) return kInf;
    if (stage >= ProfileStage::G1 && at < params_.t0) {
        switch (order) {
            case 0: return inv * (a_ + b_ * at * at);
            case 1: return inv * 2.0 * b_ * at;
            default: return inv * 2.0 * b_;
        }
    }
    if (stage >= ProfileStage::G2 && at > outer_seam_) {
        switch (order) {
            case 0: return inv * (a_tilde_ * std::pow(at, g + 1.0) + b_tilde_ * std::pow(at, 1.0 - g));
            case 1:
                return inv * (a_tilde_ * (g + 1.0) * std::pow(at, g) - b_tilde_ * (g - 1.0) * std::pow(at, -g));
            default:
                return inv * g * (a_tilde_ * (g + 1.0) * std::pow(at, g - 1.0) +
                                  b_tilde_ * (g - 1.0) * std::pow(at, -g - 1.0));
        }
    }
    switch (order) {
        case 0: return inv * (1.0 + std::pow(at, g + 1.0));
        case 1: return std::pow(at, g);
        default: return g * std::pow(at, g - 1.0);
    }
}

double BoundaryProfile::g_positive(double at, int order) const {
    if (params_.stage != ProfileStage::Mollified) return g_unmollified(at, order, params_.stage);
    if (std::isinf(at)) return kInf;
    const double w = params_.cutoff_width;
    const double eps = params_.moll_eps;
    const double g = params_.gamma;
    const double inv = 1.0 / (g + 1.0);
    for (const double seam : {params_.t0, outer_seam_}) {
        if (std::abs(at - seam) >= w) continue;
        const bool inner_seam = seam == params_.t0;
        // Analytic continuation of the piece on the inner side of the seam.
        auto inner = [&](double x, int k) {
            if (inner_seam) return k == 0 ? inv * (a_ + b_ * x * x) : k == 1 ? inv * 2.0 * b_ * x : inv * 2.0 * b_;
            return k == 0 ? inv * (1.0 + std::pow(x, g + 1.0)) : k == 1 ? std::pow(x, g) : g * std::pow(x, g - 1.0);
        };
        const double brk[] = {(at - seam) / eps};
        // Only g2 - inner is mollified. It vanishes on the inner side and is
        // O((x - seam)^2) on the outer one, so the cutoff sees a tiny residual.
        auto delta = [&](int k) {
            const double conv = integrate_piecewise(
                [&](double s) {
                    const double x = at - eps * s;
                    return (g_unmollified(x, k, ProfileStage::G2) - inner(x, k)) * bump(s);
                },
                -1.0, 1.0, brk);
            return conv - (g_unmollified(at, k, ProfileStage::G2) - inner(at, k));
        };
        const double base = g_unmollified(at, order, ProfileStage::G2);
        const double eta = cutoff(at, seam, w, 0);
        if (eta == 1.0) return base + delta(order);
        const double d0 = delta(0);
        if (order == 0) return base + eta * d0;
        const double d1 = delta(1);
        const double eta1 = cutoff(at, seam, w, 1);
        if (order == 1) return base + eta1 * d0 + eta * d1;
        const double d2 = delta(2);
        const double eta2 = cutoff(at, seam, w, 2);
        return base + eta2 * d0 + 2.0 * eta1 * d1 + eta * d2;
    }
    return g_unmollified(at, order, ProfileStage::G2);
}

double BoundaryProfile::g(double t, int order) const {
    if (order < 0 || order > 2) throw ProfileError("derivative order must be 0, 1 or 2");
    const double at = std::abs(t);
    if (order == 2 && at_seam(at)) throw ProfileError("seam derivative undefined");
    const double v = g_positive(at, order);
    return order == 1 ? signum(t) * v : v;
}

double BoundaryProfile::g2(double t, int order) const {
    if (order < 0 || order > 2) throw ProfileError("derivative order must be 0, 1 or 2");
    const ProfileStage st = std::min(params_.stage, ProfileStage::G2);
    const double v = g_unmollified(std::abs(t), order, st);
    return order == 1 ? signum(t) * v : v;
}

double BoundaryProfile::g_tilde_positive(double at, int order) const {
    const double g = params_.gamma;
    const double inv = 1.0 / (g + 1.0);
    if (std::isinf(at)) return kInf;
    if (params_.stage >= ProfileStage::G2) {
        const double reach = outer_seam_ + (params_.stage == ProfileStage::Mollified ? params_.cutoff_width : 0.0);
        if (at < std::pow(reach, -g)) {
            switch (order) {
                case 0: return inv * (a_tilde_ + b_tilde_ * at * at);
                case 1: return inv * 2.0 * b_tilde_ * at;
                default: return inv * 2.0 * b_tilde_;
            }
        }
    } else if (params_.stage == ProfileStage::G0 || at < std::pow(params_.t0, -g)) {
        const double beta = (g + 1.0) / g;
        switch (order) {
            case 0: return inv * (1.0 + std::pow(at, beta));
            case 1: return inv * beta * std::pow(at, beta - 1.0);
            default: return at == 0.0 ? kInf : inv * beta * (beta - 1.0) * std::pow(at, beta - 2.0);
        }
    }
    // Matching relation g~(t) = t^{(g+1)/g} g(t^{-1/g}) and its derivatives,
    // written in terms of s = t^{-1/g}.
    const double s = std::pow(at, -1.0 / g);
    const double beta = (g + 1.0) / g;
    const double g0v = g_positive(s, 0);
    if (order == 0) return std::pow(s, -(g + 1.0)) * g0v;
    const double g1v = g_positive(s, 1);
    if (order == 1) return beta * g0v / s - g1v / g;
    const double g2v = g_positive(s, 2);
    return beta / g * std::pow(s, g - 1.0) * (g0v - s * g1v) + std::pow(s, g + 1.0) * g2v / (g * g);
}

double BoundaryProfile::g_tilde(double t, int order) const {
    if (order < 0 || order > 2) throw ProfileError("derivative order must be 0, 1 or 2");
    const double at = std::abs(t);
    if (order == 2 && at > 0.0 && std::isfinite(at) && at_seam(std::pow(at, -1.0 / params_.gamma))) {
        throw ProfileError("seam derivative undefined");
    }
    const double v = g_tilde_positive(at, order);
    return order == 1 ? signum(t) * v : v;
}

double BoundaryProfile::F_native(double t) const {
    const double g = params_.gamma;
    const double v0 = this->g(t, 0);
    const double v1 = this->g(t, 1);
    const double v2 = this->g(t, 2);
    return v2 * ((g + 1.0) * v0 + (g - 1.0) * t * v1) / (g * g) - v1 * v1;
}

double BoundaryProfile::F_tilde_native(double t) const {
    const double g = params_.gamma;
    const double v0 = g_tilde(t, 0);
    const double v1 = g_tilde(t, 1);
    const double v2 = g_tilde(t, 2);
    if (std::isinf(v2)) return kInf;
    return g * v2 * ((g + 1.0) * v0 - (g - 1.0) * t * v1) - v1 * v1;
}

// Both operators describe the same determinant: F(t) = F~(|t|^{-gamma}). Each
// is evaluated natively on [-1, 1] and through the other one outside, which
// avoids cancellation between the large terms of the far tail.
double BoundaryProfile::F(double t) const {
    const double at = std::abs(t);
    if (at > 1.0) return F_tilde_native(std::isinf(at) ? 0.0 : std::pow(at, -params_.gamma));
    return F_native(at);
}

double BoundaryProfile::F_tilde(double t) const {
    const double at = std::abs(t);
    if (at > 1.0) return F_native(std::isinf(at) ? 0.0 : std::pow(at, -1.0 / params_.gamma));
    return F_tilde_native(at);
}

BoundaryProfile build_profile(const ProfileParams& params) {
    BoundaryProfile profile(params);
    if (params.stage == ProfileStage::Mollified) require_positive(rhs_bounds(profile, 2001));
    return profile;
}

double eval_g(const BoundaryProfile& p, double t, int order) { return p.g(t, order); }
double eval_g_tilde(const BoundaryProfile& p, double t, int order) { return p.g_tilde(t, order); }
double F_op(const BoundaryProfile& p, double t) { return p.F(t); }
double F_tilde_op(const BoundaryProfile& p, double t) { return p.F_tilde(t); }

std::string RhsBounds::report() const {
    std::ostringstream os;
    os << "lambda=" << lambda << " at " << (argmin_in_tilde ? "F~(" : "F(") << argmin << ")"
       << ", Lambda=" << Lambda << " at " << (argmax_in_tilde ? "F~(" : "F(") << argmax << ")"
       << ", samples=" << samples;
    return os.str();
}

RhsBounds rhs_bounds(const BoundaryProfile& p, std::size_t samples) {
    if (samples < 2) throw ProfileError("rhs_bounds needs at least 2 samples");
    const ProfileParams& pp = p.params();
    std::vector<double> abscissae;
    abscissae.reserve(samples + 1000);
    for (std::size_t i = 0; i < samples; ++i) {
        abscissae.push_back(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(samples - 1));
    }
    RhsBounds out;
    out.lambda = kInf;
    out.Lambda = -kInf;
    auto consider = [&](double v, double t, bool tilde) {
        if (v < out.lambda) {
            out.lambda = v;
            out.argmin = t;
            out.argmin_in_tilde = tilde;
        }
        if (v > out.Lambda) {
            out.Lambda = v;
            out.argmax = t;
            out.argmax_in_tilde = tilde;
        }
        ++out.samples;
    };
    // Dense refinement around the seams that fall in [-1, 1] in each chart.
    auto refine = [&](std::vector<double>& pts, double seam) {
        const double w = pp.stage == ProfileStage::Mollified ? 2.0 * pp.cutoff_width : 0.1 * seam;
        for (int k = 0; k <= 400; ++k) {
            const double t = seam - w + 2.0 * w * k / 400.0;
            pts.push_back(t);
            pts.push_back(-t);
        }
    };
    std::vector<double> f_pts = abscissae;
    std::vector<double> ft_pts = abscissae;
    if (p.stage() >= ProfileStage::G1) refine(f_pts, pp.t0);
    if (p.stage() >= ProfileStage::G2) refine(ft_pts, pp.t0_tilde);
    for (double t : f_pts) {
        if (std::abs(t) > 1.0) continue;
        // Non-mollified stages have no second derivative exactly at a seam.
        double v;
        try {
            v = p.F(t);
        } catch (const ProfileError&) {
            continue;
        }
        consider(v, t, false);
    }
    for (double t : ft_pts) {
        if (std::abs(t) > 1.0) continue;
        double v;
        try {
            v = p.F_tilde(t);
        } catch (const ProfileError&) {
            continue;
        }
        consider(v, t, true);
    }
    return out;
}

void require_positive(const RhsBounds& bounds) {
    if (bounds.positive()) return;
    std::ostringstream os;
    os << "positivity violated: min " << (bounds.argmin_in_tilde ? "F~" : "F") << " = " << bounds.lambda
       << " at t = " << bounds.argmin;
    if (bounds.argmin_in_tilde) {
        os << " in the interval around t~0 (second surgery); reduce t0_tilde";
    } else {
        os << " in the interval around t0 (first surgery); reduce t0";
    }
    throw ProfileError(os.str());
}

std::vector<SeamResidual> seam_residuals(const BoundaryProfile& p, double offset) {
    std::vector<SeamResidual> out;
    for (const double seam : p.seams()) {
        SeamResidual r;
        r.seam = seam;
        const double lo = seam - offset;
        const double hi = seam + offset;
        r.jump_g = std::abs(p.g(hi, 0) - p.g(lo, 0));
        r.jump_dg = std::abs(p.g(hi, 1) - p.g(lo, 1));
        r.jump_d2g = std::abs(p.g(hi, 2) - p.g(lo, 2));
        out.push_back(r);
    }
    return out;
}

double mollification_constant(const BoundaryProfile& p, std::size_t samples_per_seam) {
    const ProfileParams& pp = p.params();
    if (p.stage() != ProfileStage::Mollified) return 0.0;
    double sup0 = 0.0;
    double sup1 = 0.0;
    for (const double seam : p.seams()) {
        for (std::size_t k = 0; k < samples_per_seam; ++k) {
            const double t = seam - pp.cutoff_width +
                             2.0 * pp.cutoff_width * static_cast<double>(k) / static_cast<double>(samples_per_seam - 1);
            sup0 = std::max(sup0, std::abs(p.g(t, 0) - p.g2(t, 0)));
            sup1 = std::max(sup1, std::abs(p.g(t, 1) - p.g2(t, 1)));
        }
    }
    return (sup0 + sup1) / pp.moll_eps;
}

}  // namespace malab
