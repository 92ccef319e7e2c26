#include "malab/model.hpp"

#include <cmath>

#include "malab/error.hpp"

namespace malab {

namespace {
double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }
}  // namespace

double ScalingMap::sx() const { return std::pow(r, 1.0 / (gamma + 1.0)); }
double ScalingMap::sy() const { return std::pow(r, gamma / (gamma + 1.0)); }

Point ScalingMap::apply(const Point& x) const { return {sx() * x.x(), sy() * x.y()}; }

Point apply_scaling(const ScalingMap& map, const Point& x) { return map.apply(x); }

double AnisoRect::half_width() const { return std::pow(r, 1.0 / (gamma + 1.0)); }
double AnisoRect::half_height() const { return std::pow(r, gamma / (gamma + 1.0)); }
bool AnisoRect::contains(const Point& x) const {
    return std::abs(x.x()) <= half_width() && std::abs(x.y()) <= half_height();
}

ModelSolution::ModelSolution(std::shared_ptr<const BoundaryProfile> profile) : profile_(std::move(profile)) {
    if (!profile_) throw ModelError("model solution needs a profile");
}

bool ModelSolution::on_g_chart(const Point& x) const {
    const double ay = std::abs(x.y());
    return ay > 0.0 && std::abs(x.x()) <= std::pow(ay, 1.0 / gamma());
}

double ModelSolution::u(const Point& x) const {
    const double g = gamma();
    if (x.x() == 0.0 && x.y() == 0.0) return 0.0;
    if (on_g_chart(x)) {
        const double y = std::abs(x.y());
        const double t = x.x() * std::pow(y, -1.0 / g);
        return std::pow(y, (g + 1.0) / g) * profile_->g(t, 0);
    }
    const double z = std::abs(x.x());
    const double tau = x.y() * std::pow(z, -g);
    return std::pow(z, g + 1.0) * profile_->g_tilde(tau, 0);
}

Point ModelSolution::du(const Point& x) const {
    const double g = gamma();
    if (x.x() == 0.0 && x.y() == 0.0) return Point::Zero();
    if (on_g_chart(x)) {
        const double y = std::abs(x.y());
        const double t = x.x() * std::pow(y, -1.0 / g);
        const double g0 = profile_->g(t, 0);
        const double g1 = profile_->g(t, 1);
        const double d1 = y * g1;
        const double dy = std::pow(y, 1.0 / g) * ((g + 1.0) * g0 - t * g1) / g;
        return {d1, sgn(x.y()) * dy};
    }
    const double z = std::abs(x.x());
    const double tau = x.y() * std::pow(z, -g);
    const double h0 = profile_->g_tilde(tau, 0);
    const double h1 = profile_->g_tilde(tau, 1);
    const double dz = std::pow(z, g) * ((g + 1.0) * h0 - g * tau * h1);
    const double d2 = z * h1;
    return {sgn(x.x()) * dz, d2};
}

Matrix2 ModelSolution::d2u(const Point& x) const {
    const double g = gamma();
    if (x.x() == 0.0 && x.y() == 0.0) throw ModelError("Hessian unbounded at origin");
    Matrix2 H;
    if (on_g_chart(x)) {
        const double y = std::abs(x.y());
        const double t = x.x() * std::pow(y, -1.0 / g);
        const double g0 = profile_->g(t, 0);
        const double g1 = profile_->g(t, 1);
        const double g2 = profile_->g(t, 2);
        const double h11 = std::pow(y, (g - 1.0) / g) * g2;
        const double h12 = sgn(x.y()) * (g1 - t * g2 / g);
        const double h22 = std::pow(y, (1.0 - g) / g) * ((g + 1.0) * g0 - (g + 1.0) * t * g1 + t * t * g2) / (g * g);
        H << h11, h12, h12, h22;
        return H;
    }
    const double z = std::abs(x.x());
    const double tau = x.y() * std::pow(z, -g);
    const double h0 = profile_->g_tilde(tau, 0);
    const double h1 = profile_->g_tilde(tau, 1);
    const double h2 = profile_->g_tilde(tau, 2);
    const double h22 = std::pow(z, 1.0 - g) * h2;
    const double h12 = sgn(x.x()) * (h1 - g * tau * h2);
    const double h11 = std::pow(z, g - 1.0) * (g * (g + 1.0) * h0 - g * (g + 1.0) * tau * h1 + g * g * tau * tau * h2);
    H << h11, h12, h12, h22;
    return H;
}

double ModelSolution::f(const Point& x) const {
    const double g = gamma();
    if (x.x() == 0.0 && x.y() == 0.0) throw ModelError("f discontinuous at origin");
    if (on_g_chart(x)) {
        const double y = std::abs(x.y());
        return profile_->F(x.x() * std::pow(y, -1.0 / g));
    }
    const double z = std::abs(x.x());
    return profile_->F_tilde(x.y() * std::pow(z, -g));
}

double eval_u(const ModelSolution& ms, const Point& x) { return ms.u(x); }
Point eval_Du(const ModelSolution& ms, const Point& x) { return ms.du(x); }
Matrix2 eval_D2u(const ModelSolution& ms, const Point& x) { return ms.d2u(x); }
double eval_f(const ModelSolution& ms, const Point& x) { return ms.f(x); }

PerturbedRHS::PerturbedRHS(std::shared_ptr<const BoundaryProfile> profile, double r)
    : profile_(profile), model_(profile), r_(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ModelError("perturbation scale r must be > 0");
    const ScalingMap map{r, profile_->gamma()};
    sx_ = map.sx();
    sy_ = map.sy();
    ft1_ = profile_->F_tilde(1.0);
}

double PerturbedRHS::operator()(const Point& x) const {
    if (std::abs(x.x()) <= sx_ && std::abs(x.y()) <= sy_) {
        return profile_->F(x.x() / sx_) * profile_->F_tilde(x.y() / sy_) / ft1_;
    }
    return model_.f(x);
}

double eval_fr(const PerturbedRHS& p, const Point& x) { return p(x); }

}  // namespace malab
