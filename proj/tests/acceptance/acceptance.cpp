// Acceptance suite: one PASS/FAIL line per criterion. The exit status is
// non-zero only when a criterion could not be evaluated.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>

#include "../test_support.hpp"
#include "malab/error.hpp"
#include "malab/experiments.hpp"

using namespace malab;

namespace {

int passed = 0, failed = 0, errored = 0;

void line(int id, bool ok, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    (ok ? passed : failed)++;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
    return buf;
}

void run(int id, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        std::printf("criterion %2d: ERROR %s\n", id, e.what());
        ++errored;
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("              (%.1f s)\n", dt);
}

std::shared_ptr<const BoundaryProfile> shared_profile(const ProfileParams& p) {
    return std::make_shared<const BoundaryProfile>(build_profile(p));
}

ProfileParams default_profile(double gamma) {
    ProfileParams p;
    p.gamma = gamma;
    return p;
}

double sup_error(const GridFunction& v, const Sampler& exact) {
    const Domain& d = v.domain();
    double e = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) == NodeKind::Unknown) e = std::max(e, std::abs(v[k] - exact(d.node(k))));
    }
    return e;
}

ExperimentConfig sweep_config(double gamma) {
    ExperimentConfig c = ExperimentConfig::parse("{}");
    c.profile = experiment_profile(gamma);
    c.r_list = {0.2, 0.1, 0.05, 0.025, 0.0125};
    c.alpha = 0.5;
    c.grid_n = 129;
    c.refine = 4;
    c.output_dir.clear();
    return c;
}

}  // namespace

int main() {
    // 1. Baseline profile identity.
    run(1, [] {
        double worst = 0.0;
        for (double gamma : {1.5, 2.0, 3.0}) {
            ProfileParams p = default_profile(gamma);
            p.stage = ProfileStage::G0;
            const BoundaryProfile prof = build_profile(p);
            for (int i = 0; i < 200; ++i) {
                const double t = -3.0 + 6.0 * i / 199.0;
                worst = std::max(worst, std::abs(F_op(prof, t) - std::pow(std::abs(t), gamma - 1.0) / gamma));
            }
        }
        line(1, worst <= 1e-10, fmt("max |F[g0](t) - |t|^(g-1)/g| = %.3e (tol 1e-10)", worst));
    });

    // 2. Construction validity.
    run(2, [] {
        const BoundaryProfile prof = build_profile(default_profile(2.0));
        const RhsBounds b = rhs_bounds(prof, 2001);
        double c1 = 0.0, c2 = 0.0;
        for (const SeamResidual& r : seam_residuals(prof)) {
            c1 = std::max({c1, r.jump_g, r.jump_dg});
            c2 = std::max(c2, r.jump_d2g);
        }
        // g'' across the cutoff transitions as well as the seams.
        const double w = 5e-3, d = 1e-9;
        for (double s : prof.seams()) {
            for (double o : {-w, -0.5 * w, 0.5 * w, w}) {
                const double t = s + o;
                c2 = std::max(c2, std::abs(eval_g(prof, t + d, 2) - eval_g(prof, t - d, 2)));
            }
        }
        const bool ok = b.lambda > 0.0 && c1 <= 1e-8 && c2 <= 1e-6;
        line(2, ok, fmt("lambda = %.4g, Lambda = %.4g, C1 seam residual %.2e (tol 1e-8), g'' jump %.2e (tol 1e-6)",
                        b.lambda, b.Lambda, c1, c2));
    });

    // 3. det D^2u = f and derivative accuracy.
    run(3, [] {
        const ModelSolution m(shared_profile(default_profile(2.0)));
        double worst = 0.0;
        for (const Point& x : testing::halton_annulus(1000, 0.01, 1.0))
            worst = std::max(worst, std::abs(eval_D2u(m, x).determinant() - eval_f(m, x)));
        double min_ratio = INFINITY;
        for (const Point& x : {Point{0.3, 0.5}, Point{-0.7, 0.2}, Point{0.6, -0.9}, Point{0.2, 0.9}}) {
            const Point g = eval_Du(m, x);
            const Matrix2 H = eval_D2u(m, x);
            auto fd = [&](double h) {
                const Point e1{h, 0}, e2{0, h};
                const Point dg{(m.u(x + e1) - m.u(x - e1)) / (2 * h), (m.u(x + e2) - m.u(x - e2)) / (2 * h)};
                Matrix2 D;
                D(0, 0) = (m.u(x + e1) - 2 * m.u(x) + m.u(x - e1)) / (h * h);
                D(1, 1) = (m.u(x + e2) - 2 * m.u(x) + m.u(x - e2)) / (h * h);
                D(0, 1) = D(1, 0) = (m.u(x + e1 + e2) - m.u(x + e1 - e2) - m.u(x - e1 + e2) + m.u(x - e1 - e2)) / (4 * h * h);
                return std::make_pair((dg - g).norm(), (D - H).norm());
            };
            const auto a = fd(1e-2), b = fd(5e-3);
            min_ratio = std::min({min_ratio, a.first / b.first, a.second / b.second});
        }
        line(3, worst <= 1e-8 && min_ratio >= 3.5,
             fmt("max |det D2u - f| = %.3e (tol 1e-8), min halving ratio %.3f (tol >= 3.5)", worst, min_ratio));
    });

    // 4. Homogeneity and invariance.
    run(4, [] {
        const ModelSolution m(shared_profile(default_profile(2.0)));
        double wu = 0.0, wf = 0.0;
        for (int k = 1; k <= 10; ++k) {
            const ScalingMap a{std::ldexp(1.0, -k), 2.0};
            for (const Point& x : testing::halton_annulus(100, 0.02, 1.0)) {
                wu = std::max(wu, std::abs(m.u(a.apply(x)) - a.r * m.u(x)));
                wf = std::max(wf, std::abs(m.f(a.apply(x)) - m.f(x)));
            }
        }
        line(4, wu <= 1e-10 && wf <= 1e-8, fmt("max |u(A_r x) - r u(x)| = %.3e (tol 1e-10), max |f(A_r x) - f(x)| = %.3e (tol 1e-8)", wu, wf));
    });

    // 5. Solver validation.
    run(5, [] {
        const Sampler one = [](const Point&) { return 1.0; };
        const Sampler q = [](const Point& x) { return 0.5 * x.squaredNorm(); };
        const double e129 = sup_error(solve_dirichlet(Domain::disc({0, 0}, 1.0, 129), one, q).solution, q);
        const double e65 = sup_error(solve_dirichlet(Domain::disc({0, 0}, 1.0, 65), one, q).solution, q);
        const ModelSolution m(shared_profile(default_profile(2.0)));
        const Sampler u = [&m](const Point& x) { return m.u(x); };
        const SolveResult model = solve_dirichlet(Domain::disc({0, 0}, 1.0, 257), [&m](const Point& x) { return m.f(x); }, u);
        const double em = sup_error(model.solution, u);
        const double ratio = e65 / e129;
        const bool ok = e129 <= 1e-3 && ratio >= 1.8 && em <= 5e-3 && model.report.converged;
        line(5, ok, fmt("quadratic error %.3e at 129 (tol 1e-3), ratio e65/e129 = %.3f (tol >= 1.8), model error %.3e at 257 (tol 5e-3, %.1f s)",
                        e129, ratio, em, model.report.wall_seconds));
    });

    // 6-9 share the sweeps.
    ExperimentReport g2, g4;
    bool have_g2 = false;
    run(6, [&] {
        g2 = run_sharpness(sweep_config(2.0));
        have_g2 = true;
        std::vector<std::pair<double, double>> gaps;
        double smallest = INFINITY;
        for (std::size_t k = 0; k < 4; ++k) {
            gaps.emplace_back(g2.rows[k].r, g2.rows[k].abp_gap);
            smallest = std::min(smallest, g2.rows[k].abp_gap);
        }
        const ExponentFit fit = fit_exponent(gaps);
        const double ge = g2.scalars.at("grid_error");
        const bool ok = fit.slope >= 0.4 && fit.slope <= 0.7 && ge <= 0.25 * smallest;
        line(6, ok, fmt("gap slope %.3f (window [0.4, 0.7], r2 %.2f), grid error %.3e vs smallest gap %.3e (need <= 1/4)",
                        fit.slope, fit.r_squared, ge, smallest));
    });

    run(7, [] {
        bool ok = true;
        std::string detail;
        for (double gamma : {2.0, 4.0}) {
            const auto prof = shared_profile(experiment_profile(gamma));
            std::vector<std::pair<double, double>> pts;
            for (int k = 0; k < 8; ++k) {
                const double r = 0.2 * std::ldexp(1.0, -k);
                pts.emplace_back(r, rhs_holder_norm(PerturbedRHS(prof, r), 0.5, 100, 400, 0).norm);
            }
            const ExponentFit fit = fit_exponent(pts);
            const double expected = -0.5 * gamma / (gamma + 1.0);
            ok = ok && std::abs(fit.slope - expected) <= 0.15 * std::abs(expected);
            detail += fmt("gamma=%.0f slope %.4f vs %.4f (+-15%%, r2 %.3f); ", gamma, fit.slope, expected, fit.r_squared);
        }
        line(7, ok, detail);
    });

    run(8, [&] {
        if (!have_g2) g2 = run_sharpness(sweep_config(2.0)), have_g2 = true;
        const double slope = g2.fit("hessian_seminorm").fit.slope;
        const double expected = -1.0 / 3.0;
        line(8, std::abs(slope - expected) <= 0.1,
             fmt("gamma=2 Hessian seminorm slope %.4f vs %.4f (+-0.1, r2 %.3f)", slope, expected,
                 g2.fit("hessian_seminorm").fit.r_squared));
    });

    run(9, [&] {
        g4 = run_sharpness(sweep_config(4.0));
        const double rho = g4.scalars.at("rho_meas");
        line(9, rho >= 1.05 && rho <= 1.5,
             fmt("gamma=4 rho = %.4f (window [1.05, 1.5], predicted 1.25); slopes: Hessian %.4f, |f_r| %.4f", rho,
                 g4.fit("hessian_seminorm").fit.slope, g4.fit("f_norm").fit.slope));
    });

    run(10, [] {
        ExperimentConfig c = sweep_config(2.0);
        c.alpha_rule = true;
        c.alpha_c = 1.0;
        const ExperimentReport rep = run_exp_alpha(c);
        const bool ok = rep.checks.at("f_norm_bounded") && rep.checks.at("hessian_increasing") &&
                        rep.checks.at("hessian_growth_ge_1.3") && rep.checks.at("hessian_slope_le_-0.1");
        line(10, ok, fmt("max/min |f_r| = %.3f (tol <= 2), Hessian growth %.3f (tol >= 1.3), slope %.3f (tol <= -0.1), ",
                         rep.scalars.at("f_norm_ratio"), rep.scalars.at("hessian_growth"),
                         rep.fit("hessian_seminorm").fit.slope) +
                         (rep.checks.at("hessian_increasing") ? "monotone" : "not monotone"));
    });

    run(11, [] {
        bool ok = true;
        std::string detail;
        std::vector<double> hs;
        for (int k = 2; k <= 10; ++k) hs.push_back(std::ldexp(1.0, -k));
        for (double gamma : {2.0, 3.0}) {
            const ModelSolution m(shared_profile(default_profile(gamma)));
            const Sampler u = [&m](const Point& x) { return m.u(x); };
            const EccentricityTrace t = eccentricity_trace(u, hs, 256, {0, 0}, 2.0);
            const StrictConvexityEstimate sc =
                measure_strict_convexity(u, [&m](const Point& x) { return m.du(x); }, {0, 0}, 0.5, 800, {1, 0});
            const double expected = (gamma - 1.0) / (gamma + 1.0);
            ok = ok && std::abs(t.fit.slope - expected) <= 0.1 * expected && t.max_sandwich <= 2.0 &&
                 std::abs(sc.sigma - (gamma + 1.0)) <= 0.1 * (gamma + 1.0);
            detail += fmt("gamma=%.0f eccentricity slope %.4f vs %.4f, max C %.3f, sigma %.3f; ", gamma, t.fit.slope,
                          expected, t.max_sandwich, sc.sigma);
        }
        line(11, ok, detail);
    });

    run(12, [] {
        const Sampler q = [](const Point& x) { return 0.5 * x.squaredNorm(); };
        const Section s = extract_section(q, 0.45, 64);
        double gap[2];
        const double levels[2] = {1e-2, 1e-3};
        for (int k = 0; k < 2; ++k) {
            const double de = levels[k];
            gap[k] = localization_experiment(s, q, [de](const Point& x) { return 1.0 + de * std::exp(-x.squaredNorm() / 0.1); },
                                        de, 1.0, {}, 65)
                         .u_minus_w;
        }
        const double ratio = gap[0] / gap[1];
        line(12, ratio >= 7.0 && ratio <= 13.0,
             fmt("|u - w| = %.3e vs %.3e, ratio %.3f (window [7, 13])", gap[0], gap[1], ratio));
    });

    run(13, [] {
        const Sampler bd = [](const Point& x) {
            return 0.5 * x.squaredNorm() + 0.25 * std::pow(x.x(), 4) + 0.1 * std::pow(x.x(), 3);
        };
        const SolveResult smooth = solve_dirichlet(Domain::disc({0, 0}, 1.0, 129), [](const Point&) { return 1.0; }, bd);
        const BlowupTrace st = blowup_track(smooth.solution, 0.5, 0.5, 4);
        const ModelSolution m(shared_profile(default_profile(2.0)));
        const BlowupTrace mt = blowup_track([&m](const Point& x) { return m.u(x); }, 0.5, 0.5, 4);
        const bool ok = st.growth_over_first() <= 2.0 && mt.min_growth() >= 2.0;
        line(13, ok, fmt("smooth trace max/first %.3f (tol <= 2), model growth per step >= %.3f (tol >= 2)",
                         st.growth_over_first(), mt.min_growth()));
    });

    std::printf("%d of 13 criteria pass, %d fail, %d could not be evaluated\n", passed, failed, errored);
    return errored == 0 ? 0 : 1;
}
