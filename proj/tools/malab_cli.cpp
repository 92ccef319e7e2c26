#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "malab/error.hpp"
#include "malab/experiments.hpp"

using namespace malab;

namespace {

struct Overrides {
    int grid_n = 0;
    double newton_tol = 0.0;
    int max_iters = 0;
    int stencil_dirs = 0;
    int refine = 0;
    std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--grid-n", o.grid_n, "nodes across the unit disc diameter");
    cmd->add_option("--newton-tol", o.newton_tol, "Newton residual tolerance");
    cmd->add_option("--max-iters", o.max_iters, "Newton iteration cap");
    cmd->add_option("--stencil-dirs", o.stencil_dirs, "number of orthogonal stencil direction pairs");
    cmd->add_option("--refine", o.refine, "refinement factor of the nested solve");
    cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig configure(const std::string& path, const Overrides& o) {
    ExperimentConfig c = path.empty() ? ExperimentConfig::parse("{}") : ExperimentConfig::load(path);
    if (o.grid_n) c.grid_n = o.grid_n;
    if (o.newton_tol > 0.0) c.solver.newton_tol = o.newton_tol;
    if (o.max_iters) c.solver.max_iters = o.max_iters;
    if (o.stencil_dirs) c.solver.stencil_directions = o.stencil_dirs;
    if (o.refine) c.refine = o.refine;
    if (!o.out.empty()) c.output_dir = o.out;
    c.validate();
    return c;
}

void print_report(const ExperimentReport& rep) {
    std::printf("%s: lambda = %.6g, Lambda = %.6g\n", rep.experiment.c_str(), rep.bounds.lambda, rep.bounds.Lambda);
    for (const auto& m : rep.rows) {
        std::printf("  r = %-8g alpha = %.4f  |f_r| = %.5g  [d22 u_r] = %.5g  gap = %.3e  (%d+%d its, %.1fs)\n", m.r,
                    m.alpha, m.rhs.norm, m.hessian_seminorm, m.abp_gap, m.coarse.iterations, m.fine.iterations,
                    m.coarse.wall_seconds + m.fine.wall_seconds);
    }
    for (const auto& f : rep.fits)
        std::printf("  fit %-18s slope %+.4f  r2 %.4f\n", f.name.c_str(), f.fit.slope, f.fit.r_squared);
    for (const auto& [k, v] : rep.scalars) std::printf("  %-28s %.6g\n", k.c_str(), v);
    for (const auto& [k, v] : rep.checks) std::printf("  %-28s %s\n", k.c_str(), v ? "yes" : "no");
    std::printf("  written to %s\n", rep.config.output_dir.c_str());
}

int run_profile_check(const ProfileParams& p) {
    const BoundaryProfile prof = build_profile(p);
    const RhsBounds b = rhs_bounds(prof, 2001);
    std::printf("%s\n", b.report().c_str());
    for (const auto& s : seam_residuals(prof)) {
        std::printf("seam %.6g: jump g %.2e, g' %.2e, g'' %.2e\n", s.seam, s.jump_g, s.jump_dg, s.jump_d2g);
    }
    if (p.stage == ProfileStage::Mollified) std::printf("mollification constant %.6g\n", mollification_constant(prof));
    require_positive(b);
    return 0;
}

int run_solve(const ExperimentConfig& c, double r) {
    auto prof = std::make_shared<const BoundaryProfile>(build_profile(c.profile));
    const ModelSolution m(prof);
    const PerturbedRHS fr(prof, r > 0.0 ? r : 1e-300);
    const Sampler rhs = r > 0.0 ? Sampler([&fr](const Point& x) { return fr(x); })
                                : Sampler([&m](const Point& x) { return m.f(x); });
    const Sampler bd = [&m](const Point& x) { return m.u(x); };
    const Domain d = Domain::disc({0.0, 0.0}, 1.0, c.grid_n);
    const SolveResult res = solve_dirichlet(d, rhs, bd, c.solver);
    std::filesystem::create_directories(c.output_dir);
    res.solution.write_csv(c.output_dir + "/solution.csv");
    double err = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) == NodeKind::Unknown) err = std::max(err, std::abs(res.solution[k] - m.u(d.node(k))));
    }
    std::printf("%s\n", res.report.to_json().c_str());
    std::printf("sup |v - u| = %.6e (%s)\n", err, r > 0.0 ? "perturbed rhs" : "grid error");
    return res.report.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monge-Ampere sharpness experiments"};
    app.require_subcommand(1);

    ProfileParams pp;
    std::string stage = "mollified";
    auto* pc = app.add_subcommand("profile-check", "build a boundary profile and audit the rhs bounds");
    pc->add_option("--gamma", pp.gamma);
    pc->add_option("--t0", pp.t0);
    pc->add_option("--t0-tilde", pp.t0_tilde);
    pc->add_option("--eps", pp.moll_eps);
    pc->add_option("--cutoff", pp.cutoff_width);
    pc->add_option("--stage", stage)->check(CLI::IsMember({"g0", "g1", "g2", "mollified"}));

    std::string config_path;
    Overrides ov;
    double solve_r = 0.0;
    auto* sv = app.add_subcommand("solve", "solve with the model rhs (or f_r) and model boundary data");
    sv->add_option("--config", config_path, "experiment JSON")->check(CLI::ExistingFile);
    sv->add_option("--r", solve_r, "perturbation scale; 0 solves the unperturbed problem");
    add_overrides(sv, ov);

    std::vector<std::pair<std::string, CLI::App*>> experiments;
    for (const char* name : {"sharpness", "exp-alpha", "sections"}) {
        auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        cmd->add_option("--config", config_path, "experiment JSON")->check(CLI::ExistingFile);
        add_overrides(cmd, ov);
        experiments.emplace_back(name, cmd);
    }

    std::string verify_dir;
    auto* vf = app.add_subcommand("verify", "recompute every fit of a report from its CSV files");
    vf->add_option("dir", verify_dir, "report directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pc) {
            pp.stage = stage_from_string(stage);
            return run_profile_check(pp);
        }
        if (*sv) return run_solve(configure(config_path, ov), solve_r);
        for (const auto& [name, cmd] : experiments) {
            if (!*cmd) continue;
            const ExperimentConfig c = configure(config_path, ov);
            const ExperimentReport rep =
                name == "sharpness" ? run_sharpness(c) : name == "exp-alpha" ? run_exp_alpha(c) : run_sections(c);
            rep.write();
            print_report(rep);
            return 0;
        }
        if (*vf) {
            const VerifyResult v = verify_report(verify_dir);
            std::printf("%zu fits checked, max deviation %.3e\n", v.fits_checked, v.max_deviation);
            for (const auto& f : v.failures) std::printf("  FAIL %s\n", f.c_str());
            return v.ok() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
