#include "malab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "malab/error.hpp"

namespace malab {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<double> log_axis(double lo, double hi, int n) {
    std::vector<double> v{0.0};
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return v;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

ProfileParams experiment_profile(double gamma) {
    ProfileParams p;
    p.gamma = gamma;
    p.t0 = 0.3;
    p.t0_tilde = 0.3;
    p.moll_eps = 0.05;
    p.cutoff_width = 0.1;
    return p;
}

ExperimentConfig ExperimentConfig::parse(const std::string& json_text) {
    ExperimentConfig c;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (j.contains("profile")) {
            const json& p = j.at("profile");
            double gamma = c.profile.gamma;
            read(p, "gamma", gamma);
            c.profile = experiment_profile(gamma);
            read(p, "t0", c.profile.t0);
            read(p, "t0_tilde", c.profile.t0_tilde);
            read(p, "moll_eps", c.profile.moll_eps);
            read(p, "cutoff_width", c.profile.cutoff_width);
            if (p.contains("stage")) c.profile.stage = stage_from_string(p.at("stage").get<std::string>());
        } else {
            c.profile = experiment_profile(c.profile.gamma);
        }
        read(j, "r_list", c.r_list);
        if (j.contains("alpha")) {
            const json& a = j.at("alpha");
            if (a.is_number()) {
                c.alpha = a.get<double>();
            } else {
                c.alpha_rule = true;
                read(a, "c", c.alpha_c);
            }
        }
        read(j, "K_list", c.K_list);
        read(j, "K", c.K);
        if (j.contains("solver")) {
            const json& s = j.at("solver");
            read(s, "stencil_directions", c.solver.stencil_directions);
            read(s, "newton_tol", c.solver.newton_tol);
            read(s, "max_iters", c.solver.max_iters);
            read(s, "damping", c.solver.damping);
            read(s, "convexity_floor", c.solver.convexity_floor);
            read(s, "gauss_seidel_sweeps", c.solver.gauss_seidel_sweeps);
        }
        read(j, "grid_n", c.grid_n);
        read(j, "refine", c.refine);
        if (j.contains("rhs_samples")) {
            read(j.at("rhs_samples"), "nx", c.rhs_nx);
            read(j.at("rhs_samples"), "ny", c.rhs_ny);
        }
        read(j, "output_dir", c.output_dir);
        read(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    } catch (const ProfileError& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string ExperimentConfig::dump() const {
    json j;
    j["profile"] = {{"gamma", profile.gamma},
                    {"t0", profile.t0},
                    {"t0_tilde", profile.t0_tilde},
                    {"moll_eps", profile.moll_eps},
                    {"cutoff_width", profile.cutoff_width},
                    {"stage", std::string(to_string(profile.stage))}};
    j["r_list"] = r_list;
    if (alpha_rule) {
        j["alpha"] = {{"rule", "c/|log r|"}, {"c", alpha_c}};
    } else {
        j["alpha"] = alpha;
    }
    j["K_list"] = K_list;
    j["K"] = K;
    j["solver"] = {{"stencil_directions", solver.stencil_directions},
                   {"newton_tol", solver.newton_tol},
                   {"max_iters", solver.max_iters},
                   {"damping", solver.damping},
                   {"convexity_floor", solver.convexity_floor},
                   {"gauss_seidel_sweeps", solver.gauss_seidel_sweeps}};
    j["grid_n"] = grid_n;
    j["refine"] = refine;
    j["rhs_samples"] = {{"nx", rhs_nx}, {"ny", rhs_ny}};
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j.dump(2);
}

void ExperimentConfig::validate() const {
    if (r_list.empty()) throw ConfigError("r_list is empty");
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        if (!(r_list[k] > 0.0 && r_list[k] < 1.0)) throw ConfigError("r_list entries must lie in (0, 1)");
        if (k > 0 && !(r_list[k] < r_list[k - 1])) throw ConfigError("r_list must be strictly decreasing");
    }
    if (!alpha_rule && !(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    if (alpha_rule && !(alpha_c > 0.0)) throw ConfigError("alpha rule constant must be > 0");
    if (grid_n < 9) throw ConfigError("grid_n must be >= 9");
    if (refine < 1) throw ConfigError("refine must be >= 1");
    if (rhs_nx < 2 || rhs_ny < 2) throw ConfigError("rhs_samples must be >= 2 per axis");
    const double g = profile.gamma;
    const double height = std::pow(r_list.back(), g / (g + 1.0));
    if (height < 4.0 * fine_spacing()) {
        throw ConfigError("grid does not resolve Q_r for r = " + fmt(r_list.back()) + ": height " + fmt(height) +
                          " < 4 h_fine = " + fmt(4.0 * fine_spacing()));
    }
    for (double k : K_list) {
        if (!(k > 1.0)) throw ConfigError("K values must be > 1");
    }
}

double ExperimentConfig::alpha_for(double r) const {
    if (!alpha_rule) return alpha;
    return std::min(1.0, alpha_c / std::abs(std::log(r)));
}

RhsNorm rhs_holder_norm(const PerturbedRHS& fr, double alpha, int nx, int ny, std::uint64_t seed) {
    std::vector<Point> pts;
    std::vector<double> vals;
    for (double x : log_axis(1e-4, 1.0, nx)) {
        for (double y : log_axis(1e-5, 1.0, ny)) {
            pts.emplace_back(x, y);
            vals.push_back(fr({x, y}));
        }
    }
    RhsNorm out;
    for (double v : vals) out.sup = std::max(out.sup, std::abs(v));
    out.witness = holder_seminorm(SampleSet::region(std::move(pts), std::move(vals)), alpha,
                                  HolderStrategy::Subsampled, seed);
    out.seminorm = out.witness.value;
    out.norm = out.sup + out.seminorm;
    return out;
}

namespace {

double sup_unknown_gap(const GridFunction& a, const Sampler& exact) {
    const Domain& d = a.domain();
    double e = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) == NodeKind::Unknown) e = std::max(e, std::abs(a[k] - exact(d.node(k))));
    }
    return e;
}

struct Sweep {
    std::shared_ptr<const BoundaryProfile> profile;
    std::unique_ptr<ModelSolution> model;
    Domain domain;
    GridFunction base;  // discrete solution with the unperturbed rhs
    SolveReport base_report;
};

Sweep prepare(const ExperimentConfig& c) {
    auto profile = std::make_shared<const BoundaryProfile>(build_profile(c.profile));
    auto model = std::make_unique<ModelSolution>(profile);
    const ModelSolution* m = model.get();
    Domain domain = Domain::disc({0.0, 0.0}, 1.0, c.grid_n);
    SolveResult base = solve_dirichlet(domain, [m](const Point& x) { return m->f(x); },
                                       [m](const Point& x) { return m->u(x); }, c.solver);
    if (!base.report.converged) throw SolverError("unperturbed solve did not converge");
    return {profile, std::move(model), domain, base.solution, base.report};
}

RMeasurement measure(const ExperimentConfig& c, const Sweep& sw, double r) {
    RMeasurement m;
    m.r = r;
    m.alpha = c.alpha_for(r);
    const double g = c.profile.gamma;
    const PerturbedRHS fr(sw.profile, r);
    m.rhs = rhs_holder_norm(fr, m.alpha, c.rhs_nx, c.rhs_ny, c.seed);

    const ModelSolution* model = sw.model.get();
    const Sampler rhs = [&fr](const Point& x) { return fr(x); };
    const Sampler boundary = [model](const Point& x) { return model->u(x); };
    const SolveResult coarse = solve_dirichlet(sw.domain, rhs, boundary, c.solver, sw.base);
    if (!coarse.report.converged) throw SolverError("solve did not converge for r = " + fmt(r));
    m.coarse = coarse.report;
    m.abp_gap = abp_gap(coarse.solution, sw.base);
    m.grid_error = sup_unknown_gap(sw.base, boundary);

    const double hc = sw.domain.h();
    const SolveResult fine = refine_solve(coarse.solution, {-4.0 * hc, -0.6}, {4.0 * hc, 0.6}, c.refine, rhs, c.solver);
    if (!fine.report.converged) throw SolverError("refined solve did not converge for r = " + fmt(r));
    m.fine = fine.report;
    const double hf = fine.solution.domain().h();
    std::vector<double> x2;
    const int kmax = static_cast<int>(std::floor(0.5 / hf + 1e-9));
    for (int k = -kmax; k <= kmax; ++k) x2.push_back(k * hf);
    m.d22 = fd_partial22_line(fine.solution, x2, hf);
    m.hessian_witness = holder_seminorm(m.d22, m.alpha);
    m.hessian_seminorm = m.hessian_witness.value;

    for (double K : c.K_list) {
        const double s = K * std::sqrt(r);
        if (s > 1.0) continue;
        const double sy = std::pow(s, g / (g + 1.0));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        int count = 0;
        for (std::size_t k = 0; k < x2.size(); ++k) {
            if (std::abs(x2[k]) > 0.5 * sy) continue;
            const double v = sy * sy / s * m.d22.values[k];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++count;
        }
        if (count >= 3) m.window_osc[K] = hi - lo;
    }
    return m;
}

std::vector<std::pair<double, double>> series(const std::vector<RMeasurement>& rows,
                                              double (*get)(const RMeasurement&)) {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : rows) out.emplace_back(r.r, get(r));
    return out;
}

void add_fit(ExperimentReport& rep, const std::string& name, const std::vector<std::pair<double, double>>& pts) {
    rep.fits.push_back({name, name + ".csv", fit_exponent(pts)});
}

ExperimentReport sweep_report(const std::string& name, const ExperimentConfig& config) {
    config.validate();
    ExperimentReport rep;
    rep.experiment = name;
    rep.config = config;
    const Sweep sw = prepare(config);
    rep.bounds = rhs_bounds(*sw.profile, 2001);
    rep.scalars["grid_error"] = sup_unknown_gap(sw.base, [&sw](const Point& x) { return sw.model->u(x); });
    for (double r : config.r_list) rep.rows.push_back(measure(config, sw, r));
    if (rep.rows.size() >= 3) {
        add_fit(rep, "f_norm", series(rep.rows, [](const RMeasurement& m) { return m.rhs.norm; }));
        add_fit(rep, "f_seminorm", series(rep.rows, [](const RMeasurement& m) { return m.rhs.seminorm; }));
        add_fit(rep, "hessian_seminorm", series(rep.rows, [](const RMeasurement& m) { return m.hessian_seminorm; }));
        add_fit(rep, "abp_gap", series(rep.rows, [](const RMeasurement& m) { return m.abp_gap; }));
    }
    return rep;
}

}  // namespace

const FitEntry& ExperimentReport::fit(const std::string& name) const {
    for (const auto& f : fits) {
        if (f.name == name) return f;
    }
    throw ConfigError("no fit named " + name);
}

ExperimentReport run_sharpness(const ExperimentConfig& config) {
    ExperimentReport rep = sweep_report("sharpness", config);
    if (rep.fits.empty()) return rep;
    const double g = config.profile.gamma, a = config.alpha;
    const double f_expected = -a * g / (g + 1.0);
    const double h_expected = -(g - 1.0 + a * g) / (2.0 * (g + 1.0));
    const double f_slope = rep.fit("f_norm").fit.slope;
    const double h_slope = rep.fit("hessian_seminorm").fit.slope;
    rep.scalars["f_expected_slope"] = f_expected;
    rep.scalars["hessian_expected_slope"] = h_expected;
    rep.scalars["hessian_self_similar_slope"] = -(g - 1.0 + a * g) / (g + 1.0);
    rep.scalars["rho_meas"] = h_slope / f_slope;
    rep.scalars["rho_expected"] = 0.5 * (1.0 + (g - 1.0) / (a * g));
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& m : rep.rows) min_gap = std::min(min_gap, m.abp_gap);
    rep.checks["f_slope_within_15pct"] = std::abs(f_slope - f_expected) <= 0.15 * std::abs(f_expected);
    rep.checks["hessian_slope_within_0.1"] = std::abs(h_slope - h_expected) <= 0.1;
    rep.checks["rho_above_one"] = rep.scalars["rho_meas"] > 1.0;
    rep.checks["grid_error_below_quarter_gap"] = rep.scalars["grid_error"] <= 0.25 * min_gap;
    return rep;
}

ExperimentReport run_exp_alpha(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.alpha_rule = true;
    ExperimentReport rep = sweep_report("exp_alpha", c);
    if (rep.fits.empty()) return rep;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool increasing = true;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        lo = std::min(lo, rep.rows[k].rhs.norm);
        hi = std::max(hi, rep.rows[k].rhs.norm);
        if (k > 0 && !(rep.rows[k].hessian_seminorm > rep.rows[k - 1].hessian_seminorm)) increasing = false;
    }
    const double growth = rep.rows.back().hessian_seminorm / rep.rows.front().hessian_seminorm;
    const double g = c.profile.gamma;
    rep.scalars["f_norm_ratio"] = hi / lo;
    rep.scalars["hessian_growth"] = growth;
    rep.scalars["hessian_limit_slope"] = -(g - 1.0) / (2.0 * (g + 1.0));
    rep.checks["f_norm_bounded"] = hi <= 2.0 * lo;
    rep.checks["hessian_increasing"] = increasing;
    rep.checks["hessian_growth_ge_1.3"] = growth >= 1.3;
    rep.checks["hessian_slope_le_-0.1"] = rep.fit("hessian_seminorm").fit.slope <= -0.1;
    return rep;
}

ExperimentReport run_sections(const ExperimentConfig& config) {
    ExperimentReport rep;
    rep.experiment = "sections";
    rep.config = config;
    ProfileParams pp = config.profile;
    auto profile = std::make_shared<const BoundaryProfile>(build_profile(pp));
    rep.bounds = rhs_bounds(*profile, 2001);
    const ModelSolution m(profile);
    const Sampler u = [&m](const Point& x) { return m.u(x); };
    const double g = pp.gamma;

    std::vector<double> hs;
    for (int k = 2; k <= 10; ++k) hs.push_back(std::ldexp(1.0, -k));
    const EccentricityTrace ecc = eccentricity_trace(u, hs, 256, {0.0, 0.0}, 2.0);
    rep.fits.push_back({"eccentricity", "eccentricity.csv", ecc.fit});
    rep.scalars["eccentricity_expected_slope"] = (g - 1.0) / (g + 1.0);
    rep.scalars["max_sandwich"] = ecc.max_sandwich;
    rep.scalars["h_hat"] = largest_contained_height(u, {0.0, 0.0}, 0.9);

    const StrictConvexityEstimate sc =
        measure_strict_convexity(u, [&m](const Point& x) { return m.du(x); }, {0.0, 0.0}, 0.5, 800, {1.0, 0.0},
                                 config.seed);
    rep.scalars["sigma"] = sc.sigma;
    rep.scalars["c0"] = sc.c0;
    rep.scalars["sigma_expected"] = g + 1.0;

    const BlowupTrace model_trace = blowup_track(u, config.alpha, 0.5, 4);
    const Sampler smooth_bd = [](const Point& x) {
        return 0.5 * x.squaredNorm() + 0.25 * std::pow(x.x(), 4) + 0.1 * std::pow(x.x(), 3);
    };
    const SolveResult smooth =
        solve_dirichlet(Domain::disc({0.0, 0.0}, 1.0, config.grid_n), [](const Point&) { return 1.0; }, smooth_bd,
                        config.solver);
    const BlowupTrace smooth_trace = blowup_track(smooth.solution, config.alpha, 0.5, 4);
    rep.scalars["model_min_growth"] = model_trace.min_growth();
    rep.scalars["smooth_growth_over_first"] = smooth_trace.growth_over_first();

    const Sampler quad = [](const Point& x) { return 0.5 * x.squaredNorm(); };
    const Section disc = extract_section(quad, 0.45, 64);
    double gaps[2];
    const double levels[2] = {1e-2, 1e-3};
    for (int k = 0; k < 2; ++k) {
        const double de = levels[k];
        gaps[k] = localization_experiment(disc, quad, [de](const Point& x) { return 1.0 + de * std::exp(-x.squaredNorm() / 0.1); },
                                     de, 1.0, config.solver, 65)
                      .u_minus_w;
    }
    rep.scalars["localization_gap_1e-2"] = gaps[0];
    rep.scalars["localization_gap_1e-3"] = gaps[1];
    rep.scalars["localization_ratio"] = gaps[0] / gaps[1];

    const double expected = (g - 1.0) / (g + 1.0);
    rep.checks["eccentricity_within_10pct"] = std::abs(ecc.fit.slope - expected) <= 0.1 * expected;
    rep.checks["sandwich_le_2"] = ecc.max_sandwich <= 2.0;
    rep.checks["sigma_within_10pct"] = std::abs(sc.sigma - (g + 1.0)) <= 0.1 * (g + 1.0);
    rep.checks["smooth_trace_bounded"] = smooth_trace.growth_over_first() <= 2.0;
    rep.checks["model_trace_divergent"] = model_trace.min_growth() >= 2.0;
    rep.checks["localization_linear"] = rep.scalars["localization_ratio"] >= 7.0 && rep.scalars["localization_ratio"] <= 13.0;

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        ecc.write_csv(config.output_dir + "/eccentricity.csv");
        model_trace.write_csv(config.output_dir + "/blowup_model.csv");
        smooth_trace.write_csv(config.output_dir + "/blowup_smooth.csv");
        write_samples_csv(config.output_dir + "/strict_convexity.csv", sc.samples, "distance,min_defect");
    }
    return rep;
}

void ExperimentReport::write() const {
    const std::string dir = config.output_dir;
    std::filesystem::create_directories(dir);
    auto per_r = [&](const std::string& q, double (*get)(const RMeasurement&)) {
        write_samples_csv(dir + "/" + q + ".csv", series(rows, get), "r,value");
    };
    if (!rows.empty()) {
        per_r("f_norm", [](const RMeasurement& m) { return m.rhs.norm; });
        per_r("f_seminorm", [](const RMeasurement& m) { return m.rhs.seminorm; });
        per_r("f_sup", [](const RMeasurement& m) { return m.rhs.sup; });
        per_r("hessian_seminorm", [](const RMeasurement& m) { return m.hessian_seminorm; });
        per_r("abp_gap", [](const RMeasurement& m) { return m.abp_gap; });
        per_r("alpha", [](const RMeasurement& m) { return m.alpha; });
        for (std::size_t k = 0; k < rows.size(); ++k) {
            std::vector<std::pair<double, double>> prof;
            for (std::size_t i = 0; i < rows[k].d22.size(); ++i)
                prof.emplace_back(rows[k].d22.points[i].x(), rows[k].d22.values[i]);
            write_samples_csv(dir + "/d22_" + std::to_string(k) + ".csv", prof, "x2,d22");
        }
    }

    std::ofstream lf(dir + "/long.csv");
    if (!lf) throw ConfigError("cannot write " + dir + "/long.csv");
    lf.precision(17);
    lf << "experiment,r,quantity,value\n";
    for (const auto& m : rows) {
        lf << experiment << ',' << m.r << ",alpha," << m.alpha << '\n';
        lf << experiment << ',' << m.r << ",f_sup," << m.rhs.sup << '\n';
        lf << experiment << ',' << m.r << ",f_seminorm," << m.rhs.seminorm << '\n';
        lf << experiment << ',' << m.r << ",f_norm," << m.rhs.norm << '\n';
        lf << experiment << ',' << m.r << ",hessian_seminorm," << m.hessian_seminorm << '\n';
        lf << experiment << ',' << m.r << ",abp_gap," << m.abp_gap << '\n';
        for (const auto& [K, osc] : m.window_osc) lf << experiment << ',' << m.r << ",window_osc_K" << K << ',' << osc << '\n';
        if (experiment == "exp_alpha") lf << experiment << ',' << m.r << ",exp_c_over_alpha," << std::exp(config.alpha_c / m.alpha) << '\n';
    }
    if (experiment == "sections") {
        std::ifstream in(dir + "/eccentricity.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string h, major, minor, e;
            std::getline(ss, h, ',');
            std::getline(ss, major, ',');
            std::getline(ss, minor, ',');
            std::getline(ss, e, ',');
            lf << experiment << ',' << h << ",eccentricity," << e << '\n';
        }
    }

    json j;
    j["experiment"] = experiment;
    j["config"] = json::parse(config.dump());
    j["rhs_bounds"] = {{"lambda", bounds.lambda}, {"Lambda", bounds.Lambda}};
    j["grid_error"] = scalars.count("grid_error") ? scalars.at("grid_error") : 0.0;
    json jf = json::array();
    for (const auto& f : fits) {
        const bool ecc = f.name == "eccentricity";
        jf.push_back({{"name", f.name},
                      {"file", f.file},
                      {"x", ecc ? "h" : "r"},
                      {"y", ecc ? "eccentricity" : "value"},
                      {"slope", f.fit.slope},
                      {"intercept", f.fit.intercept},
                      {"r2", f.fit.r_squared}});
    }
    j["fits"] = jf;
    j["scalars"] = scalars;
    j["checks"] = checks;
    json jr = json::array();
    for (const auto& m : rows) {
        json row = {{"r", m.r},
                    {"alpha", m.alpha},
                    {"f_sup", m.rhs.sup},
                    {"f_seminorm", m.rhs.seminorm},
                    {"f_norm", m.rhs.norm},
                    {"f_witness", {m.rhs.witness.p.x(), m.rhs.witness.p.y(), m.rhs.witness.q.x(), m.rhs.witness.q.y()}},
                    {"hessian_seminorm", m.hessian_seminorm},
                    {"hessian_witness", {m.hessian_witness.p.x(), m.hessian_witness.q.x()}},
                    {"abp_gap", m.abp_gap},
                    {"coarse_solve", json::parse(m.coarse.to_json())},
                    {"fine_solve", json::parse(m.fine.to_json())}};
        json osc = json::object();
        for (const auto& [K, v] : m.window_osc) osc[fmt(K)] = v;
        row["window_osc"] = osc;
        jr.push_back(row);
    }
    j["rows"] = jr;
    std::ofstream sf(dir + "/summary.json");
    if (!sf) throw ConfigError("cannot write " + dir + "/summary.json");
    sf << j.dump(2) << '\n';
}

VerifyResult verify_report(const std::string& dir, double tol) {
    std::ifstream in(dir + "/summary.json");
    if (!in) throw ConfigError("cannot read " + dir + "/summary.json");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid summary.json: ") + e.what());
    }
    VerifyResult out;
    for (const auto& f : j.at("fits")) {
        const std::string file = dir + "/" + f.at("file").get<std::string>();
        std::ifstream csv(file);
        if (!csv) {
            out.failures.push_back("missing " + file);
            continue;
        }
        std::string line;
        std::getline(csv, line);
        std::vector<std::string> cols;
        {
            std::stringstream hs(line);
            std::string c;
            while (std::getline(hs, c, ',')) cols.push_back(c);
        }
        const auto xi = std::find(cols.begin(), cols.end(), f.at("x").get<std::string>()) - cols.begin();
        const auto yi = std::find(cols.begin(), cols.end(), f.at("y").get<std::string>()) - cols.begin();
        if (xi >= static_cast<long>(cols.size()) || yi >= static_cast<long>(cols.size())) {
            out.failures.push_back("columns not found in " + file);
            continue;
        }
        std::vector<std::pair<double, double>> pts;
        while (std::getline(csv, line)) {
            std::vector<double> v;
            std::stringstream ls(line);
            std::string c;
            while (std::getline(ls, c, ',')) v.push_back(std::stod(c));
            pts.emplace_back(v.at(xi), v.at(yi));
        }
        const ExponentFit fit = fit_exponent(pts);
        const double dev = std::max({std::abs(fit.slope - f.at("slope").get<double>()),
                                     std::abs(fit.intercept - f.at("intercept").get<double>()),
                                     std::abs(fit.r_squared - f.at("r2").get<double>())});
        out.max_deviation = std::max(out.max_deviation, dev);
        ++out.fits_checked;
        if (dev > tol) out.failures.push_back(f.at("name").get<std::string>() + " deviates by " + fmt(dev));
    }
    return out;
}

}  // namespace malab
