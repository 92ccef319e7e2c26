#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "malab/error.hpp"
#include "malab/experiments.hpp"

using namespace malab;

TEST_CASE("config round trip") {
    const ExperimentConfig c = ExperimentConfig::parse(R"({
        "profile": {"gamma": 4, "t0": 0.3, "t0_tilde": 0.3, "moll_eps": 0.05, "cutoff_width": 0.1},
        "r_list": [0.2, 0.1],
        "alpha": {"rule": "c/|log r|", "c": 0.5},
        "K_list": [2, 3],
        "grid_n": 65,
        "refine": 2,
        "rhs_samples": {"nx": 20, "ny": 30},
        "seed": 7
    })");
    CHECK(c.profile.gamma == 4.0);
    CHECK(c.alpha_rule);
    CHECK(c.alpha_for(0.1) == doctest::Approx(0.5 / std::log(10.0)));
    CHECK(c.rhs_ny == 30);
    CHECK(c.seed == 7);
    const ExperimentConfig d = ExperimentConfig::parse(c.dump());
    CHECK(d.dump() == c.dump());
}

TEST_CASE("config without a profile uses the smoothed one") {
    const ExperimentConfig c = ExperimentConfig::parse("{}");
    CHECK(c.profile.t0 == 0.3);
    CHECK(c.alpha_for(0.05) == 0.5);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(ExperimentConfig::parse(R"({"r_list": [0.1, 0.2]})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(R"({"alpha": 1.5})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(R"({"K_list": [1]})"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse("{ not json"), ConfigError);
    // Q_r for r = 1e-4 is far thinner than four fine cells.
    CHECK_THROWS_AS(ExperimentConfig::parse(R"({"r_list": [0.1, 0.0001], "grid_n": 33, "refine": 1})"), ConfigError);
}

TEST_CASE("small sharpness sweep writes a verifiable report") {
    ExperimentConfig c = ExperimentConfig::parse(R"({"r_list": [0.2, 0.1], "grid_n": 33, "refine": 2,
                                                    "rhs_samples": {"nx": 30, "ny": 60}})");
    const auto dir = std::filesystem::temp_directory_path() / "malab_test_sweep";
    std::filesystem::remove_all(dir);
    c.output_dir = dir.string();
    const ExperimentReport rep = run_sharpness(c);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[1].rhs.norm > rep.rows[0].rhs.norm);
    CHECK(rep.rows[0].coarse.converged);
    rep.write();
    const VerifyResult v = verify_report(dir.string());
    CHECK(v.ok());
    CHECK(v.fits_checked == rep.fits.size());
    std::filesystem::remove_all(dir);
}
