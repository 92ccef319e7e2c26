#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "doctest.h"
#include "malab/error.hpp"
#include "malab/masolver.hpp"

using namespace malab;

namespace {

double sup_error(const GridFunction& v, const Sampler& exact) {
    double e = 0.0;
    const Domain& d = v.domain();
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) == NodeKind::Unknown) e = std::max(e, std::abs(v[k] - exact(d.node(k))));
    }
    return e;
}

const Sampler one = [](const Point&) { return 1.0; };
const Sampler half_norm2 = [](const Point& x) { return 0.5 * x.squaredNorm(); };

}  // namespace

TEST_CASE("regions") {
    const Region disc = Region::disc({0.0, 0.0}, 1.0);
    CHECK(disc.signed_distance({0.5, 0.0}) == doctest::Approx(-0.5));
    CHECK(disc.exit_fraction({0.0, 0.0}, {2.0, 0.0}) == doctest::Approx(0.5));
    const Region sq = Region::rectangle({-1.0, -1.0}, {1.0, 1.0});
    CHECK(sq.contains({0.99, -0.99}));
    CHECK_FALSE(sq.contains({1.01, 0.0}));
    CHECK(sq.exit_fraction({0.0, 0.0}, {0.0, 4.0}) == doctest::Approx(0.25));
    // Clockwise input is accepted and reoriented.
    CHECK_NOTHROW(Region::polygon({{0, 0}, {0, 1}, {1, 0}}));
    CHECK_THROWS_AS(Region::polygon({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), SolverError);
}

TEST_CASE("domain classification") {
    const Domain d = Domain::disc({0.0, 0.0}, 1.0, 33);
    CHECK(d.h() == doctest::Approx(2.0 / 32));
    std::size_t unknown = 0, dirichlet = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double r = d.node(k).norm();
        if (d.kind(k) == NodeKind::Unknown) {
            ++unknown;
            CHECK(r < 1.0);
        } else if (d.kind(k) == NodeKind::Dirichlet) {
            ++dirichlet;
            CHECK(std::abs(r - 1.0) <= 0.01 * d.h() + 1e-15);
        }
    }
    CHECK(unknown == d.unknown_count());
    CHECK(dirichlet == 4);  // the four axis points sit exactly on the circle
}

TEST_CASE("stencil directions") {
    const auto dirs = stencil_directions(4);
    REQUIRE(dirs.size() == 8);
    CHECK(dirs[0] == std::pair<int, int>{1, 0});
    CHECK(dirs[1] == std::pair<int, int>{0, 1});
    for (std::size_t k = 0; k < dirs.size(); k += 2) {
        CHECK(dirs[k].first * dirs[k + 1].first + dirs[k].second * dirs[k + 1].second == 0);
    }
}

TEST_CASE("quadratics are reproduced") {
    SUBCASE("radial") {
        const auto res = solve_dirichlet(Domain::disc({0, 0}, 1.0, 65), one, half_norm2);
        CHECK(res.report.converged);
        CHECK(sup_error(res.solution, half_norm2) <= 1e-10);
    }
    SUBCASE("anisotropic") {
        const Sampler q = [](const Point& x) { return x.x() * x.x() + 0.25 * x.y() * x.y(); };
        const auto res = solve_dirichlet(Domain::disc({0, 0}, 1.0, 65), one, q);
        CHECK(sup_error(res.solution, q) <= 1e-10);
    }
    SUBCASE("shifted rhs and polygon") {
        const Region tri = Region::polygon({{-0.9, -0.8}, {0.9, -0.7}, {0.1, 0.9}});
        const Sampler q = [](const Point& x) { return 1.5 * x.x() * x.x() + 0.5 * x.y() * x.y() + x.x() - 0.3; };
        const Sampler three = [](const Point&) { return 3.0; };
        const auto res = solve_dirichlet(Domain(tri, 1.0 / 32), three, q);
        CHECK(res.report.converged);
        CHECK(sup_error(res.solution, q) <= 1e-10);
    }
}

TEST_CASE("model recovery") {
    ProfileParams p;
    auto prof = std::make_shared<const BoundaryProfile>(build_profile(p));
    const ModelSolution m(prof);
    const Sampler u = [&m](const Point& x) { return m.u(x); };
    const Sampler f = [&m](const Point& x) { return m.f(x); };
    const auto coarse = solve_dirichlet(Domain::disc({0, 0}, 1.0, 33), f, u);
    const auto fine = solve_dirichlet(Domain::disc({0, 0}, 1.0, 65), f, u);
    CHECK(fine.report.converged);
    const double e33 = sup_error(coarse.solution, u);
    const double e65 = sup_error(fine.solution, u);
    CHECK(e65 <= 1e-2);
    CHECK(e65 < e33);
}

TEST_CASE("comparison principle") {
    const Domain d = Domain::disc({0, 0}, 1.0, 33);
    SUBCASE("larger rhs lies below") {
        const auto lo = solve_dirichlet(d, [](const Point&) { return 2.0; }, half_norm2);
        const auto hi = solve_dirichlet(d, one, half_norm2);
        const auto rep = comparison_check(lo.solution, hi.solution, 1e-12);
        CHECK(rep.violations == 0);
    }
    SUBCASE("variable rhs") {
        const auto lo = solve_dirichlet(d, [](const Point& x) { return 1.0 + x.x() * x.x(); }, half_norm2);
        const auto hi = solve_dirichlet(d, one, half_norm2);
        CHECK(comparison_check(lo.solution, hi.solution, 1e-12).violations == 0);
    }
    SUBCASE("ordered boundary data") {
        const Sampler lifted = [](const Point& x) { return 0.5 * x.squaredNorm() + 0.1 + 0.05 * x.x(); };
        const auto lo = solve_dirichlet(d, one, half_norm2);
        const auto hi = solve_dirichlet(d, one, lifted);
        CHECK(comparison_check(lo.solution, hi.solution, 1e-12).violations == 0);
        CHECK_THROWS_WITH_AS(comparison_check(hi.solution, lo.solution), "boundary data disordered: sub exceeds super on the boundary", SolverError);
    }
}

TEST_CASE("solution diagnostics") {
    const Domain d = Domain::disc({0, 0}, 1.0, 33);
    const Sampler f = [](const Point& x) { return 1.0 + 0.5 * std::sin(3.0 * x.x()) * std::cos(2.0 * x.y()); };
    const Sampler g = [](const Point& x) { return 0.5 * x.squaredNorm() + 0.1 * std::pow(x.x(), 4); };
    const auto a = solve_dirichlet(d, f, g);
    const auto b = solve_dirichlet(d, f, g);
    CHECK(a.report.converged);
    CHECK(a.solution.values() == b.solution.values());
    CHECK(min_directional_difference(a.solution) > 0.0);
    const GridFunction res = residual_field(a.solution, f);
    double rmax = 0.0;
    for (double v : res.values()) rmax = std::max(rmax, std::abs(v));
    CHECK(rmax <= 1e-8);
    CHECK(abp_gap(a.solution, b.solution) == 0.0);
    const auto flat = solve_dirichlet(d, one, g);
    CHECK(abp_gap(a.solution, flat.solution) > 0.0);
    CHECK(a.report.to_json().find("\"converged\":true") != std::string::npos);
}

TEST_CASE("rhs must be positive") {
    const Domain d = Domain::disc({0, 0}, 1.0, 17);
    CHECK_THROWS_AS(solve_dirichlet(d, [](const Point& x) { return x.x(); }, half_norm2), SolverError);
}

TEST_CASE("interpolation and refinement") {
    const Domain d = Domain::disc({0, 0}, 1.0, 33);
    const Sampler cubic = [](const Point& x) { return x.x() * x.x() * x.x() - 2.0 * x.x() * x.y() + x.y(); };
    const GridFunction s = sample(d, cubic);
    // Catmull-Rom reproduces quadratics exactly.
    const GridFunction q = sample(d, half_norm2);
    CHECK(q.interpolate({0.123, -0.456}) == doctest::Approx(half_norm2({0.123, -0.456})).epsilon(1e-12));
    CHECK(std::abs(s.interpolate({0.3, 0.2}) - cubic({0.3, 0.2})) <= 1e-3);

    const auto coarse = solve_dirichlet(d, one, half_norm2);
    const auto fine = refine_solve(coarse.solution, {-0.2, -0.3}, {0.2, 0.3}, 4, one);
    CHECK(fine.report.converged);
    CHECK(fine.solution.domain().h() == doctest::Approx(d.h() / 4));
    CHECK(sup_error(fine.solution, half_norm2) <= 1e-10);

    const auto path = std::filesystem::temp_directory_path() / "malab_grid.csv";
    fine.solution.write_csv(path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,value");
}
