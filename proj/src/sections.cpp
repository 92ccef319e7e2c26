#include "malab/sections.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "malab/error.hpp"

namespace malab {

namespace {

const double kPi = std::acos(-1.0);

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Strictly convex hull, counter-clockwise.
std::vector<Point> convex_hull(std::vector<Point> p) {
    std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (p.size() < 3) return p;
    std::vector<Point> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

Matrix2 sym_sqrt_inverse(const Matrix2& M) {
    Eigen::SelfAdjointEigenSolver<Matrix2> es(M);
    const Eigen::Vector2d ev = es.eigenvalues();
    if (!(ev.minCoeff() > 0.0)) throw SectionError("ellipse matrix is not positive definite");
    return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

void write_header(std::ofstream& out, const std::string& path, const char* header) {
    if (!out) throw SectionError("cannot open " + path);
    out << std::setprecision(17) << header << '\n';
}

}  // namespace

Region Section::region() const { return Region::polygon(convex_hull(polygon)); }

Section extract_section(const Sampler& u, double h, int angles, const Point& center, double max_radius) {
    if (!(h > 0.0)) throw SectionError("section height must be > 0");
    if (angles < 3) throw SectionError("need at least 3 angles");
    Section s;
    s.h = h;
    s.center = center;
    const double base = u(center);
    for (int k = 0; k < angles; ++k) {
        const double th = 2.0 * kPi * k / angles;
        const Point dir(std::cos(th), std::sin(th));
        auto level = [&](double t) { return u(center + t * dir) - base; };
        double lo = 0.0, hi = max_radius * 1e-6;
        while (level(hi) < h) {
            lo = hi;
            if (hi >= max_radius) throw SectionError("section escapes domain");
            hi = std::min(2.0 * hi, max_radius);
        }
        while (hi - lo > 1e-10 * hi) {
            const double mid = 0.5 * (lo + hi);
            (level(mid) < h ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        s.angles.push_back(th);
        s.radii.push_back(t);
        s.polygon.push_back(center + t * dir);
    }
    s.M = centered_mvee(s.polygon, 1e-9, center);
    s.L = sym_sqrt_inverse(s.M);
    Eigen::SelfAdjointEigenSolver<Matrix2> es(s.M);
    s.axis_major = 1.0 / std::sqrt(es.eigenvalues()(0));
    s.axis_minor = 1.0 / std::sqrt(es.eigenvalues()(1));
    s.eccentricity = s.axis_minor / s.axis_major;
    s.sandwich = sandwich_constant(s.polygon, s.M, center);
    return s;
}

Matrix2 centered_mvee(const std::vector<Point>& points, double tol, const Point& center) {
    const std::size_t n = points.size();
    if (n < 2) throw SectionError("degenerate polygon");
    std::vector<Point> x;
    x.reserve(n);
    for (const Point& p : points) x.push_back(p - center);
    std::vector<double> w(n, 1.0 / n);
    auto moment = [&] {
        Matrix2 X = Matrix2::Zero();
        for (std::size_t i = 0; i < n; ++i) X += w[i] * x[i] * x[i].transpose();
        return X;
    };
    Matrix2 X = moment();
    const double scale = X.trace();
    if (!(scale > 0.0) || !(X.determinant() > 1e-24 * scale * scale)) throw SectionError("degenerate polygon");
    for (int it = 0; it < 100000; ++it) {
        const Matrix2 Xi = X.inverse();
        std::size_t j = 0;
        double kmax = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double k = x[i].dot(Xi * x[i]);
            if (k > kmax) {
                kmax = k;
                j = i;
            }
        }
        // kmax / 2 - 1 bounds the relative area excess of the final ellipse.
        if (kmax / 2.0 - 1.0 <= tol) break;
        const double step = (kmax / 2.0 - 1.0) / (kmax - 1.0);
        for (double& v : w) v *= 1.0 - step;
        w[j] += step;
        X = (1.0 - step) * X + step * x[j] * x[j].transpose();
    }
    const Matrix2 Xi = X.inverse();
    double kmax = 0.0;
    for (const Point& p : x) kmax = std::max(kmax, p.dot(Xi * p));
    return Xi / kmax;
}

double sandwich_constant(const std::vector<Point>& polygon, const Matrix2& M, const Point& center) {
    const std::vector<Point> hull = convex_hull(polygon);
    double outer = 0.0;
    for (const Point& p : hull) outer = std::max(outer, std::sqrt((p - center).dot(M * (p - center))));
    const Matrix2 Mi = M.inverse();
    double inner = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point e = hull[(i + 1) % hull.size()] - hull[i];
        const Point nrm = Point(e.y(), -e.x()).normalized();
        const double offset = nrm.dot(hull[i] - center);
        if (!(offset > 0.0)) throw SectionError("center outside the section");
        inner = std::max(inner, std::sqrt(nrm.dot(Mi * nrm)) / offset);
    }
    return std::max(outer, inner);
}

NormalizedSolution normalize(const Sampler& u, const Sampler& f, const Section& s) {
    NormalizedSolution ns;
    ns.section = s;
    const Point c = s.center;
    const Matrix2 L = s.L;
    const double h = s.h;
    ns.u_h = [u, c, L, h](const Point& z) { return u(c + L * z) / h; };
    ns.f_h = [f, c, L](const Point& z) { return f(c + L * z); };
    return ns;
}

SampleSet NormalizedSolution::rhs_samples(int n) const {
    if (n < 2) throw SectionError("need at least 2 samples per axis");
    const Region z = section.region();
    const Matrix2 Li = section.L.inverse();
    double reach = 0.0;
    for (const Point& p : section.polygon) reach = std::max(reach, (Li * (p - section.center)).norm());
    std::vector<Point> pts;
    std::vector<double> vals;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Point q(-reach + 2.0 * reach * i / (n - 1), -reach + 2.0 * reach * j / (n - 1));
            if (!z.contains(section.center + section.L * q)) continue;
            pts.push_back(q);
            vals.push_back(f_h(q));
        }
    }
    return SampleSet::region(std::move(pts), std::move(vals));
}

void EccentricityTrace::write_csv(const std::string& path) const {
    std::ofstream out(path);
    write_header(out, path, "h,axis_major,axis_minor,eccentricity");
    for (const auto& r : rows) out << r.h << ',' << r.axis_major << ',' << r.axis_minor << ',' << r.eccentricity << '\n';
}

EccentricityTrace eccentricity_trace(const Sampler& u, const std::vector<double>& h_list, int angles,
                                     const Point& center, double max_radius) {
    if (h_list.size() < 3) throw SectionError("need at least 3 heights");
    EccentricityTrace t;
    std::vector<std::pair<double, double>> pts;
    for (double h : h_list) {
        const Section s = extract_section(u, h, angles, center, max_radius);
        t.rows.push_back({h, s.axis_major, s.axis_minor, s.eccentricity, s.sandwich});
        t.max_sandwich = std::max(t.max_sandwich, s.sandwich);
        pts.emplace_back(h, s.eccentricity);
    }
    t.fit = fit_exponent(pts);
    return t;
}

double largest_contained_height(const Sampler& u, const Point& center, double radius, int angles) {
    for (int k = 0; k <= 60; ++k) {
        const double h = std::ldexp(1.0, -k);
        try {
            extract_section(u, h, angles, center, radius);
            return h;
        } catch (const SectionError&) {
        }
    }
    throw SectionError("no dyadic section fits inside the disc");
}

StrictConvexityEstimate measure_strict_convexity(const Sampler& u, const std::function<Point(const Point&)>& du,
                                                 const Point& center, double radius, std::size_t pair_budget,
                                                 const Point& dir, std::uint64_t seed) {
    const int scales = 8;
    const std::size_t per_scale = pair_budget / scales;
    if (per_scale < 4) throw SectionError("insufficient pairs");
    if (!(radius > 0.0)) throw SectionError("probe radius must be > 0");
    const bool on_line = dir.norm() > 0.0;
    const Point e = on_line ? Point(dir.normalized()) : Point::Zero();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StrictConvexityEstimate est;
    std::vector<std::pair<double, double>> lower;
    std::vector<std::pair<double, double>> all;  // (distance, defect)
    for (int s = 0; s < scales; ++s) {
        const double d = radius * std::ldexp(1.0, -s);
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < per_scale; ++k) {
            Point x, z;
            if (on_line) {
                // Include the pair anchored at the centre, then random placements.
                const double a = k == 0 ? 0.0 : (2.0 * unit(rng) - 1.0) * (radius - d);
                const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
                x = center + a * e;
                z = x + sgn * d * e;
            } else {
                const double th = 2.0 * kPi * unit(rng);
                const double rr = (radius - d) * std::sqrt(unit(rng));
                const double ph = 2.0 * kPi * unit(rng);
                x = k == 0 ? center : Point(center + rr * Point(std::cos(th), std::sin(th)));
                z = x + d * Point(std::cos(ph), std::sin(ph));
            }
            const double defect = u(z) - u(x) - du(x).dot(z - x);
            m = std::min(m, defect);
            all.emplace_back(d, defect);
            ++est.pairs;
        }
        if (!(m > 0.0)) throw SectionError("no positive c0: u is not strictly convex on the probe");
        lower.emplace_back(d, m);
    }
    const ExponentFit fit = fit_exponent(lower);
    est.sigma = fit.slope;
    est.r_squared = fit.r_squared;
    est.samples = lower;
    est.c0 = std::numeric_limits<double>::infinity();
    for (const auto& [d, defect] : all) est.c0 = std::min(est.c0, defect / std::pow(d, est.sigma));
    return est;
}

Quadratic Quadratic::unit_determinant() const {
    const double det = (2.0 * A).determinant();
    if (!(det > 0.0) || !(A(0, 0) > 0.0)) throw SectionError("quadratic is not strictly convex");
    Quadratic q = *this;
    const double s = 1.0 / std::sqrt(det);
    q.c *= s;
    q.b *= s;
    q.A *= s;
    return q;
}

Quadratic fit_quadratic(const std::vector<Point>& x, const std::vector<double>& v, const Point& center) {
    if (x.size() < 6 || x.size() != v.size()) throw SectionError("need at least 6 samples for a quadratic fit");
    Eigen::MatrixXd B(x.size(), 6);
    Eigen::VectorXd y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Point p = x[i] - center;
        B.row(i) << 1.0, p.x(), p.y(), p.x() * p.x(), 2.0 * p.x() * p.y(), p.y() * p.y();
        y(i) = v[i];
    }
    const Eigen::VectorXd c = B.colPivHouseholderQr().solve(y);
    Quadratic q;
    q.c = c(0);
    q.b = Point(c(1), c(2));
    q.A << c(3), c(4), c(4), c(5);
    return q;
}

double BlowupTrace::max_growth() const {
    double g = 0.0;
    for (std::size_t k = 1; k < steps.size(); ++k) g = std::max(g, steps[k].defect / steps[k - 1].defect);
    return g;
}

double BlowupTrace::min_growth() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < steps.size(); ++k) g = std::min(g, steps[k].defect / steps[k - 1].defect);
    return g;
}

double BlowupTrace::variation() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : steps) {
        lo = std::min(lo, s.defect);
        hi = std::max(hi, s.defect);
    }
    if (hi == 0.0) return 1.0;
    return hi / lo;
}

double BlowupTrace::growth_over_first() const {
    double hi = 0.0;
    for (const auto& s : steps) hi = std::max(hi, s.defect);
    if (hi == 0.0) return 1.0;
    return hi / steps.front().defect;
}

void BlowupTrace::write_csv(const std::string& path) const {
    std::ofstream out(path);
    write_header(out, path, "k,radius,defect,drift");
    for (const auto& s : steps) out << s.k << ',' << s.radius << ',' << s.defect << ',' << s.drift << '\n';
}

namespace {

using BallSampler = std::function<void(double radius, std::vector<Point>&, std::vector<double>&)>;

BlowupTrace track(const BallSampler& ball, const Point& center, double alpha, double r_hat, int steps) {
    if (!(r_hat > 0.0 && r_hat < 1.0)) throw SectionError("r_hat must lie in (0, 1)");
    if (steps < 1) throw SectionError("need at least one step");
    BlowupTrace t;
    t.alpha = alpha;
    t.r_hat = r_hat;
    for (int k = 1; k <= steps; ++k) {
        BlowupStep st;
        st.k = k;
        st.radius = std::pow(r_hat, k);
        std::vector<Point> x;
        std::vector<double> v;
        ball(st.radius, x, v);
        if (x.size() < 25) throw SectionError("resolution exhausted at k = " + std::to_string(k));
        st.q = fit_quadratic(x, v, center);
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(v[i] - st.q(x[i] - center)));
        st.defect = err / std::pow(st.radius, 2.0 + alpha);
        st.samples = x.size();
        t.steps.push_back(st);
    }
    for (std::size_t k = 0; k + 1 < t.steps.size(); ++k) {
        t.steps[k].drift = (t.steps[k].q.A - t.steps[k + 1].q.A).norm() / std::pow(t.steps[k].radius, alpha);
    }
    return t;
}

}  // namespace

BlowupTrace blowup_track(const Sampler& u, double alpha, double r_hat, int steps, const Point& center) {
    return track(
        [&](double radius, std::vector<Point>& x, std::vector<double>& v) {
            const int m = 17;
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    const Point p = center + radius * Point(-1.0 + 2.0 * i / (m - 1), -1.0 + 2.0 * j / (m - 1));
                    if ((p - center).norm() > radius) continue;
                    x.push_back(p);
                    v.push_back(u(p));
                }
            }
        },
        center, alpha, r_hat, steps);
}

BlowupTrace blowup_track(const GridFunction& u, double alpha, double r_hat, int steps, const Point& center) {
    const Domain& d = u.domain();
    return track(
        [&](double radius, std::vector<Point>& x, std::vector<double>& v) {
            for (std::size_t k = 0; k < d.size(); ++k) {
                if (d.kind(k) == NodeKind::Outside) continue;
                const Point p = d.node(k);
                if ((p - center).norm() > radius) continue;
                x.push_back(p);
                v.push_back(u[k]);
            }
        },
        center, alpha, r_hat, steps);
}

ChainBound covering_chain(const Sampler& u, const std::function<Point(const Point&)>& du,
                          const std::function<Matrix2(const Point&)>& d2u, const Point& x, const Point& y,
                          double h_bar) {
    if (!(h_bar > 0.0)) throw SectionError("section height must be > 0");
    ChainBound out;
    out.direct = (d2u(x) - d2u(y)).norm();
    for (std::size_t n = 1; n <= (std::size_t{1} << 20); n *= 2) {
        std::vector<Point> pts;
        for (std::size_t i = 0; i <= n; ++i) pts.push_back(x + (y - x) * (static_cast<double>(i) / n));
        bool linked = true;
        for (std::size_t i = 0; i < n && linked; ++i) {
            // p_{i+1} in p_i + (Z - p_i) / 2 iff p_i + 2 (p_{i+1} - p_i) lies in Z.
            const Point q = pts[i] + 2.0 * (pts[i + 1] - pts[i]);
            const double lift = u(q) - u(pts[i]) - du(pts[i]).dot(q - pts[i]);
            linked = lift < h_bar;
        }
        if (!linked) continue;
        for (std::size_t i = 0; i < n; ++i) out.bound += (d2u(pts[i + 1]) - d2u(pts[i])).norm();
        out.points = std::move(pts);
        return out;
    }
    throw SectionError("section extraction failure along the chain");
}

LocalizationReport localization_experiment(const Section& s, const Sampler& u, const Sampler& f, double delta, double eps_hat,
                                 const SolverConfig& config, int n, double r_hat, double alpha) {
    const Region region = s.region();
    const Point lo = region.bbox_min(), hi = region.bbox_max();
    const double h = std::max(hi.x() - lo.x(), hi.y() - lo.y()) / (n - 1);
    const Domain domain(region, h, s.center);
    LocalizationReport rep;
    rep.h = s.h;
    for (std::size_t k = 0; k < domain.size(); ++k) {
        if (domain.kind(k) != NodeKind::Outside) rep.f_minus_one = std::max(rep.f_minus_one, std::abs(f(domain.node(k)) - 1.0));
    }
    if (rep.f_minus_one > delta * eps_hat * (1.0 + 1e-12)) throw SectionError("|f - 1| exceeds delta * eps_hat");
    const SolveResult v = solve_dirichlet(domain, f, u, config);
    const SolveResult w = solve_dirichlet(domain, [](const Point&) { return 1.0; }, u, config);
    if (!v.report.converged || !w.report.converged) throw SectionError("solver did not converge");
    rep.u_solve = v.report;
    rep.w_solve = w.report;
    rep.u_minus_w = abp_gap(v.solution, w.solution);
    std::size_t kmin = 0;
    double wmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < domain.size(); ++k) {
        if (domain.kind(k) == NodeKind::Unknown && w.solution[k] < wmin) {
            wmin = w.solution[k];
            kmin = k;
        }
    }
    const Point m = domain.node(kmin);
    std::vector<Point> x;
    std::vector<double> val;
    for (std::size_t k = 0; k < domain.size(); ++k) {
        if (domain.kind(k) == NodeKind::Outside || (domain.node(k) - m).norm() > r_hat) continue;
        x.push_back(domain.node(k));
        val.push_back(w.solution[k]);
    }
    rep.q_hat = fit_quadratic(x, val, m);
    for (double r = r_hat; r >= 2.0 * h; r *= 0.5) {
        double err = 0.0;
        for (std::size_t k = 0; k < domain.size(); ++k) {
            if (domain.kind(k) == NodeKind::Outside || (domain.node(k) - m).norm() > r) continue;
            err = std::max(err, std::abs(v.solution[k] - rep.q_hat(domain.node(k) - m)));
        }
        rep.defects.emplace_back(r, err / std::pow(r, 2.0 + alpha));
    }
    return rep;
}

}  // namespace malab
