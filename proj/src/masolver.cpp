#include "malab/masolver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "malab/error.hpp"

namespace malab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

// ---------------------------------------------------------------- Region

Region Region::disc(const Point& center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw SolverError("disc radius must be > 0");
    Region r;
    r.disc_ = true;
    r.center_ = center;
    r.radius_ = radius;
    return r;
}

Region Region::polygon(std::vector<Point> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw SolverError("polygon needs at least 3 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += cross(vertices[i], vertices[(i + 1) % n]);
    if (!(std::abs(area2) > 0.0)) throw SolverError("degenerate polygon");
    if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
    Region r;
    r.disc_ = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = vertices[i];
        const Point& b = vertices[(i + 1) % n];
        const Point& c = vertices[(i + 2) % n];
        if (!(cross(b - a, c - b) > 0.0)) throw SolverError("polygon is not strictly convex");
        const Point e = b - a;
        const Point nrm = Point(e.y(), -e.x()).normalized();
        r.normals_.push_back(nrm);
        r.offsets_.push_back(nrm.dot(a));
    }
    r.center_ = Point::Zero();
    for (const Point& v : vertices) r.center_ += v / static_cast<double>(n);
    r.vertices_ = std::move(vertices);
    return r;
}

Region Region::rectangle(const Point& lo, const Point& hi) {
    if (!(hi.x() > lo.x() && hi.y() > lo.y())) throw SolverError("empty rectangle");
    return polygon({lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}});
}

double Region::signed_distance(const Point& x) const {
    if (disc_) return (x - center_).norm() - radius_;
    double d = -kInf;
    for (std::size_t i = 0; i < normals_.size(); ++i) d = std::max(d, normals_[i].dot(x) - offsets_[i]);
    return d;
}

double Region::exit_fraction(const Point& a, const Point& b) const {
    const Point d = b - a;
    if (disc_) {
        const Point p = a - center_;
        const double A = d.squaredNorm();
        const double B = p.dot(d);
        const double C = p.squaredNorm() - radius_ * radius_;
        const double disc = std::max(B * B - A * C, 0.0);
        // Positive root, written to avoid cancellation.
        return B <= 0.0 ? (-B + std::sqrt(disc)) / A : -C / (B + std::sqrt(disc));
    }
    double t = kInf;
    for (std::size_t i = 0; i < normals_.size(); ++i) {
        const double nd = normals_[i].dot(d);
        if (nd > 0.0) t = std::min(t, (offsets_[i] - normals_[i].dot(a)) / nd);
    }
    return std::max(t, 0.0);
}

Point Region::bbox_min() const {
    if (disc_) return center_ - Point(radius_, radius_);
    Point m = vertices_.front();
    for (const Point& v : vertices_) m = m.cwiseMin(v);
    return m;
}

Point Region::bbox_max() const {
    if (disc_) return center_ + Point(radius_, radius_);
    Point m = vertices_.front();
    for (const Point& v : vertices_) m = m.cwiseMax(v);
    return m;
}

// ---------------------------------------------------------------- Domain

Domain::Domain(Region region, double h, const Point& lattice_origin, double snap_fraction)
    : region_(std::move(region)), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw SolverError("grid spacing must be > 0");
    const Point lo = region_.bbox_min();
    const Point hi = region_.bbox_max();
    const int margin = 2;
    const int i0 = static_cast<int>(std::ceil((lo.x() - lattice_origin.x()) / h - 1e-9)) - margin;
    const int i1 = static_cast<int>(std::floor((hi.x() - lattice_origin.x()) / h + 1e-9)) + margin;
    const int j0 = static_cast<int>(std::ceil((lo.y() - lattice_origin.y()) / h - 1e-9)) - margin;
    const int j1 = static_cast<int>(std::floor((hi.y() - lattice_origin.y()) / h + 1e-9)) + margin;
    nx_ = i1 - i0 + 1;
    ny_ = j1 - j0 + 1;
    if (static_cast<double>(nx_) * ny_ > 5e7) throw SolverError("lattice too large");
    anchor_ = lattice_origin + h * Point(i0, j0);
    kinds_.resize(static_cast<std::size_t>(nx_) * ny_);
    const double snap = snap_fraction * h;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const double d = region_.signed_distance(node(i, j));
            NodeKind k = NodeKind::Outside;
            if (d < -snap) {
                k = NodeKind::Unknown;
                ++unknowns_;
            } else if (d <= snap) {
                k = NodeKind::Dirichlet;
            }
            kinds_[index(i, j)] = k;
        }
    }
    if (unknowns_ == 0) throw SolverError("domain has no interior nodes");
}

Domain Domain::disc(const Point& center, double radius, int n) {
    if (n < 5) throw SolverError("need at least 5 nodes across the disc");
    return Domain(Region::disc(center, radius), 2.0 * radius / (n - 1), center);
}

bool Domain::same_lattice(const Domain& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && h_ == other.h_ && anchor_ == other.anchor_ &&
           kinds_ == other.kinds_;
}

// ---------------------------------------------------------------- GridFunction

GridFunction::GridFunction(Domain domain, std::vector<double> values, Sampler boundary)
    : domain_(std::move(domain)), values_(std::move(values)), boundary_(std::move(boundary)) {
    if (values_.size() != domain_.size()) throw SolverError("value count does not match the lattice");
}

double GridFunction::interpolate(const Point& x) const {
    const double h = domain_.h();
    const double fx = (x.x() - domain_.anchor().x()) / h;
    const double fy = (x.y() - domain_.anchor().y()) / h;
    const int nx = domain_.nx(), ny = domain_.ny();
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, nx - 2);
    j = std::clamp(j, 0, ny - 2);
    const double sx = fx - i, sy = fy - j;
    auto weights = [](double s, double w[4]) {
        const double s2 = s * s, s3 = s2 * s;
        w[0] = 0.5 * (-s3 + 2.0 * s2 - s);
        w[1] = 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
        w[2] = 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
        w[3] = 0.5 * (s3 - s2);
    };
    double wx[4], wy[4];
    weights(sx, wx);
    weights(sy, wy);
    double v = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int jj = std::clamp(j - 1 + b, 0, ny - 1);
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * at(std::clamp(i - 1 + a, 0, nx - 1), jj);
        v += wy[b] * row;
    }
    return v;
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (domain_.kind(k) != NodeKind::Outside) m = std::max(m, std::abs(values_[k]));
    }
    return m;
}

void GridFunction::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw SolverError("cannot open " + path);
    os.precision(17);
    os << "x1,x2,value\n";
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (domain_.kind(k) == NodeKind::Outside) continue;
        const Point x = domain_.node(k);
        os << x.x() << ',' << x.y() << ',' << values_[k] << '\n';
    }
}

GridFunction sample(const Domain& domain, const Sampler& fn) {
    std::vector<double> v(domain.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(domain.node(k));
    return GridFunction(domain, std::move(v), fn);
}

// ---------------------------------------------------------------- scheme

std::string SolveReport::to_json() const {
    nlohmann::json j = {{"iterations", iterations},       {"residual", residual},
                        {"floor_activations", floor_activations}, {"fallbacks", fallbacks},
                        {"wall_seconds", wall_seconds},   {"converged", converged},
                        {"unknowns", unknowns}};
    return j.dump();
}

std::vector<std::pair<int, int>> stencil_directions(int pairs) {
    if (pairs < 2) throw SolverError("stencil_directions must be >= 2");
    // Primitive vectors (p, q) with p > 0, q >= 0 ordered by length; each is
    // paired with its rotation (-q, p).
    std::vector<std::pair<int, int>> base;
    for (int m = 1; static_cast<int>(base.size()) < pairs; ++m) {
        std::vector<std::pair<int, int>> shell;
        for (int p = 1; p <= m; ++p) {
            for (int q = 0; q <= m; ++q) {
                if (std::max(p, q) != m || std::gcd(p, q) != 1) continue;
                shell.emplace_back(p, q);
            }
        }
        std::stable_sort(shell.begin(), shell.end(), [](auto a, auto b) {
            const int na = a.first * a.first + a.second * a.second;
            const int nb = b.first * b.first + b.second * b.second;
            if (na != nb) return na < nb;
            return a.first > b.first;
        });
        for (auto& v : shell) {
            if (static_cast<int>(base.size()) < pairs) base.push_back(v);
        }
    }
    std::vector<std::pair<int, int>> out;
    for (auto [p, q] : base) {
        out.emplace_back(p, q);
        out.emplace_back(-q, p);
    }
    return out;
}

namespace {

struct Arm {
    long node = -1;     // lattice index, or -1 for a boundary intercept
    double value = 0.0; // boundary value when node < 0
    double len = 0.0;
};

// Wide stencil on the unknown nodes of a domain.
class Scheme {
public:
    Scheme(const Domain& domain, const Sampler& boundary, const SolverConfig& cfg)
        : dom_(domain), cfg_(cfg), dirs_(stencil_directions(cfg.stencil_directions)) {
        const std::size_t nd = dirs_.size();
        col_.assign(dom_.size(), -1);
        for (std::size_t k = 0; k < dom_.size(); ++k) {
            if (dom_.kind(k) != NodeKind::Unknown) continue;
            col_[k] = static_cast<long>(rows_.size());
            rows_.push_back(k);
        }
        arms_.resize(rows_.size() * nd * 2);
        const int nx = dom_.nx(), ny = dom_.ny();
        const double h = dom_.h();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const std::size_t k = rows_[r];
            const int i = static_cast<int>(k % nx), j = static_cast<int>(k / nx);
            const Point x = dom_.node(i, j);
            for (std::size_t d = 0; d < nd; ++d) {
                for (int s = 0; s < 2; ++s) {
                    const int sg = s == 0 ? 1 : -1;
                    const int ti = i + sg * dirs_[d].first, tj = j + sg * dirs_[d].second;
                    Arm& arm = arms_[(r * nd + d) * 2 + s];
                    const double full = h * std::hypot(dirs_[d].first, dirs_[d].second);
                    if (ti >= 0 && tj >= 0 && ti < nx && tj < ny &&
                        dom_.kind(dom_.index(ti, tj)) != NodeKind::Outside) {
                        arm.node = static_cast<long>(dom_.index(ti, tj));
                        arm.len = full;
                    } else {
                        const Point target = dom_.node(ti, tj);
                        const double t = std::min(dom_.region().exit_fraction(x, target), 1.0);
                        const Point hit = x + t * (target - x);
                        arm.node = -1;
                        arm.value = boundary(hit);
                        arm.len = t * full;
                        if (!(arm.len > 0.0)) throw SolverError("degenerate boundary arm");
                    }
                }
            }
        }
    }

    std::size_t rows() const { return rows_.size(); }
    std::size_t node_of(std::size_t r) const { return rows_[r]; }
    long col(std::size_t k) const { return col_[k]; }
    std::size_t dir_count() const { return dirs_.size(); }

    // Directional second difference d at row r with centre value u0.
    double diff(const std::vector<double>& v, std::size_t r, std::size_t d, double u0) const {
        const Arm& p = arms_[(r * dirs_.size() + d) * 2];
        const Arm& m = arms_[(r * dirs_.size() + d) * 2 + 1];
        const double up = p.node >= 0 ? v[p.node] : p.value;
        const double um = m.node >= 0 ? v[m.node] : m.value;
        return 2.0 / (p.len + m.len) * ((up - u0) / p.len + (um - u0) / m.len);
    }

    double pair_value(double dv, double dw) const {
        const double e = cfg_.convexity_floor;
        return std::max(dv, e) * std::max(dw, e) + std::min(dv, e) + std::min(dw, e);
    }

    // Operator value at row r with centre value u0; reports the active pair.
    double op(const std::vector<double>& v, std::size_t r, double u0, std::size_t* active = nullptr) const {
        double best = kInf;
        std::size_t arg = 0;
        for (std::size_t p = 0; p < dirs_.size() / 2; ++p) {
            const double g = pair_value(diff(v, r, 2 * p, u0), diff(v, r, 2 * p + 1, u0));
            if (g < best) {
                best = g;
                arg = p;
            }
        }
        if (active) *active = arg;
        return best;
    }

    // Adds d(D_d)/d(values) times `scale` into the triplet list of row r.
    void diff_jacobian(std::size_t r, std::size_t d, double scale,
                       std::vector<Eigen::Triplet<double>>& trip) const {
        const Arm& p = arms_[(r * dirs_.size() + d) * 2];
        const Arm& m = arms_[(r * dirs_.size() + d) * 2 + 1];
        const double c = 2.0 / (p.len + m.len);
        const long rr = static_cast<long>(r);
        trip.emplace_back(rr, rr, -scale * c * (1.0 / p.len + 1.0 / m.len));
        if (p.node >= 0 && col_[p.node] >= 0) trip.emplace_back(rr, col_[p.node], scale * c / p.len);
        if (m.node >= 0 && col_[m.node] >= 0) trip.emplace_back(rr, col_[m.node], scale * c / m.len);
    }

private:
    const Domain& dom_;
    SolverConfig cfg_;
    std::vector<std::pair<int, int>> dirs_;
    std::vector<long> col_;
    std::vector<std::size_t> rows_;
    std::vector<Arm> arms_;
};

double cell_average(const Sampler& rhs, const Point& x, double h) {
    const double q = 0.5 * h;
    return 0.25 * (rhs(x + Point(q, q)) + rhs(x + Point(-q, q)) + rhs(x + Point(q, -q)) + rhs(x + Point(-q, -q)));
}

std::vector<double> sample_rhs(const Scheme& s, const Domain& dom, const Sampler& rhs) {
    std::vector<double> f(s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const Point x = dom.node(s.node_of(r));
        f[r] = cell_average(rhs, x, dom.h());
        if (!(f[r] > 0.0) || !std::isfinite(f[r])) {
            throw SolverError("rhs must be positive and finite; got " + std::to_string(f[r]) + " near (" +
                              std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")");
        }
    }
    return f;
}

double residual_norm(const Scheme& s, const std::vector<double>& v, const std::vector<double>& f,
                     std::vector<double>* res = nullptr) {
    double m = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const double e = s.op(v, r, v[s.node_of(r)]) - f[r];
        if (res) (*res)[r] = e;
        m = std::max(m, std::abs(e));
    }
    return m;
}

std::vector<double> boundary_values(const Domain& dom, const Sampler& boundary) {
    std::vector<double> v(dom.size(), 0.0);
    for (std::size_t k = 0; k < dom.size(); ++k) {
        if (dom.kind(k) != NodeKind::Unknown) v[k] = boundary(dom.node(k));
    }
    return v;
}

// Discrete Poisson problem D_(1,0) v + D_(0,1) v = 2 sqrt(f) on the unknowns.
void poisson_initializer(const Scheme& s, const std::vector<double>& f, std::vector<double>& v) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b(static_cast<Eigen::Index>(s.rows()));
    std::vector<double> zero = v;
    for (std::size_t r = 0; r < s.rows(); ++r) zero[s.node_of(r)] = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        s.diff_jacobian(r, 0, 1.0, trip);
        s.diff_jacobian(r, 1, 1.0, trip);
        // The operator is affine; its value at zero unknowns is the constant part.
        const double c = s.diff(zero, r, 0, 0.0) + s.diff(zero, r, 1, 0.0);
        b(static_cast<Eigen::Index>(r)) = 2.0 * std::sqrt(f[r]) - c;
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(s.rows()), static_cast<Eigen::Index>(s.rows()));
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("Poisson initializer factorization failed");
    const Eigen::VectorXd x = lu.solve(b);
    for (std::size_t r = 0; r < s.rows(); ++r) v[s.node_of(r)] = x(static_cast<Eigen::Index>(r));
}

// Solves the scalar equation op(u0) = f at row r; op is decreasing in u0.
void relax_node(const Scheme& s, std::vector<double>& v, std::size_t r, double f) {
    const std::size_t k = s.node_of(r);
    auto g = [&](double u0) { return s.op(v, r, u0) - f; };
    double u = v[k];
    double gu = g(u);
    if (gu == 0.0) return;
    double step = std::max(1e-12, 1e-3 * (std::abs(u) + 1e-3));
    double lo = u, hi = u;
    double glo = gu, ghi = gu;
    // Bracket the root: g(lo) > 0 > g(hi).
    for (int it = 0; it < 200 && !(glo > 0.0 && ghi < 0.0); ++it) {
        if (glo <= 0.0) {
            lo -= step;
            glo = g(lo);
        }
        if (ghi >= 0.0) {
            hi += step;
            ghi = g(hi);
        }
        step *= 2.0;
    }
    if (!(glo > 0.0 && ghi < 0.0)) return;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v[k] = 0.5 * (lo + hi);
}

SolveResult run_newton(const Domain& domain, const Sampler& rhs, const Sampler& boundary, const SolverConfig& cfg,
                       const std::vector<double>* initial) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.stencil_directions < 2) throw SolverError("stencil_directions must be >= 2");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw SolverError("damping must lie in (0, 1]");
    if (!(cfg.convexity_floor >= 0.0)) throw SolverError("convexity_floor must be >= 0");
    const Scheme s(domain, boundary, cfg);
    const std::vector<double> f = sample_rhs(s, domain, rhs);
    std::vector<double> v = boundary_values(domain, boundary);
    if (initial) {
        for (std::size_t r = 0; r < s.rows(); ++r) v[s.node_of(r)] = (*initial)[s.node_of(r)];
    } else {
        poisson_initializer(s, f, v);
    }

    SolveReport rep;
    rep.unknowns = s.rows();
    std::vector<double> res(s.rows());
    double norm = residual_norm(s, v, f, &res);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    const Eigen::Index n = static_cast<Eigen::Index>(s.rows());
    while (norm > cfg.newton_tol && rep.iterations < cfg.max_iters) {
        ++rep.iterations;
        trip.clear();
        Eigen::VectorXd b(n);
        for (std::size_t r = 0; r < s.rows(); ++r) {
            const double u0 = v[s.node_of(r)];
            std::size_t p = 0;
            s.op(v, r, u0, &p);
            const double dv = s.diff(v, r, 2 * p, u0);
            const double dw = s.diff(v, r, 2 * p + 1, u0);
            const double e = cfg.convexity_floor;
            s.diff_jacobian(r, 2 * p, dv > e ? std::max(dw, e) : 1.0, trip);
            s.diff_jacobian(r, 2 * p + 1, dw > e ? std::max(dv, e) : 1.0, trip);
            b(static_cast<Eigen::Index>(r)) = -res[r];
        }
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(trip.begin(), trip.end());
        lu.compute(J);
        bool accepted = false;
        if (lu.info() == Eigen::Success) {
            const Eigen::VectorXd dx = lu.solve(b);
            std::vector<double> trial = v;
            for (double theta = cfg.damping; theta >= 1.0 / 1024.0; theta *= 0.5) {
                for (std::size_t r = 0; r < s.rows(); ++r) {
                    trial[s.node_of(r)] = v[s.node_of(r)] + theta * dx(static_cast<Eigen::Index>(r));
                }
                std::vector<double> tres(s.rows());
                const double tnorm = residual_norm(s, trial, f, &tres);
                if (std::isfinite(tnorm) && tnorm < norm) {
                    v.swap(trial);
                    res.swap(tres);
                    norm = tnorm;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            ++rep.fallbacks;
            for (int sweep = 0; sweep < cfg.gauss_seidel_sweeps; ++sweep) {
                for (std::size_t r = 0; r < s.rows(); ++r) relax_node(s, v, r, f[r]);
            }
            const double before = norm;
            norm = residual_norm(s, v, f, &res);
            if (!(norm < before)) break;  // stalled
        }
    }
    rep.residual = norm;
    rep.converged = norm <= cfg.newton_tol;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        const double u0 = v[s.node_of(r)];
        std::size_t p = 0;
        s.op(v, r, u0, &p);
        if (std::min(s.diff(v, r, 2 * p, u0), s.diff(v, r, 2 * p + 1, u0)) < cfg.convexity_floor) {
            ++rep.floor_activations;
        }
    }
    // Extension values outside the region for interpolation.
    for (std::size_t k = 0; k < domain.size(); ++k) {
        if (domain.kind(k) == NodeKind::Outside) v[k] = boundary(domain.node(k));
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {GridFunction(domain, std::move(v), boundary), rep};
}

}  // namespace

SolveResult solve_dirichlet(const Domain& domain, const Sampler& rhs, const Sampler& boundary,
                            const SolverConfig& config) {
    return run_newton(domain, rhs, boundary, config, nullptr);
}

SolveResult solve_dirichlet(const Domain& domain, const Sampler& rhs, const Sampler& boundary,
                            const SolverConfig& config, const GridFunction& initial) {
    if (!initial.domain().same_lattice(domain)) throw SolverError("initial guess lives on a different lattice");
    return run_newton(domain, rhs, boundary, config, &initial.values());
}

GridFunction residual_field(const GridFunction& v, const Sampler& rhs, const SolverConfig& config) {
    if (!v.boundary()) throw SolverError("grid function carries no boundary sampler");
    const Scheme s(v.domain(), v.boundary(), config);
    const std::vector<double> f = sample_rhs(s, v.domain(), rhs);
    std::vector<double> res(s.rows());
    residual_norm(s, v.values(), f, &res);
    std::vector<double> out(v.domain().size(), 0.0);
    for (std::size_t r = 0; r < s.rows(); ++r) out[s.node_of(r)] = res[r];
    return GridFunction(v.domain(), std::move(out));
}

double min_directional_difference(const GridFunction& v, const SolverConfig& config) {
    if (!v.boundary()) throw SolverError("grid function carries no boundary sampler");
    const Scheme s(v.domain(), v.boundary(), config);
    double m = kInf;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (std::size_t d = 0; d < s.dir_count(); ++d) m = std::min(m, s.diff(v.values(), r, d, v[s.node_of(r)]));
    }
    return m;
}

double abp_gap(const GridFunction& v1, const GridFunction& v2) {
    if (!v1.domain().same_lattice(v2.domain())) throw SolverError("grid mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < v1.domain().size(); ++k) {
        if (v1.domain().kind(k) == NodeKind::Unknown) m = std::max(m, std::abs(v1[k] - v2[k]));
    }
    return m;
}

ComparisonReport comparison_check(const GridFunction& v_sub, const GridFunction& v_super, double tolerance) {
    if (!v_sub.domain().same_lattice(v_super.domain())) throw SolverError("grid mismatch");
    const Domain& d = v_sub.domain();
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) == NodeKind::Dirichlet && v_sub[k] > v_super[k] + tolerance) {
            throw SolverError("boundary data disordered: sub exceeds super on the boundary");
        }
    }
    ComparisonReport rep;
    rep.tolerance = tolerance;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d.kind(k) != NodeKind::Unknown) continue;
        const double e = v_sub[k] - v_super[k];
        if (e > rep.max_violation) {
            rep.max_violation = e;
            rep.witness = d.node(k);
        }
        if (e > tolerance) ++rep.violations;
    }
    return rep;
}

SolveResult refine_solve(const GridFunction& coarse, const Point& lo, const Point& hi, int factor, const Sampler& rhs,
                         const SolverConfig& config) {
    if (factor < 1) throw SolverError("refinement factor must be >= 1");
    const Domain& cd = coarse.domain();
    const double h = cd.h();
    const Point a = cd.anchor();
    const Point slo(a.x() + h * std::floor((lo.x() - a.x()) / h + 1e-9), a.y() + h * std::floor((lo.y() - a.y()) / h + 1e-9));
    const Point shi(a.x() + h * std::ceil((hi.x() - a.x()) / h - 1e-9), a.y() + h * std::ceil((hi.y() - a.y()) / h - 1e-9));
    for (const Point& c : {slo, shi, Point(slo.x(), shi.y()), Point(shi.x(), slo.y())}) {
        if (!cd.region().contains(c)) throw SolverError("refinement rectangle leaves the coarse domain");
    }
    const Domain fine(Region::rectangle(slo, shi), h / factor, a);
    const Sampler data = [&coarse](const Point& x) { return coarse.interpolate(x); };
    const GridFunction guess = sample(fine, data);
    SolveResult out = solve_dirichlet(fine, rhs, data, config, guess);
    // The sampler above refers to `coarse`; store a self-contained copy instead.
    auto owned = std::make_shared<GridFunction>(coarse);
    Sampler kept = [owned](const Point& x) { return owned->interpolate(x); };
    return {GridFunction(out.solution.domain(), out.solution.values(), kept), out.report};
}

}  // namespace malab
