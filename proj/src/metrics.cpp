#include "malab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>

#include "malab/error.hpp"

namespace malab {

SampleSet SampleSet::line(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) throw MetricsError("abscissa and value counts differ");
    SampleSet s;
    s.dim = 1;
    s.points.reserve(t.size());
    for (double x : t) s.points.emplace_back(x, 0.0);
    s.values = v;
    return s;
}

SampleSet SampleSet::region(std::vector<Point> p, std::vector<double> v) {
    if (p.size() != v.size()) throw MetricsError("point and value counts differ");
    SampleSet s;
    s.dim = 2;
    s.points = std::move(p);
    s.values = std::move(v);
    return s;
}

void SampleSet::validate() const {
    if (points.size() != values.size()) throw MetricsError("point and value counts differ");
    for (double v : values) {
        if (!std::isfinite(v)) throw MetricsError("non-finite sample value");
    }
    std::vector<std::pair<double, double>> keys;
    keys.reserve(points.size());
    for (const Point& p : points) keys.emplace_back(p.x(), p.y());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) throw MetricsError("repeated abscissa");
}

double holder_quotient(const SampleSet& s, std::size_t i, std::size_t j, double alpha) {
    const double d = (s.points[i] - s.points[j]).norm();
    return std::abs(s.values[i] - s.values[j]) / std::pow(d, alpha);
}

namespace {

constexpr std::size_t kExhaustiveBudget = std::size_t{1} << 21;

struct Best {
    double value = -1.0;
    std::size_t i = 0, j = 0;
    std::size_t examined = 0;

    void offer(const SampleSet& s, std::size_t a, std::size_t b, double alpha) {
        if (a == b) return;
        if (a > b) std::swap(a, b);
        ++examined;
        const double q = holder_quotient(s, a, b, alpha);
        if (q > value || (q == value && std::make_pair(a, b) < std::make_pair(i, j))) {
            value = q;
            i = a;
            j = b;
        }
    }
};

// Static 2-d tree for nearest-neighbour queries.
class Buckets {
public:
    explicit Buckets(const SampleSet& s) : s_(s), order_(s.size()) {
        for (std::size_t k = 0; k < order_.size(); ++k) order_[k] = k;
        build(0, order_.size(), 0);
    }

    // Indices of the m samples closest to x (ties by index).
    std::vector<std::size_t> nearest(const Point& x, std::size_t m) const {
        std::vector<std::pair<double, std::size_t>> heap;
        search(0, order_.size(), 0, x, m, heap);
        std::sort(heap.begin(), heap.end());
        std::vector<std::size_t> out;
        for (const auto& e : heap) out.push_back(e.second);
        return out;
    }

private:
    void build(std::size_t lo, std::size_t hi, int axis) {
        if (hi - lo <= kLeaf) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](std::size_t a, std::size_t b) { return s_.points[a][axis] < s_.points[b][axis]; });
        build(lo, mid, 1 - axis);
        build(mid + 1, hi, 1 - axis);
    }

    void offer(std::size_t k, const Point& x, std::size_t m, std::vector<std::pair<double, std::size_t>>& heap) const {
        const std::pair<double, std::size_t> e{(s_.points[k] - x).squaredNorm(), k};
        if (heap.size() < m) {
            heap.push_back(e);
            std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = e;
            std::push_heap(heap.begin(), heap.end());
        }
    }

    void search(std::size_t lo, std::size_t hi, int axis, const Point& x, std::size_t m,
                std::vector<std::pair<double, std::size_t>>& heap) const {
        if (lo >= hi) return;
        if (hi - lo <= kLeaf) {
            for (std::size_t k = lo; k < hi; ++k) offer(order_[k], x, m, heap);
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t k = order_[mid];
        const double d = x[axis] - s_.points[k][axis];
        offer(k, x, m, heap);
        if (d < 0) {
            search(lo, mid, 1 - axis, x, m, heap);
            if (heap.size() < m || d * d <= heap.front().first) search(mid + 1, hi, 1 - axis, x, m, heap);
        } else {
            search(mid + 1, hi, 1 - axis, x, m, heap);
            if (heap.size() < m || d * d <= heap.front().first) search(lo, mid, 1 - axis, x, m, heap);
        }
    }

    static constexpr std::size_t kLeaf = 8;
    const SampleSet& s_;
    std::vector<std::size_t> order_;
};

}  // namespace

HolderEstimate holder_seminorm(const SampleSet& s, double alpha, HolderStrategy strategy, std::uint64_t seed) {
    if (s.size() < 2) throw MetricsError("need at least 2 samples");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw MetricsError("alpha must lie in (0, 1]");
    s.validate();
    const std::size_t n = s.size();
    Best best;
    const bool exhaustive = strategy == HolderStrategy::Exhaustive || n * (n - 1) / 2 <= kExhaustiveBudget;
    if (exhaustive) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) best.offer(s, i, j, alpha);
        }
    } else {
        const Buckets buckets(s);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Point lo = s.points.front(), hi = lo;
        for (const Point& p : s.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const double diam = std::max((hi - lo).norm(), 1e-300);
        const double nearest = (s.points[buckets.nearest(s.points[0], 2).back()] - s.points[0]).norm();
        const int octaves = std::max(1, static_cast<int>(std::ceil(std::log2(diam / std::max(nearest, 1e-300)))) + 1);
        const double two_pi = 2.0 * std::acos(-1.0);
        // Every sample anchors one random pair per octave (at least 64 pairs per bin).
        std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> top;
        for (int b = 0; b < octaves; ++b) {
            const double dmax = diam * std::ldexp(1.0, -b);
            const std::size_t count = std::max<std::size_t>(64, n);
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t a = count == n ? k : pick(rng);
                const double d = dmax * (0.5 + 0.5 * unit(rng));
                const double th = two_pi * unit(rng);
                const Point target = s.dim == 1 ? Point(s.points[a].x() + (unit(rng) < 0.5 ? -d : d), 0.0)
                                                : Point(s.points[a] + d * Point(std::cos(th), std::sin(th)));
                const std::size_t c = buckets.nearest(target, 1).front();
                if (c == a) continue;
                best.offer(s, a, c, alpha);
                top.push_back({holder_quotient(s, a, c, alpha), {std::min(a, c), std::max(a, c)}});
                if (top.size() > 4096) {
                    std::nth_element(top.begin(), top.begin() + 64, top.end(), std::greater<>());
                    top.resize(64);
                }
            }
        }
        std::sort(top.begin(), top.end(), std::greater<>());
        top.erase(std::unique(top.begin(), top.end()), top.end());
        if (top.size() > 8) top.resize(8);
        // Local refinement around the leading candidates until the witness stops moving.
        for (const auto& cand : top) {
            std::size_t ci = cand.second.first, cj = cand.second.second;
            for (int round = 0; round < 32; ++round) {
                Best local;
                local.offer(s, ci, cj, alpha);
                const auto near_i = buckets.nearest(s.points[ci], 32);
                const auto near_j = buckets.nearest(s.points[cj], 32);
                for (std::size_t a : near_i) {
                    for (std::size_t c : near_j) local.offer(s, a, c, alpha);
                }
                for (std::size_t a : near_i) {
                    for (std::size_t c : near_i) local.offer(s, a, c, alpha);
                }
                best.examined += local.examined;
                best.offer(s, local.i, local.j, alpha);
                if (local.i == ci && local.j == cj) break;
                ci = local.i;
                cj = local.j;
            }
        }
    }
    HolderEstimate out;
    out.alpha = alpha;
    out.value = best.value;
    out.i = best.i;
    out.j = best.j;
    out.p = s.points[best.i];
    out.q = s.points[best.j];
    out.strategy = strategy;
    out.pairs_examined = best.examined;
    return out;
}

SampleSet fd_partial22_line(const std::function<double(const Point&)>& v, const std::vector<double>& x2,
                            const std::vector<double>& steps) {
    if (x2.size() != steps.size()) throw MetricsError("one step per abscissa required");
    std::vector<double> out(x2.size());
    for (std::size_t k = 0; k < x2.size(); ++k) {
        const double s = steps[k];
        if (!(s > 0.0)) throw MetricsError("finite-difference step must be > 0");
        out[k] = (v({0.0, x2[k] + s}) - 2.0 * v({0.0, x2[k]}) + v({0.0, x2[k] - s})) / (s * s);
    }
    return SampleSet::line(x2, out);
}

SampleSet fd_partial22_line(const std::function<double(const Point&)>& v, const std::vector<double>& x2, double step) {
    return fd_partial22_line(v, x2, std::vector<double>(x2.size(), step));
}

SampleSet fd_partial22_line(const GridFunction& v, const std::vector<double>& x2, const std::vector<double>& steps) {
    if (x2.size() != steps.size()) throw MetricsError("one step per abscissa required");
    const Region& region = v.domain().region();
    for (std::size_t k = 0; k < x2.size(); ++k) {
        for (double y : {x2[k] - steps[k], x2[k] + steps[k]}) {
            if (!region.contains({0.0, y})) throw MetricsError("out-of-domain stencil at x2 = " + std::to_string(y));
        }
    }
    return fd_partial22_line([&v](const Point& x) { return v.interpolate(x); }, x2, steps);
}

SampleSet fd_partial22_line(const GridFunction& v, const std::vector<double>& x2, double step) {
    return fd_partial22_line(v, x2, std::vector<double>(x2.size(), step));
}

double oscillation(const SampleSet& s, double lo, double hi) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = s.points[k].x();
        if (t < lo || t > hi) continue;
        mn = std::min(mn, s.values[k]);
        mx = std::max(mx, s.values[k]);
    }
    if (!(mx >= mn)) throw MetricsError("empty window");
    return mx - mn;
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw MetricsError("need at least 3 points to fit an exponent");
    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0;
    for (auto [r, v] : points) {
        if (!(r > 0.0) || !(v > 0.0) || !std::isfinite(r) || !std::isfinite(v)) {
            throw MetricsError("exponent fit needs positive finite inputs");
        }
        sx += std::log(r);
        sy += std::log(v);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [r, v] : points) {
        const double dx = std::log(r) - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw MetricsError("exponent fit needs distinct abscissae");
    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    fit.samples = points;
    return fit;
}

void write_samples_csv(const std::string& path, const std::vector<std::pair<double, double>>& samples,
                       const std::string& header) {
    std::ofstream os(path);
    if (!os) throw MetricsError("cannot open " + path);
    os.precision(17);
    os << header << '\n';
    for (auto [a, b] : samples) os << a << ',' << b << '\n';
}

void write_fit_csv(const std::string& path, const ExponentFit& fit) {
    std::ofstream os(path);
    if (!os) throw MetricsError("cannot open " + path);
    os.precision(17);
    os << "slope,intercept,r2\n" << fit.slope << ',' << fit.intercept << ',' << fit.r_squared << '\n';
}

}  // namespace malab
