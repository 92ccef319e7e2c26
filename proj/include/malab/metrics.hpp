#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "malab/masolver.hpp"

namespace malab {

/// Samples of a function on a line (abscissa in x()) or a planar region.
struct SampleSet {
    int dim = 1;
    std::vector<Point> points;
    std::vector<double> values;

    static SampleSet line(const std::vector<double>& t, const std::vector<double>& v);
    static SampleSet region(std::vector<Point> p, std::vector<double> v);
    std::size_t size() const { return values.size(); }
    /// Throws MetricsError on repeated abscissae or non-finite values.
    void validate() const;
};

enum class HolderStrategy { Exhaustive, Subsampled };

struct HolderEstimate {
    double alpha = 1.0;
    double value = 0.0;
    std::size_t i = 0, j = 0;  // witness indices, i < j
    Point p = Point::Zero(), q = Point::Zero();
    HolderStrategy strategy = HolderStrategy::Exhaustive;
    std::size_t pairs_examined = 0;
};

/// |v_i - v_j| / |p_i - p_j|^alpha, the quantity maximised by holder_seminorm.
double holder_quotient(const SampleSet& s, std::size_t i, std::size_t j, double alpha);

/// Exhaustive search over all pairs, or (subsampled) one random partner per
/// sample in every octave distance bin, then nearest-neighbour refinement
/// around the best candidates. Inputs small enough for 2^21 pairs are always searched
/// exhaustively. The subsampled value is a lower bound of the exhaustive one.
HolderEstimate holder_seminorm(const SampleSet& s, double alpha, HolderStrategy strategy = HolderStrategy::Exhaustive,
                               std::uint64_t seed = 0);

/// Centred second differences in x2 along x1 = 0 with one step per abscissa.
SampleSet fd_partial22_line(const std::function<double(const Point&)>& v, const std::vector<double>& x2,
                            const std::vector<double>& steps);
SampleSet fd_partial22_line(const std::function<double(const Point&)>& v, const std::vector<double>& x2, double step);
/// Same on a discrete solution; every stencil point must lie in the region.
SampleSet fd_partial22_line(const GridFunction& v, const std::vector<double>& x2, const std::vector<double>& steps);
SampleSet fd_partial22_line(const GridFunction& v, const std::vector<double>& x2, double step);

/// max - min over the samples whose abscissa lies in [lo, hi].
double oscillation(const SampleSet& s, double lo, double hi);

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
    std::vector<std::pair<double, double>> samples;
};

/// Least squares line through (log r, log v).
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points);

void write_samples_csv(const std::string& path, const std::vector<std::pair<double, double>>& samples,
                       const std::string& header = "r,value");
void write_fit_csv(const std::string& path, const ExponentFit& fit);

}  // namespace malab
