#pragma once

#include <vector>

#include <Eigen/Core>

namespace malab::testing {

inline double radical_inverse(unsigned i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * (i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

/// Halton points in the annulus r_min <= |x| < r_max (rejection from the square).
inline std::vector<Eigen::Vector2d> halton_annulus(std::size_t count, double r_min, double r_max) {
    std::vector<Eigen::Vector2d> pts;
    for (unsigned i = 1; pts.size() < count; ++i) {
        const Eigen::Vector2d x{r_max * (2.0 * radical_inverse(i, 2) - 1.0), r_max * (2.0 * radical_inverse(i, 3) - 1.0)};
        const double n = x.norm();
        if (n >= r_min && n < r_max) pts.push_back(x);
    }
    return pts;
}

}  // namespace malab::testing
