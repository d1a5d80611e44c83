#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>

namespace alma {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Largest entry of `v`, or `fallback` when `v` is empty.
inline double max_or(const Vec& v, double fallback) {
    return v.size() ? v.maxCoeff() : fallback;
}

/// Largest absolute entry of `v`, 0 when empty.
inline double max_abs(const Vec& v) {
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Elementwise [v]_+ and [v]_-.
inline Vec positive_part(const Vec& v) { return v.cwiseMax(0.0); }
inline Vec negative_part(const Vec& v) { return v.cwiseMin(0.0); }

}  // namespace alma
