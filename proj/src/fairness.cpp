#include "alma/fairness.hpp"

#include "alma/errors.hpp"

#include <algorithm>
#include <cmath>

namespace alma {

namespace {

void require_nonzero(const Vec& x) {
    detail::require(x.size() > 0, "Jain's index needs a nonempty vector");
    if (x.squaredNorm() == 0.0) throw DomainError("Jain's index is undefined at the origin");
}

}  // namespace

double jains_index(const Vec& x) {
    require_nonzero(x);
    const double s = x.sum();
    return s * s / (static_cast<double>(x.size()) * x.squaredNorm());
}

Vec jains_gradient(const Vec& x) {
    require_nonzero(x);
    const double n = static_cast<double>(x.size());
    const double norm = x.norm();
    const double q = norm * norm;
    const double J = jains_index(x);
    const double rootJ = std::sqrt(J);
    // sqrt(J) carries the sign of 1^T x so the expression stays exact when
    // the sum is negative.
    const double signed_root = x.sum() >= 0.0 ? rootJ : -rootJ;
    Vec ones = Vec::Ones(x.size());
    return 2.0 * signed_root * (ones / (std::sqrt(n) * norm) - signed_root * x / q);
}

double jains_hessian_quadform(const Vec& x, const Vec& y) {
    require_nonzero(x);
    detail::require(x.size() == y.size(), "Hessian arguments must have equal length");
    const double n = static_cast<double>(x.size());
    const double s = x.sum();
    const double q = x.squaredNorm();
    const double sy = y.sum();
    const double xy = x.dot(y);
    return 2.0 / (n * q) * sy * sy - 8.0 * s / (n * q * q) * sy * xy +
           8.0 * s * s / (n * q * q * q) * xy * xy - 2.0 * s * s / (n * q * q) * y.squaredNorm();
}

double jains_hessian_quadform_orthogonal(const Vec& x, const Vec& y, double orth_tol) {
    require_nonzero(x);
    detail::require(x.size() == y.size(), "Hessian arguments must have equal length");
    Vec g = jains_gradient(x);
    detail::require(std::abs(y.dot(g)) <= orth_tol * std::max(1.0, y.norm() * g.norm()),
                    "reduced Hessian form requires y orthogonal to the gradient");
    const double q = x.squaredNorm();
    const double xy = x.dot(y);
    return -2.0 * jains_index(x) / (q * q) * (q * y.squaredNorm() - xy * xy);
}

Vec smallest_entries(const Vec& x, Index d) {
    detail::require(d >= 0 && d <= x.size(), "prefix length out of range");
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    Vec out(d);
    for (Index i = 0; i < d; ++i) out[i] = v[static_cast<size_t>(i)];
    return out;
}

bool majorizes(const Vec& x, const Vec& y, double tol) {
    detail::require(x.size() == y.size(), "majorization needs vectors of equal length");
    if (std::abs(x.sum() - y.sum()) > tol) return false;
    Vec xs = smallest_entries(x, x.size());
    Vec ys = smallest_entries(y, y.size());
    double px = 0.0, py = 0.0;
    for (Index d = 0; d < x.size(); ++d) {
        px += xs[d];
        py += ys[d];
        if (px < py - tol) return false;
    }
    return true;
}

Vec normalized_allocation(const Vec& p, const Vec& c, const std::vector<int>& counts) {
    detail::require(p.size() == c.size() && static_cast<size_t>(p.size()) == counts.size(),
                    "allocation, cost and count vectors must have equal length");
    Vec x(p.size());
    for (Index k = 0; k < p.size(); ++k) {
        detail::require(c[k] > 0.0, "unit costs must be positive");
        detail::require(counts[static_cast<size_t>(k)] >= 1, "agent counts must be at least 1");
        x[k] = p[k] / (c[k] * counts[static_cast<size_t>(k)]);
    }
    return x;
}

FairnessValue fairness_objective(const Vec& p, const Vec& c, const std::vector<int>& counts) {
    Vec x = normalized_allocation(p, c, counts);
    FairnessValue out;
    out.value = jains_index(x);
    Vec gx = jains_gradient(x);
    out.gradient.resize(p.size());
    for (Index k = 0; k < p.size(); ++k)
        out.gradient[k] = gx[k] / (c[k] * counts[static_cast<size_t>(k)]);
    return out;
}

}  // namespace alma
