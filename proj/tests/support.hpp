#pragma once

#include "alma/linalg.hpp"
#include "alma/market.hpp"
#include "alma/random.hpp"

#include <functional>
#include <vector>

namespace alma::test {

inline Vec random_vec(Rng& rng, Index n, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

inline Mat random_mat(Rng& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

inline Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
    Vec g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vec up = x, dn = x;
        up[i] += h;
        dn[i] -= h;
        g[i] = (f(up) - f(dn)) / (2.0 * h);
    }
    return g;
}

/// Second derivative of t -> f(x + t y) at t = 0 by central differences.
inline double directional_second(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& y,
                                 double h = 1e-4) {
    return (f(x + h * y) - 2.0 * f(x) + f(x - h * y)) / (h * h);
}

inline double relative_error(const Vec& a, const Vec& b) {
    return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

inline Agent log_agent(double a, double b, double g = 0.0, int id = 0) {
    Agent ag;
    ag.id = id;
    ag.family = UtilityFamily::Log;
    ag.a = a;
    ag.b = b;
    ag.g = g;
    return ag;
}

inline Agent sigmoid_agent(double a, double b, double g = 0.0, int id = 0) {
    Agent ag = log_agent(a, b, g, id);
    ag.family = UtilityFamily::Sigmoid;
    return ag;
}

/// Random prosumer population: mixed families, some with PV.
inline std::vector<Agent> random_population(Rng& rng, int count) {
    std::vector<Agent> out;
    for (int i = 0; i < count; ++i) {
        const bool sigmoid = rng.uniform() < 0.3;
        const double g = rng.uniform() < 0.3 ? rng.uniform(0.5, 3.0) : 0.0;
        if (sigmoid)
            out.push_back(sigmoid_agent(rng.uniform(4.0, 8.0), rng.uniform(1.0, 4.0), g, i));
        else
            out.push_back(log_agent(rng.uniform(1.0, 3.0), rng.uniform(0.5, 2.0), g, i));
    }
    return out;
}

}  // namespace alma::test
