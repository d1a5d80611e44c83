#pragma once

#include "alma/linalg.hpp"

#include <vector>

namespace alma {

/// Jain's index (1^T x)^2 / (n x^T x) with n = x.size().
double jains_index(const Vec& x);

/// Analytic gradient of jains_index.
Vec jains_gradient(const Vec& x);

/// y^T H(x) y for the Hessian H of jains_index, from the full expression.
double jains_hessian_quadform(const Vec& x, const Vec& y);

/// Reduced quadratic form, valid only when y^T grad J(x) = 0:
/// -(2 J / |x|^4) (|x|^2 |y|^2 - (x^T y)^2). Throws UsageError when
/// |y^T grad J(x)| exceeds `orth_tol` * max(1, |y| |grad J(x)|).
double jains_hessian_quadform_orthogonal(const Vec& x, const Vec& y, double orth_tol = 1e-8);

/// True when x majorizes y: equal sums within tol and every sum of the d
/// smallest entries of x is at least that of y minus tol.
bool majorizes(const Vec& x, const Vec& y, double tol = 1e-12);

/// The d smallest entries of x in ascending order.
Vec smallest_entries(const Vec& x, Index d);

/// x_k = p_k / (c_k G_k).
Vec normalized_allocation(const Vec& p, const Vec& c, const std::vector<int>& counts);

struct FairnessValue {
    double value = 0.0;
    Vec gradient;  // with respect to p, c held fixed
};

/// Jain's index of the per-agent, cost-normalized allocation and its
/// gradient with respect to p.
FairnessValue fairness_objective(const Vec& p, const Vec& c, const std::vector<int>& counts);

}  // namespace alma
