#pragma once

#include "alma/linalg.hpp"

#include <functional>
#include <limits>
#include <string>

namespace alma {

/// Linear constraint system {x : A^T x + a <= 0, B^T x + b = 0}.
/// Matrices store one constraint per column.
struct LinearFeasibleRegion {
    Mat ineq_matrix;  // n x p
    Vec ineq_offset;  // p
    Mat eq_matrix;    // n x q
    Vec eq_offset;    // q

    LinearFeasibleRegion() = default;
    LinearFeasibleRegion(Mat A, Vec a, Mat B, Vec b);

    /// Region with no constraints in dimension n.
    static LinearFeasibleRegion unconstrained(Index n);

    Index dim() const { return ineq_matrix.rows(); }
    Index num_ineq() const { return ineq_matrix.cols(); }
    Index num_eq() const { return eq_matrix.cols(); }

    /// Throws UsageError unless dimensions agree and entries are finite.
    void validate() const;
};

struct ConstraintGaps {
    Vec ineq;  // A^T x + a
    Vec eq;    // B^T x + b

    /// max(max ineq, 0) and max |eq|, combined.
    double max_violation() const;
    double max_ineq() const { return max_or(ineq, -std::numeric_limits<double>::infinity()); }
    double max_eq_abs() const { return max_abs(eq); }
};

ConstraintGaps constraint_gaps(const LinearFeasibleRegion& region, const Vec& x);

bool is_feasible(const LinearFeasibleRegion& region, const Vec& x, double tol = 1e-8);

/// Vector objective f: R^n -> R^m with Jacobian columns as gradients.
struct ObjectiveBundle {
    int dimension = 1;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> gradient;  // n x m
};

/// Relation of fx to fy under componentwise maximization.
enum class Dominance {
    DominatesStrictly,
    WeaklyDominates,
    DominatedBy,
    WeaklyDominatedBy,
    Incomparable,
    Equal,
};

Dominance dominance(const Vec& fx, const Vec& fy);

std::string to_string(Dominance d);

struct FritzJohnResidual {
    double stationarity = 0.0;
    double complementarity = 0.0;
    double sign_violation = 0.0;
};

/// Residuals of grad f xi - A lambda - B mu = 0, lambda^T(A^T x + a) = 0,
/// xi >= 0, lambda >= 0.
FritzJohnResidual fritz_john_residual(const LinearFeasibleRegion& region, const Mat& jacobian,
                                      const Vec& x, const Vec& xi, const Vec& lambda,
                                      const Vec& mu);

/// Sampled chord test: f(t x + (1-t) y) >= min(f(x), f(y)) - 1e-12 on a
/// uniform grid of `samples` points. A falsifier, not a proof.
bool quasiconcavity_probe(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& y,
                          int samples = 101);

}  // namespace alma
