#include "alma/vecopt.hpp"

#include "alma/errors.hpp"

#include <algorithm>
#include <cmath>

namespace alma {

LinearFeasibleRegion::LinearFeasibleRegion(Mat A, Vec a, Mat B, Vec b)
    : ineq_matrix(std::move(A)), ineq_offset(std::move(a)), eq_matrix(std::move(B)),
      eq_offset(std::move(b)) {
    // An empty block may arrive as 0x0; give it the shared row dimension.
    if (ineq_matrix.size() == 0 && ineq_offset.size() == 0) ineq_matrix.resize(eq_matrix.rows(), 0);
    if (eq_matrix.size() == 0 && eq_offset.size() == 0) eq_matrix.resize(ineq_matrix.rows(), 0);
    validate();
}

LinearFeasibleRegion LinearFeasibleRegion::unconstrained(Index n) {
    LinearFeasibleRegion r;
    r.ineq_matrix.resize(n, 0);
    r.ineq_offset.resize(0);
    r.eq_matrix.resize(n, 0);
    r.eq_offset.resize(0);
    return r;
}

void LinearFeasibleRegion::validate() const {
    detail::require(ineq_matrix.rows() == eq_matrix.rows(),
                    "inequality and equality matrices must have the same row count");
    detail::require(ineq_matrix.cols() == ineq_offset.size(),
                    "inequality offset length must equal the number of inequality columns");
    detail::require(eq_matrix.cols() == eq_offset.size(),
                    "equality offset length must equal the number of equality columns");
    detail::require(all_finite(ineq_matrix) && all_finite(ineq_offset) && all_finite(eq_matrix) &&
                        all_finite(eq_offset),
                    "constraint entries must be finite");
}

double ConstraintGaps::max_violation() const {
    return std::max(std::max(max_ineq(), 0.0), max_eq_abs());
}

ConstraintGaps constraint_gaps(const LinearFeasibleRegion& region, const Vec& x) {
    detail::require(x.size() == region.dim(), "point dimension does not match the region");
    return {region.ineq_matrix.transpose() * x + region.ineq_offset,
            region.eq_matrix.transpose() * x + region.eq_offset};
}

bool is_feasible(const LinearFeasibleRegion& region, const Vec& x, double tol) {
    detail::require(tol >= 0.0, "feasibility tolerance must be nonnegative");
    ConstraintGaps g = constraint_gaps(region, x);
    return g.max_ineq() <= tol && g.max_eq_abs() <= tol;
}

Dominance dominance(const Vec& fx, const Vec& fy) {
    detail::require(fx.size() == fy.size(), "objective vectors must have equal length");
    Index greater = 0, less = 0;
    for (Index i = 0; i < fx.size(); ++i) {
        if (fx[i] > fy[i]) ++greater;
        if (fx[i] < fy[i]) ++less;
    }
    const Index m = fx.size();
    if (greater == 0 && less == 0) return Dominance::Equal;
    if (greater > 0 && less > 0) return Dominance::Incomparable;
    if (greater > 0) return greater == m ? Dominance::DominatesStrictly : Dominance::WeaklyDominates;
    return less == m ? Dominance::DominatedBy : Dominance::WeaklyDominatedBy;
}

std::string to_string(Dominance d) {
    switch (d) {
        case Dominance::DominatesStrictly: return "DominatesStrictly";
        case Dominance::WeaklyDominates: return "WeaklyDominates";
        case Dominance::DominatedBy: return "DominatedBy";
        case Dominance::WeaklyDominatedBy: return "WeaklyDominatedBy";
        case Dominance::Incomparable: return "Incomparable";
        case Dominance::Equal: return "Equal";
    }
    return "?";
}

FritzJohnResidual fritz_john_residual(const LinearFeasibleRegion& region, const Mat& jacobian,
                                      const Vec& x, const Vec& xi, const Vec& lambda,
                                      const Vec& mu) {
    detail::require(jacobian.rows() == region.dim(), "jacobian rows must equal the region dimension");
    detail::require(xi.size() == jacobian.cols(), "xi length must equal the number of objectives");
    detail::require(lambda.size() == region.num_ineq(), "lambda length must equal inequality count");
    detail::require(mu.size() == region.num_eq(), "mu length must equal equality count");
    detail::require(x.size() == region.dim(), "point dimension does not match the region");

    FritzJohnResidual r;
    Vec s = jacobian * xi - region.ineq_matrix * lambda - region.eq_matrix * mu;
    r.stationarity = max_abs(s);
    Vec gap = region.ineq_matrix.transpose() * x + region.ineq_offset;
    r.complementarity = std::abs(lambda.dot(gap));
    double neg = 0.0;
    if (xi.size()) neg = std::max(neg, -xi.minCoeff());
    if (lambda.size()) neg = std::max(neg, -lambda.minCoeff());
    r.sign_violation = neg;
    return r;
}

bool quasiconcavity_probe(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& y,
                          int samples) {
    detail::require(samples >= 2, "quasiconcavity probe needs at least two samples");
    detail::require(x.size() == y.size(), "probe endpoints must have equal length");
    const double floor = std::min(f(x), f(y)) - 1e-12;
    for (int i = 0; i < samples; ++i) {
        double t = static_cast<double>(i) / (samples - 1);
        if (f(t * x + (1.0 - t) * y) < floor) return false;
    }
    return true;
}

}  // namespace alma
