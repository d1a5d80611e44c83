#include "alma/mgda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MinNormResult finish(const Mat& jacobian, Vec weights) {
    MinNormResult r;
    r.direction = jacobian * weights;
    r.norm = r.direction.norm();
    r.weights = std::move(weights);
    return r;
}

MinNormResult min_norm_two(const Mat& jacobian) {
    const Vec g1 = jacobian.col(0);
    const Vec g2 = jacobian.col(1);
    const double denom = (g1 - g2).squaredNorm();
    Vec w(2);
    if (denom == 0.0) {
        w << 0.5, 0.5;
    } else {
        double t = (g2 - g1).dot(g2) / denom;
        t = std::clamp(t, 0.0, 1.0);
        w << t, 1.0 - t;
    }
    return finish(jacobian, w);
}

// Frank-Wolfe with away steps on min |J w|^2 over the simplex.
MinNormResult min_norm_frank_wolfe(const Mat& jacobian) {
    const Index m = jacobian.cols();
    const Mat G = jacobian.transpose() * jacobian;
    Index start = 0;
    G.diagonal().minCoeff(&start);
    Vec w = Vec::Zero(m);
    w[start] = 1.0;
    const double scale = std::max(1.0, G.diagonal().maxCoeff());
    const int cap = static_cast<int>(std::max<Index>(1000, 100 * m * m));
    for (int it = 0; it < cap; ++it) {
        Vec grad = 2.0 * G * w;
        const double gw = grad.dot(w);
        Index fw = 0;
        grad.minCoeff(&fw);
        Index away = -1;
        double away_val = -kInf;
        for (Index j = 0; j < m; ++j)
            if (w[j] > 0.0 && grad[j] > away_val) {
                away_val = grad[j];
                away = j;
            }
        const double fw_gap = gw - grad[fw];
        if (fw_gap <= 1e-10 * scale) break;
        const double away_gap = away_val - gw;

        Vec d;
        double t_max;
        if (fw_gap >= away_gap || w[away] >= 1.0) {
            d = -w;
            d[fw] += 1.0;
            t_max = 1.0;
        } else {
            d = w;
            d[away] -= 1.0;
            t_max = w[away] / (1.0 - w[away]);
        }
        const double curv = d.dot(G * d);
        const double slope = w.dot(G * d);
        double t = curv > 0.0 ? -slope / curv : t_max;
        t = std::clamp(t, 0.0, t_max);
        w += t * d;
        w = w.cwiseMax(0.0);
        w /= w.sum();
    }
    return finish(jacobian, w);
}

}  // namespace

MinNormResult min_norm_weights(const Mat& jacobian) {
    detail::require(jacobian.cols() >= 1, "min-norm needs at least one gradient");
    detail::require(all_finite(jacobian), "jacobian entries must be finite");
    if (jacobian.cols() == 1) return finish(jacobian, Vec::Ones(1));
    if (jacobian.cols() == 2) return min_norm_two(jacobian);
    return min_norm_frank_wolfe(jacobian);
}

bool OmegaRegion::contains(const Vec& w, double tol) const {
    if (ineq_matrix.cols() > 0 && ((ineq_matrix.transpose() * w - ineq_rhs).array() > tol).any())
        return false;
    if (eq_matrix.cols() > 0) {
        Vec v = eq_matrix.transpose() * w;
        if ((v - eq_upper).maxCoeff() > tol || (eq_lower - v).maxCoeff() > tol) return false;
    }
    return true;
}

OmegaRegion omega_region(const LinearFeasibleRegion& region, const ConstraintGaps& gaps) {
    detail::require(gaps.ineq.size() == region.num_ineq() && gaps.eq.size() == region.num_eq(),
                    "gap dimensions do not match the region");
    OmegaRegion o;
    o.ineq_matrix = region.ineq_matrix;
    o.ineq_rhs = -negative_part(gaps.ineq);
    o.eq_matrix = region.eq_matrix;
    o.eq_lower = -positive_part(gaps.eq);
    o.eq_upper = -negative_part(gaps.eq);
    return o;
}

double max_scaling(const Vec& w, const OmegaRegion& region, double nu_max) {
    detail::require(nu_max > 0.0, "nu_max must be positive");
    detail::require(w.size() == region.ineq_matrix.rows() && w.size() == region.eq_matrix.rows(),
                    "direction dimension does not match the direction region");
    double lo = 0.0, hi = nu_max;
    const double wn = w.norm();
    // Feasible nu for a single form v = r^T w under l <= nu v <= u.
    auto apply = [&](const Vec& r, double l, double u) {
        const double v = r.dot(w);
        if (std::abs(v) <= 1e-13 * r.norm() * wn) {
            if (l > 0.0 || u < 0.0) hi = -kInf;
            return;
        }
        if (v > 0.0) {
            hi = std::min(hi, u / v);
            lo = std::max(lo, l / v);
        } else {
            hi = std::min(hi, l / v);
            lo = std::max(lo, u / v);
        }
    };
    for (Index i = 0; i < region.ineq_matrix.cols(); ++i)
        apply(region.ineq_matrix.col(i), -kInf, region.ineq_rhs[i]);
    for (Index i = 0; i < region.eq_matrix.cols(); ++i)
        apply(region.eq_matrix.col(i), region.eq_lower[i], region.eq_upper[i]);
    if (hi < lo || hi < 0.0) return 0.0;
    return hi;
}

DirectionResult alma_direction(const ObjectiveBundle& bundle, const LinearFeasibleRegion& region,
                               const Vec& x, double nu_max) {
    Mat jac = bundle.gradient(x);
    detail::require(jac.rows() == region.dim(), "jacobian rows must equal the region dimension");
    MinNormResult mn = min_norm_weights(jac);
    OmegaRegion omega = omega_region(region, constraint_gaps(region, x));
    DirectionResult r;
    r.weights = mn.weights;
    r.raw_direction = mn.direction;
    r.min_norm = mn.norm;
    r.scaling = max_scaling(mn.direction, omega, nu_max);
    r.direction = r.scaling * r.raw_direction;
    return r;
}

Mat equality_null_projector(const Mat& eq_matrix) {
    const Index n = eq_matrix.rows();
    Mat P = Mat::Identity(n, n);
    if (eq_matrix.cols() == 0) return P;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(eq_matrix);
    Mat Q = cod.householderQ();
    const Index r = cod.rank();
    if (r == 0) return P;
    Mat basis = Q.leftCols(r);
    P -= basis * basis.transpose();
    return P;
}

Duals Duals::zeros(const LinearFeasibleRegion& region) {
    return {Vec::Zero(region.num_ineq()), Vec::Zero(region.num_eq())};
}

DualGains dual_gains(const LinearFeasibleRegion& region, const StepSchedule& schedule) {
    detail::require(schedule.primal > 0.0, "primal step must be positive");
    detail::require(schedule.dual_gain >= 0.0, "dual gain must be nonnegative");
    detail::require(schedule.penalty >= 0.0, "penalty must be nonnegative");
    DualGains g;
    auto per_column = [&](const Mat& M, double num, bool fixed) {
        Vec out(M.cols());
        for (Index i = 0; i < M.cols(); ++i) {
            const double sq = M.col(i).squaredNorm();
            if (fixed)
                out[i] = num;
            else
                out[i] = sq > 0.0 ? num / (schedule.primal * sq) : 0.0;
        }
        return out;
    };
    g.ineq = per_column(region.ineq_matrix, schedule.dual_gain, false);
    g.eq = per_column(region.eq_matrix, schedule.dual_gain, false);
    const bool fixed = schedule.penalty > 0.0;
    const double rho = fixed ? schedule.penalty : 0.5;
    g.ineq_penalty = per_column(region.ineq_matrix, rho, fixed);
    g.eq_penalty = per_column(region.eq_matrix, rho, fixed);
    return g;
}

AlmaStep alma_step(const Mat& jacobian, const LinearFeasibleRegion& region, const Vec& x,
                   Duals& duals, const AlmaOptions& options, const DualGains& gains,
                   const Mat& projector) {
    const StepSchedule& sch = options.schedule;
    detail::require(jacobian.rows() == region.dim(), "jacobian rows must equal the region dimension");
    detail::require(duals.ineq.size() == region.num_ineq() && duals.eq.size() == region.num_eq(),
                    "dual dimensions do not match the region");
    AlmaStep s;
    s.gaps = constraint_gaps(region, x);

    const Mat projected = projector * jacobian;
    if (options.fixed_weights.size() > 0) {
        detail::require(options.fixed_weights.size() == jacobian.cols(),
                        "fixed weights must have one entry per objective");
        s.weights = options.fixed_weights;
        s.raw_direction = projected * s.weights;
        s.min_norm = s.raw_direction.norm();
    } else {
        MinNormResult mn = min_norm_weights(projected);
        s.weights = mn.weights;
        s.raw_direction = mn.direction;
        s.min_norm = mn.norm;
    }

    if (region.num_eq() > 0) {
        // Equality multiplier that the projection removed from grad f xi.
        Vec full = jacobian * s.weights;
        s.eq_projection_multiplier =
            region.eq_matrix.completeOrthogonalDecomposition().solve(full - s.raw_direction);
    } else {
        s.eq_projection_multiplier.resize(0);
    }

    s.cosine = 0.0;
    if (jacobian.cols() >= 2) {
        const double n0 = projected.col(0).norm(), n1 = projected.col(1).norm();
        if (n0 > 0.0 && n1 > 0.0) s.cosine = projected.col(0).dot(projected.col(1)) / (n0 * n1);
    }

    OmegaRegion omega = omega_region(region, s.gaps);
    omega.eq_matrix.resize(region.dim(), 0);
    omega.eq_lower.resize(0);
    omega.eq_upper.resize(0);
    s.scaling = max_scaling(s.raw_direction, omega, sch.nu_max);
    s.direction = s.scaling * s.raw_direction;
    s.step = sch.primal * (sch.adaptive ? 1.0 + s.cosine : 1.0);
    const double move = s.step * max_abs(s.direction);
    if (sch.max_move > 0.0 && move > sch.max_move) s.step *= sch.max_move / move;

    duals.ineq = positive_part(duals.ineq + s.scaling * gains.ineq.cwiseProduct(s.gaps.ineq));
    duals.eq = duals.eq + s.scaling * gains.eq.cwiseProduct(s.gaps.eq);

    const Vec lam = positive_part(duals.ineq + gains.ineq_penalty.cwiseProduct(s.gaps.ineq));
    const Vec mu = duals.eq + gains.eq_penalty.cwiseProduct(s.gaps.eq);
    s.update = s.step * s.direction -
               sch.primal * (region.ineq_matrix * lam + region.eq_matrix * mu);
    return s;
}

AlmaTrace run_alma(const ObjectiveBundle& bundle, const LinearFeasibleRegion& region, const Vec& x0,
                   const Duals& duals0, const StepSchedule& schedule, int max_iter,
                   const ToleranceSet& tol) {
    detail::require(max_iter >= 1, "max_iter must be at least 1");
    detail::require(x0.size() == region.dim(), "initial point dimension does not match the region");
    detail::require(tol.stationarity >= 0.0 && tol.feasibility >= 0.0,
                    "tolerances must be nonnegative");
    region.validate();
    AlmaTrace trace;
    trace.x = x0;
    trace.duals = duals0;
    if (trace.duals.ineq.size() == 0 && region.num_ineq() > 0) trace.duals.ineq = Vec::Zero(region.num_ineq());
    if (trace.duals.eq.size() == 0 && region.num_eq() > 0) trace.duals.eq = Vec::Zero(region.num_eq());

    AlmaOptions opts;
    opts.schedule = schedule;
    const DualGains gains = dual_gains(region, schedule);
    const Mat projector = equality_null_projector(region.eq_matrix);

    for (int k = 0; k < max_iter; ++k) {
        Mat jac = bundle.gradient(trace.x);
        if (!all_finite(jac))
            throw AlmaDivergedError("non-finite gradient at iteration " + std::to_string(k), trace);
        AlmaStep s = alma_step(jac, region, trace.x, trace.duals, opts, gains, projector);

        AlmaRecord rec;
        rec.iter = k;
        rec.objectives = bundle.value(trace.x);
        rec.min_norm = s.min_norm;
        rec.scaling = s.scaling;
        rec.max_ineq_gap = s.gaps.max_ineq();
        rec.eq_gap = s.gaps.max_eq_abs();
        const bool feasible = s.gaps.max_violation() <= tol.feasibility;
        rec.stationary_infeasible = s.min_norm <= tol.stationarity && !feasible;
        trace.records.push_back(rec);
        trace.weights = s.weights;
        trace.iterations = k + 1;

        if (s.min_norm <= tol.stationarity && feasible) {
            trace.converged = true;
            break;
        }
        Vec next = trace.x + s.update;
        if (!all_finite(next) || !all_finite(trace.duals.ineq) || !all_finite(trace.duals.eq))
            throw AlmaDivergedError("non-finite iterate at iteration " + std::to_string(k), trace);
        trace.x = std::move(next);
    }
    return trace;
}

}  // namespace alma
