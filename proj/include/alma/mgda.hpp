#pragma once

#include "alma/errors.hpp"
#include "alma/linalg.hpp"
#include "alma/vecopt.hpp"

#include <vector>

namespace alma {

struct MinNormResult {
    Vec weights;    // on the unit simplex
    Vec direction;  // jacobian * weights
    double norm = 0.0;
};

/// Minimum-norm point of the convex hull of the jacobian's columns. Closed
/// form for two columns, Frank-Wolfe with away steps otherwise.
MinNormResult min_norm_weights(const Mat& jacobian);

/// Direction set {w : A^T w <= ineq_rhs, eq_lower <= B^T w <= eq_upper}.
struct OmegaRegion {
    Mat ineq_matrix;
    Vec ineq_rhs;
    Mat eq_matrix;
    Vec eq_lower;
    Vec eq_upper;

    bool contains(const Vec& w, double tol = 0.0) const;
};

OmegaRegion omega_region(const LinearFeasibleRegion& region, const ConstraintGaps& gaps);

/// Largest nu in [0, nu_max] with nu * w in the region (ratio test); 0 when a
/// constraint cannot be met by any nonnegative scaling.
double max_scaling(const Vec& w, const OmegaRegion& region, double nu_max = 1.0);

struct DirectionResult {
    Vec weights;
    Vec raw_direction;
    double scaling = 0.0;
    Vec direction;
    double min_norm = 0.0;
};

/// Min-norm weights, direction region and scaling composed at x.
DirectionResult alma_direction(const ObjectiveBundle& bundle, const LinearFeasibleRegion& region,
                               const Vec& x, double nu_max = 1.0);

/// Projector onto the null space of the equality normals B^T.
Mat equality_null_projector(const Mat& eq_matrix);

struct Duals {
    Vec ineq;  // >= 0
    Vec eq;    // free sign

    static Duals zeros(const LinearFeasibleRegion& region);
};

struct StepSchedule {
    double primal = 1e-2;
    /// Dual step for each constraint is dual_gain / (primal * |normal|^2).
    double dual_gain = 0.05;
    /// Proximal weight of the augmented multipliers [lambda + rho delta]_+.
    /// Zero means 0.5 / (primal * |normal|^2) for each constraint.
    double penalty = 0.0;
    double nu_max = 1.0;
    /// Scale the objective direction by (1 + cosine) of the first two
    /// gradients.
    bool adaptive = false;
    /// Largest infinity-norm move along the objective direction per step;
    /// zero means unlimited.
    double max_move = 0.0;
};

struct ToleranceSet {
    double stationarity = 1e-6;
    double feasibility = 1e-8;
};

/// Quantities computed for one iteration of the constrained ascent.
struct AlmaStep {
    Vec weights;
    Vec raw_direction;      // projected jacobian * weights
    Vec direction;          // nu * raw_direction
    double scaling = 0.0;
    double min_norm = 0.0;
    double cosine = 0.0;    // between the first two projected gradients
    double step = 0.0;      // primal step applied to the objective direction
    ConstraintGaps gaps;    // at the point before the update
    Vec eq_projection_multiplier;  // equality multiplier absorbed by the projection
    Vec update;             // x_{k+1} - x_k
};

struct AlmaOptions {
    StepSchedule schedule;
    /// Fixed objective weights (efficient-only style); empty means min-norm.
    Vec fixed_weights;
};

/// Dual step sizes per constraint column.
struct DualGains {
    Vec ineq;
    Vec eq;
    Vec ineq_penalty;
    Vec eq_penalty;
};

DualGains dual_gains(const LinearFeasibleRegion& region, const StepSchedule& schedule);

/// One constrained multi-gradient ascent step: direction from the min-norm
/// element of the equality-projected gradients, scaled into the direction
/// region of the inequalities; multipliers updated by nu * eta * gap; primal
/// moves along the direction minus the augmented multiplier terms.
AlmaStep alma_step(const Mat& jacobian, const LinearFeasibleRegion& region, const Vec& x,
                   Duals& duals, const AlmaOptions& options, const DualGains& gains,
                   const Mat& projector);

struct AlmaRecord {
    int iter = 0;
    Vec objectives;
    double min_norm = 0.0;
    double scaling = 0.0;
    double max_ineq_gap = 0.0;
    double eq_gap = 0.0;
    bool stationary_infeasible = false;
};

struct AlmaTrace {
    std::vector<AlmaRecord> records;
    Vec x;
    Duals duals;
    Vec weights;
    bool converged = false;
    int iterations = 0;
};

class AlmaDivergedError : public DivergedError {
  public:
    AlmaDivergedError(const std::string& what, AlmaTrace trace)
        : DivergedError(what), trace_(std::move(trace)) {}
    const AlmaTrace& trace() const { return trace_; }

  private:
    AlmaTrace trace_;
};

/// Generic constrained ascent loop. Stops when the min-norm is at most
/// tol.stationarity and the constraint violation at most tol.feasibility.
AlmaTrace run_alma(const ObjectiveBundle& bundle, const LinearFeasibleRegion& region, const Vec& x0,
                   const Duals& duals0, const StepSchedule& schedule, int max_iter,
                   const ToleranceSet& tol);

}  // namespace alma
