#pragma once

#include "alma/mgda.hpp"
#include "alma/scenario.hpp"
#include "alma/vecopt.hpp"

#include <string>
#include <vector>

namespace alma {

enum class Mode {
    Tradeoff,       // welfare and fairness
    EfficientOnly,  // welfare only
};

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// DSO primal and dual variables.
struct DsoState {
    Vec p;
    Vec alpha_lo;  // v <= v_max rows
    Vec alpha_hi;  // v >= v_min rows
    Vec beta;      // line capacity rows
    double gamma = 0.0;   // budget
    double lambda = 0.0;  // energy balance
    int k = 0;
    double eta_p = 0.0;   // last primal step on the objective direction

    /// Zero duals and p = value for every aggregator.
    static DsoState uniform(const GridConstraints& gc, double value);

    Duals duals() const;
    void set_duals(const Duals& d);
};

struct IterationRecord {
    int iter = 0;
    double welfare = 0.0;
    double fairness = 0.0;
    double cosine = 0.0;         // between the projected gradients
    double inner_product = 0.0;  // raw c^T g
    double min_norm = 0.0;
    double nu = 0.0;
    double max_ineq_gap = 0.0;
    double eq_gap = 0.0;
    double step = 0.0;
    int auction_iterations = 0;
    bool auctions_converged = true;
    Vec weights;
    Vec c;
    Vec p;
};

/// eta0 (1 + cosine); eta0 when the cosine is undefined.
double adaptive_primal_step(double eta0, double cosine, bool defined = true);

/// Runs every aggregator's auction at allocation p (warm-started from the
/// stored state) and returns the unit costs.
Vec run_auctions(std::vector<AggregatorState>& aggregators, const Vec& p, const SolverSettings& s,
                 int* total_iterations = nullptr, bool* all_converged = nullptr);

double welfare(const std::vector<AggregatorState>& aggregators);

/// One DSO iteration already evaluated at the current state.
struct DsoStep {
    IterationRecord record;
    Vec g;
    LinearFeasibleRegion region;
    AlmaStep step;
    Duals updated_duals;
};

/// Auctions at state.p, fairness gradient, constraint gaps, direction,
/// dual updates and the primal update, without modifying the state.
DsoStep evaluate_dso_iteration(const DsoState& state, std::vector<AggregatorState>& aggregators,
                               const GridConstraints& grid, const std::vector<int>& counts, Mode mode,
                               const SolverSettings& settings);

void apply_dso_iteration(DsoState& state, const DsoStep& step);

/// evaluate_dso_iteration followed by apply_dso_iteration.
IterationRecord dso_iteration(DsoState& state, std::vector<AggregatorState>& aggregators,
                              const GridConstraints& grid, const std::vector<int>& counts, Mode mode,
                              const SolverSettings& settings);

struct BilevelResult {
    DsoState state;
    std::vector<IterationRecord> trace;
    std::vector<AggregatorState> aggregators;
    Vec c;
    Vec weights;
    bool converged = false;
    std::string stop_reason;
    int iterations = 0;
    double welfare = 0.0;
    double fairness = 0.0;
    double cosine = 0.0;
    double feasibility = 0.0;
    FritzJohnResidual fritz_john;
};

class BilevelDivergedError : public DivergedError {
  public:
    BilevelDivergedError(const std::string& what, BilevelResult partial)
        : DivergedError(what), partial_(std::move(partial)) {}
    const BilevelResult& partial() const { return partial_; }

  private:
    BilevelResult partial_;
};

/// Alternates auctions and DSO iterations until stationary and feasible,
/// the cosine target is met, or settings.max_iter. `world.aggregators` is
/// used as the auction warm start; `initial` defaults to the uniform small
/// allocation with zero duals.
BilevelResult run_bilevel(const World& world, Mode mode, const SolverSettings& settings,
                          const DsoState* initial = nullptr);

/// Restart state from a previous result: duals kept, allocation rescaled to
/// meet the energy balance of grid.
DsoState warm_start_state(const BilevelResult& previous, const GridConstraints& grid);

/// Rerun on world (typically with a changed P0) from a previous result,
/// reusing its auction states.
BilevelResult warm_restart(const World& world, const BilevelResult& previous, Mode mode,
                           const SolverSettings& settings);

struct SweepPoint {
    int run = 0;
    double welfare = 0.0;
    double fairness = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string error;
};

/// Independent tradeoff runs from seeded random allocations and duals.
std::vector<SweepPoint> pareto_sweep(const World& world, const SolverSettings& settings, int runs,
                                     std::uint64_t seed);

/// Indices of points that are dominated by another point by more than
/// slack in both objectives.
std::vector<int> dominated_points(const std::vector<SweepPoint>& points, double slack);

/// True when fairness is non-increasing (within slack) once points are
/// sorted by welfare.
bool is_monotone_tradeoff(const std::vector<SweepPoint>& points, double slack);

}  // namespace alma
