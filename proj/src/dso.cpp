#include "alma/dso.hpp"

#include "alma/errors.hpp"
#include "alma/fairness.hpp"
#include "alma/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace alma {

std::string to_string(Mode m) { return m == Mode::Tradeoff ? "tradeoff" : "efficient_only"; }

Mode mode_from_string(const std::string& s) {
    if (s == "tradeoff") return Mode::Tradeoff;
    if (s == "efficient_only") return Mode::EfficientOnly;
    throw UsageError("unknown mode '" + s + "' (expected tradeoff or efficient_only)");
}

DsoState DsoState::uniform(const GridConstraints& gc, double value) {
    DsoState s;
    s.p = Vec::Constant(gc.num_aggregators(), value);
    s.alpha_lo = Vec::Zero(gc.num_voltage_rows());
    s.alpha_hi = Vec::Zero(gc.num_voltage_rows());
    s.beta = Vec::Zero(gc.num_capacity_rows());
    return s;
}

Duals DsoState::duals() const {
    Duals d;
    d.ineq.resize(alpha_lo.size() + alpha_hi.size() + beta.size() + 1);
    d.ineq << alpha_lo, alpha_hi, beta, gamma;
    d.eq = Vec::Constant(1, lambda);
    return d;
}

void DsoState::set_duals(const Duals& d) {
    const Index nv = alpha_lo.size(), ns = beta.size();
    detail::require(d.ineq.size() == 2 * nv + ns + 1 && d.eq.size() == 1, "dual layout does not match the state");
    alpha_lo = d.ineq.segment(0, nv);
    alpha_hi = d.ineq.segment(nv, nv);
    beta = d.ineq.segment(2 * nv, ns);
    gamma = d.ineq[2 * nv + ns];
    lambda = d.eq[0];
}

double adaptive_primal_step(double eta0, double cosine, bool defined) {
    return defined ? eta0 * (1.0 + cosine) : eta0;
}

Vec run_auctions(std::vector<AggregatorState>& aggregators, const Vec& p, const SolverSettings& s,
                 int* total_iterations, bool* all_converged) {
    detail::require(static_cast<Index>(aggregators.size()) == p.size(),
                    "allocation length must equal the number of aggregators");
    AuctionOptions opt;
    opt.tol = s.auction_tol;
    opt.max_iter = s.auction_max_iter;
    opt.role_tol = s.role_tol;
    opt.initial_cost = s.initial_cost;
    Vec c(p.size());
    int iters = 0;
    bool ok = true;
    for (Index k = 0; k < p.size(); ++k) {
        AuctionResult r = run_auction(aggregators[static_cast<size_t>(k)], p[k], opt);
        c[k] = r.unit_cost;
        iters += r.iterations;
        ok = ok && r.converged;
    }
    if (total_iterations) *total_iterations = iters;
    if (all_converged) *all_converged = ok;
    return c;
}

double welfare(const std::vector<AggregatorState>& aggregators) {
    double w = 0.0;
    for (const AggregatorState& a : aggregators) w += aggregator_utility(a);
    return w;
}

DsoStep evaluate_dso_iteration(const DsoState& state, std::vector<AggregatorState>& aggregators,
                               const GridConstraints& grid, const std::vector<int>& counts, Mode mode,
                               const SolverSettings& settings) {
    DsoStep out;
    IterationRecord& rec = out.record;
    rec.iter = state.k;
    rec.p = state.p;
    rec.c = run_auctions(aggregators, state.p, settings, &rec.auction_iterations, &rec.auctions_converged);

    FairnessValue fv = fairness_objective(state.p, rec.c, counts);
    out.g = fv.gradient;
    out.region = grid.region(rec.c);

    Mat jac(state.p.size(), 2);
    jac.col(0) = rec.c;
    jac.col(1) = out.g;

    AlmaOptions opts;
    opts.schedule.primal = settings.primal_step;
    opts.schedule.dual_gain = settings.dual_gain;
    opts.schedule.penalty = settings.penalty;
    opts.schedule.nu_max = settings.nu_max;
    opts.schedule.adaptive = mode == Mode::Tradeoff;
    opts.schedule.max_move = settings.max_move * grid.P0 / static_cast<double>(grid.num_aggregators());
    if (mode == Mode::EfficientOnly) opts.fixed_weights = (Vec(2) << 1.0, 0.0).finished();

    const DualGains gains = dual_gains(out.region, opts.schedule);
    const Mat projector = equality_null_projector(out.region.eq_matrix);
    out.updated_duals = state.duals();
    out.step = alma_step(jac, out.region, state.p, out.updated_duals, opts, gains, projector);

    rec.welfare = welfare(aggregators);
    rec.fairness = fv.value;
    rec.cosine = out.step.cosine;
    rec.inner_product = rec.c.dot(out.g);
    rec.min_norm = out.step.min_norm;
    rec.nu = out.step.scaling;
    rec.max_ineq_gap = out.step.gaps.max_ineq();
    rec.eq_gap = out.step.gaps.max_eq_abs();
    rec.step = out.step.step;
    rec.weights = out.step.weights;
    return out;
}

void apply_dso_iteration(DsoState& state, const DsoStep& step) {
    state.p += step.step.update;
    state.set_duals(step.updated_duals);
    state.eta_p = step.step.step;
    ++state.k;
}

IterationRecord dso_iteration(DsoState& state, std::vector<AggregatorState>& aggregators,
                              const GridConstraints& grid, const std::vector<int>& counts, Mode mode,
                              const SolverSettings& settings) {
    DsoStep s = evaluate_dso_iteration(state, aggregators, grid, counts, mode, settings);
    apply_dso_iteration(state, s);
    return s.record;
}

namespace {

void finalize(BilevelResult& res, const DsoStep& s, const DsoState& state) {
    res.c = s.record.c;
    res.weights = s.step.weights;
    res.welfare = s.record.welfare;
    res.fairness = s.record.fairness;
    res.cosine = s.record.cosine;
    res.feasibility = s.step.gaps.max_violation();
    Mat jac(state.p.size(), 2);
    jac.col(0) = s.record.c;
    jac.col(1) = s.g;
    const Duals d = state.duals();
    Vec mu = d.eq + s.step.eq_projection_multiplier;
    res.fritz_john = fritz_john_residual(s.region, jac, state.p, s.step.weights, d.ineq, mu);
}

bool finite_state(const DsoState& s) {
    return all_finite(s.p) && all_finite(s.alpha_lo) && all_finite(s.alpha_hi) && all_finite(s.beta) &&
           std::isfinite(s.gamma) && std::isfinite(s.lambda);
}

}  // namespace

BilevelResult run_bilevel(const World& world, Mode mode, const SolverSettings& settings, const DsoState* initial) {
    detail::require(settings.max_iter >= 1, "max_iter must be at least 1");
    const GridConstraints& gc = world.grid;
    const std::vector<int> counts = world.agent_counts();
    BilevelResult res;
    res.aggregators = world.aggregators;
    res.state = initial ? *initial
                        : DsoState::uniform(gc, settings.init_scale * gc.P0 / static_cast<double>(gc.num_aggregators()));
    detail::require(res.state.p.size() == gc.num_aggregators(), "initial allocation has the wrong length");
    const bool use_cosine = mode == Mode::Tradeoff && settings.cosine_target >= -1.0;

    for (int it = 0; it < settings.max_iter; ++it) {
        DsoStep s;
        try {
            s = evaluate_dso_iteration(res.state, res.aggregators, gc, counts, mode, settings);
        } catch (const UsageError& e) {
            // The allocation left the auctions' domain (e.g. no energy at an
            // aggregator); report it with the trace so far.
            res.stop_reason = "diverged";
            throw BilevelDivergedError("iteration " + std::to_string(it) + ": " + e.what(), res);
        }
        res.trace.push_back(s.record);
        res.iterations = it;
        const double feas = s.step.gaps.max_violation();
        const double scale = s.record.c.norm() + s.g.norm();
        const bool feasible = feas <= settings.tol_feas;
        if (feasible && s.step.min_norm <= settings.tol_stat * scale) {
            res.converged = true;
            res.stop_reason = "stationary";
        } else if (feasible && use_cosine && s.record.cosine <= settings.cosine_target) {
            res.converged = true;
            res.stop_reason = "cosine";
        }
        if (res.converged) {
            finalize(res, s, res.state);
            return res;
        }
        apply_dso_iteration(res.state, s);
        res.iterations = it + 1;
        if (!finite_state(res.state)) {
            res.stop_reason = "diverged";
            throw BilevelDivergedError("non-finite DSO state at iteration " + std::to_string(it), res);
        }
    }
    res.stop_reason = "max_iter";
    std::vector<AggregatorState> aggs = res.aggregators;
    DsoStep s = evaluate_dso_iteration(res.state, aggs, gc, counts, mode, settings);
    res.aggregators = std::move(aggs);
    finalize(res, s, res.state);
    return res;
}

DsoState warm_start_state(const BilevelResult& previous, const GridConstraints& grid) {
    detail::require(previous.state.p.size() == grid.num_aggregators(),
                    "previous allocation does not match the grid");
    DsoState s = previous.state;
    s.k = 0;
    const double delivered = grid.c_P0.dot(s.p);
    detail::require(delivered > 0.0, "previous allocation delivers no energy");
    s.p *= (grid.P0 - grid.c_P00) / delivered;
    return s;
}

BilevelResult warm_restart(const World& world, const BilevelResult& previous, Mode mode,
                           const SolverSettings& settings) {
    detail::require(previous.aggregators.size() == world.aggregators.size(),
                    "previous result has a different number of aggregators");
    World w = world;
    w.aggregators = previous.aggregators;
    const DsoState init = warm_start_state(previous, world.grid);
    return run_bilevel(w, mode, settings, &init);
}

std::vector<SweepPoint> pareto_sweep(const World& world, const SolverSettings& settings, int runs,
                                     std::uint64_t seed) {
    detail::require(runs >= 2, "a Pareto sweep needs at least two runs");
    const GridConstraints& gc = world.grid;
    const double share = gc.P0 / static_cast<double>(gc.num_aggregators());
    std::vector<SweepPoint> out;
    for (int r = 0; r < runs; ++r) {
        Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1));
        DsoState init = DsoState::uniform(gc, 0.0);
        for (Index k = 0; k < init.p.size(); ++k)
            init.p[k] = share * rng.uniform(settings.sweep_init_min, settings.sweep_init_max);
        init.lambda = rng.uniform(-settings.sweep_dual_scale, settings.sweep_dual_scale) * gc.c0;
        SweepPoint pt;
        pt.run = r;
        try {
            BilevelResult res = run_bilevel(world, Mode::Tradeoff, settings, &init);
            pt.welfare = res.welfare;
            pt.fairness = res.fairness;
            pt.converged = res.converged;
            pt.iterations = res.iterations;
        } catch (const Error& e) {
            pt.error = e.what();
        }
        out.push_back(pt);
    }
    return out;
}

std::vector<int> dominated_points(const std::vector<SweepPoint>& points, double slack) {
    std::vector<int> out;
    for (size_t i = 0; i < points.size(); ++i) {
        if (!points[i].error.empty()) continue;
        for (size_t j = 0; j < points.size(); ++j) {
            if (i == j || !points[j].error.empty()) continue;
            if (points[j].welfare > points[i].welfare + slack && points[j].fairness > points[i].fairness + slack) {
                out.push_back(static_cast<int>(i));
                break;
            }
        }
    }
    return out;
}

bool is_monotone_tradeoff(const std::vector<SweepPoint>& points, double slack) {
    std::vector<SweepPoint> v;
    for (const SweepPoint& p : points)
        if (p.error.empty()) v.push_back(p);
    std::sort(v.begin(), v.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.welfare < b.welfare; });
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i].fairness > v[i - 1].fairness + slack) return false;
    return true;
}

}  // namespace alma
