#include "alma/dso.hpp"
#include "alma/errors.hpp"
#include "alma/fairness.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace alma;
using alma::test::log_agent;

namespace {

World small_world(int aggregators, double P0, double c0, double loss_slope = 0.0) {
    std::ostringstream topo;
    topo << "substation 0\nvoltage 0.95 1.05 1.0\nbase_power 100\nloss_slope " << loss_slope << "\n";
    for (int k = 1; k <= aggregators; ++k) topo << "node " << k << " A" << k << " 0\n";
    for (int k = 1; k <= aggregators; ++k) topo << "line " << k - 1 << " " << k << " 0.01 0.005 10\n";
    std::istringstream in(topo.str());
    World w;
    w.network = parse_topology(in);
    Rng rng(81);
    for (int k = 0; k < aggregators; ++k) {
        std::vector<Agent> pop;
        const int n = 2 + 2 * k;
        for (int i = 0; i < n; ++i) pop.push_back(log_agent(rng.uniform(1, 3), rng.uniform(0.5, 2), 0.0, i));
        w.network.node(k + 1).agent_count = n;
        w.aggregators.emplace_back(k, pop);
    }
    w.grid = build_constraints(w.network, P0, c0);
    return w;
}

SolverSettings small_settings() {
    SolverSettings s;
    s.max_iter = 4000;
    s.primal_step = 0.05;
    s.init_scale = 0.5;
    return s;
}

bool duals_nonnegative(const DsoState& s) {
    const Duals d = s.duals();
    return d.ineq.size() == 0 || d.ineq.minCoeff() >= 0.0;
}

}  // namespace

TEST_CASE("adaptive primal step") {
    CHECK(adaptive_primal_step(1.0, -1.0) == 0.0);
    CHECK(adaptive_primal_step(1.0, 0.0) == 1.0);
    CHECK(adaptive_primal_step(2.0, 0.5) == 3.0);
    CHECK(adaptive_primal_step(2.0, 1.0) == 4.0);
    CHECK(adaptive_primal_step(0.3, -0.7, false) == 0.3);
}

TEST_CASE("mode names") {
    CHECK(mode_from_string("tradeoff") == Mode::Tradeoff);
    CHECK(mode_from_string(to_string(Mode::EfficientOnly)) == Mode::EfficientOnly);
    CHECK_THROWS_AS(mode_from_string("fair"), UsageError);
}

TEST_CASE("dual layout round-trip") {
    World w = small_world(3, 10.0, 0.0);
    DsoState s = DsoState::uniform(w.grid, 1.0);
    Duals d = s.duals();
    CHECK(d.ineq.size() == 2 * 4 + 3 + 1);
    for (Index i = 0; i < d.ineq.size(); ++i) d.ineq[i] = static_cast<double>(i);
    d.eq[0] = -2.0;
    s.set_duals(d);
    CHECK(s.alpha_hi[0] == 4.0);
    CHECK(s.beta[2] == 10.0);
    CHECK(s.gamma == 11.0);
    CHECK(s.lambda == -2.0);
    CHECK(s.duals().ineq == d.ineq);
    d.ineq.resize(3);
    CHECK_THROWS_AS(s.set_duals(d), UsageError);
}

TEST_CASE("single aggregator receives the whole supply") {
    World w = small_world(1, 6.0, 0.0);
    SolverSettings s = small_settings();
    BilevelResult r = run_bilevel(w, Mode::EfficientOnly, s);
    CHECK(r.converged);
    CHECK(r.state.p[0] == doctest::Approx(6.0).epsilon(1e-3));
    CHECK(duals_nonnegative(r.state));
    CHECK(r.feasibility <= s.tol_feas);
    CHECK(r.aggregators[0].allocation == doctest::Approx(r.state.p[0]).epsilon(1e-3));
}

TEST_CASE("one DSO step on two aggregators") {
    World w = small_world(2, 8.0, 0.0);
    SolverSettings s = small_settings();
    DsoState st = DsoState::uniform(w.grid, 2.0);
    std::vector<AggregatorState> aggs = w.aggregators;
    DsoStep step = evaluate_dso_iteration(st, aggs, w.grid, w.network.agent_counts(), Mode::Tradeoff, s);

    std::vector<AggregatorState> fresh = w.aggregators;
    const Vec c = run_auctions(fresh, st.p, s);
    CHECK((step.record.c - c).cwiseAbs().maxCoeff() <= 1e-8 * c.maxCoeff());
    const FairnessValue fv = fairness_objective(st.p, step.record.c, w.network.agent_counts());
    CHECK(step.record.fairness == fv.value);
    CHECK(step.record.inner_product == doctest::Approx(step.record.c.dot(fv.gradient)));
    CHECK(step.record.weights.sum() == doctest::Approx(1.0));
    CHECK(step.record.weights.minCoeff() >= 0.0);
    CHECK(step.record.p == st.p);

    DsoState after = st;
    apply_dso_iteration(after, step);
    CHECK(after.k == 1);
    CHECK(after.p == st.p + step.step.update);
    CHECK(duals_nonnegative(after));
    // The equality is violated at p = (2, 2) with P0 = 8: the multiplier moves.
    CHECK(after.lambda != 0.0);
}

TEST_CASE("duals stay nonnegative along a run") {
    World w = small_world(3, 12.0, 0.02);
    SolverSettings s = small_settings();
    DsoState st = DsoState::uniform(w.grid, 0.5);
    std::vector<AggregatorState> aggs = w.aggregators;
    const std::vector<int> counts = w.network.agent_counts();
    for (int i = 0; i < 300; ++i) {
        IterationRecord rec = dso_iteration(st, aggs, w.grid, counts, Mode::Tradeoff, s);
        CHECK(duals_nonnegative(st));
        CHECK(rec.iter == i);
        CHECK(rec.nu >= 0.0);
        CHECK(rec.nu <= s.nu_max);
    }
}

TEST_CASE("runs are deterministic") {
    World w = small_world(3, 12.0, 0.0);
    SolverSettings s = small_settings();
    BilevelResult a = run_bilevel(w, Mode::Tradeoff, s);
    BilevelResult b = run_bilevel(w, Mode::Tradeoff, s);
    CHECK(a.iterations == b.iterations);
    CHECK(a.state.p == b.state.p);
    CHECK(a.c == b.c);
    CHECK(a.welfare == b.welfare);
    CHECK(a.stop_reason == b.stop_reason);
}

TEST_CASE("tradeoff is fairer and efficient mode is more efficient") {
    World w = small_world(3, 12.0, 0.0);
    SolverSettings s = small_settings();
    BilevelResult eff = run_bilevel(w, Mode::EfficientOnly, s);
    s.cosine_target = -0.98;
    BilevelResult fair = run_bilevel(w, Mode::Tradeoff, s);
    CHECK(eff.converged);
    CHECK(fair.converged);
    CHECK(fair.fairness >= eff.fairness - 1e-9);
    CHECK(eff.welfare >= fair.welfare - 1e-9);
    CHECK(eff.feasibility <= s.tol_feas);
    CHECK(fair.feasibility <= s.tol_feas);
}

TEST_CASE("warm start rescales onto the energy balance") {
    World w = small_world(3, 12.0, 0.0, 2.0);
    SolverSettings s = small_settings();
    BilevelResult prev = run_bilevel(w, Mode::EfficientOnly, s);
    World moved = small_world(3, 12.5, 0.0, 2.0);
    DsoState st = warm_start_state(prev, moved.grid);
    CHECK(moved.grid.c_P0.dot(st.p) + moved.grid.c_P00 == doctest::Approx(12.5).epsilon(1e-12));
    CHECK(st.k == 0);
    CHECK(st.lambda == prev.state.lambda);
    CHECK(st.beta == prev.state.beta);
    const Vec ratio = st.p.cwiseQuotient(prev.state.p);
    CHECK(ratio.maxCoeff() - ratio.minCoeff() <= 1e-12);

    BilevelResult warm = warm_restart(moved, prev, Mode::EfficientOnly, s);
    BilevelResult cold = run_bilevel(moved, Mode::EfficientOnly, s);
    CHECK(warm.converged);
    CHECK(warm.iterations <= cold.iterations);
    CHECK(warm.welfare == doctest::Approx(cold.welfare).epsilon(1e-4));

    BilevelResult empty = prev;
    empty.state.p.setZero();
    CHECK_THROWS_AS(warm_start_state(empty, moved.grid), UsageError);
}

TEST_CASE("Pareto sweep") {
    World w = small_world(2, 8.0, 0.0);
    SolverSettings s = small_settings();
    s.max_iter = 400;
    CHECK_THROWS_AS(pareto_sweep(w, s, 1, 5), UsageError);
    std::vector<SweepPoint> a = pareto_sweep(w, s, 3, 5);
    std::vector<SweepPoint> b = pareto_sweep(w, s, 3, 5);
    REQUIRE(a.size() == 3);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].run == static_cast<int>(i));
        CHECK(a[i].welfare == b[i].welfare);
        CHECK(a[i].fairness == b[i].fairness);
        CHECK(a[i].error == b[i].error);
    }
}

TEST_CASE("dominance and monotonicity of sweep points") {
    auto pt = [](double w, double f) {
        SweepPoint p;
        p.welfare = w;
        p.fairness = f;
        return p;
    };
    std::vector<SweepPoint> front = {pt(1, 3), pt(2, 2), pt(3, 1)};
    CHECK(dominated_points(front, 0.0).empty());
    CHECK(is_monotone_tradeoff(front, 0.0));
    front.push_back(pt(1.5, 1.5));
    CHECK(dominated_points(front, 0.0) == std::vector<int>{3});
    CHECK(dominated_points(front, 0.6).empty());
    CHECK_FALSE(is_monotone_tradeoff(front, 0.0));
    front.back().error = "diverged";
    CHECK(dominated_points(front, 0.0).empty());
    CHECK(is_monotone_tradeoff(front, 0.0));
}

TEST_CASE("bilevel input errors") {
    World w = small_world(2, 8.0, 0.0);
    SolverSettings s = small_settings();
    s.max_iter = 0;
    CHECK_THROWS_AS(run_bilevel(w, Mode::Tradeoff, s), UsageError);
    s = small_settings();
    DsoState bad = DsoState::uniform(w.grid, 1.0);
    bad.p.resize(3);
    CHECK_THROWS_AS(run_bilevel(w, Mode::Tradeoff, s, &bad), UsageError);
    std::vector<AggregatorState> aggs = w.aggregators;
    CHECK_THROWS_AS(run_auctions(aggs, Vec::Ones(3), s), UsageError);
}
