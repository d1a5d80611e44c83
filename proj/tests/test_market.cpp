#include "alma/errors.hpp"
#include "alma/market.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace alma;
using alma::test::log_agent;
using alma::test::random_population;
using alma::test::sigmoid_agent;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// Clearing cost of a log population by bisection on the aggregate demand
// sum max(a/c - 1/b, 0) - g = p.
double log_clearing_cost(const std::vector<Agent>& agents, double p) {
    auto excess = [&](double c) {
        double d = -p;
        for (const Agent& a : agents) d += std::max(a.a / c - 1.0 / a.b, 0.0) - a.g;
        return d;
    };
    double lo = 1e-12, hi = 1.0;
    while (excess(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

AuctionOptions tight() {
    AuctionOptions o;
    o.tol = 1e-12;
    o.max_iter = 5000;
    return o;
}

}  // namespace

TEST_CASE("utility families") {
    const Agent lg = log_agent(2, 1);
    CHECK(utility(lg, 0.0) == 0.0);
    CHECK(utility(lg, std::exp(1.0) - 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(marginal_utility(lg, 1.0) == doctest::Approx(1.0));
    CHECK(marginal_utility_slope(lg, 1.0) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(utility(lg, -1.0), DomainError);

    const Agent sg = sigmoid_agent(4, 1);
    CHECK(utility(sg, 1.0) == doctest::Approx(2.0));
    CHECK(marginal_utility(sg, 1.0) == doctest::Approx(2.0));
    CHECK(marginal_utility_slope(sg, std::sqrt(1.0 / 3.0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(utility(sg, -0.1), DomainError);

    CHECK(utility_family_from_string("sigmoid") == UtilityFamily::Sigmoid);
    CHECK(to_string(UtilityFamily::Log) == "log");
    CHECK_THROWS_AS(utility_family_from_string("linear"), UsageError);
}

TEST_CASE("best responses") {
    CHECK(seller_best_response(log_agent(2, 1, 3), 1.0) == doctest::Approx(-2.0));
    CHECK(seller_best_response(log_agent(2, 1, 0), 2.0) == doctest::Approx(0.0));
    CHECK(best_consumption(log_agent(2, 1), 4.0, 0.0) == 0.0);

    // Sigmoid above its peak marginal consumes nothing.
    const Agent sg = sigmoid_agent(4, 1);
    const double peak = marginal_utility(sg, std::sqrt(1.0 / 3.0));
    CHECK(best_consumption(sg, 1.01 * peak, 0.0) == 0.0);
    const double z = best_consumption(sg, 0.5, 0.0);
    CHECK(z > 0.0);
    CHECK(marginal_utility(sg, z) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(utility(sg, z) - 0.5 * z >= 0.0);

    // Brute force over a grid agrees with the closed-form responses.
    Rng rng(41);
    for (int t = 0; t < 200; ++t) {
        const Agent a = rng.uniform() < 0.5 ? log_agent(rng.uniform(1, 3), rng.uniform(0.5, 2))
                                            : sigmoid_agent(rng.uniform(4, 8), rng.uniform(1, 4));
        const double c = rng.uniform(0.2, 2.0);
        const double best = best_consumption(a, c, 0.0);
        const double v = utility(a, best) - c * best;
        for (int i = 0; i <= 2000; ++i) {
            const double x = i * 0.01;
            CHECK(utility(a, x) - c * x <= v + 1e-9);
        }
    }
    CHECK_THROWS_AS(best_consumption(log_agent(1, 1), 0.0, 0.0), UsageError);
}

TEST_CASE("proportional allocation") {
    CHECK(proportional_allocation(vec({1, 2}), vec({1, 1}), 3.0, 3.0) == vec({1, 2}));
    CHECK(proportional_allocation(vec({1, 1}), vec({2, 1}), 3.0, 3.0).isApprox(vec({2, 1})));
    CHECK_THROWS_AS(proportional_allocation(vec({1}), vec({1}), 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(proportional_allocation(vec({1}), vec({1, 2}), 1.0, 1.0), UsageError);
}

TEST_CASE("buyer cost bid") {
    CHECK(buyer_cost_bid(log_agent(2, 1), 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(buyer_cost_bid(log_agent(0.5, 1), 1.0, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(buyer_cost_bid(log_agent(2, 1), 0.0, 1.0, 1.0), UsageError);
}

TEST_CASE("one buyer clears at its marginal utility") {
    AggregatorState s(0, {log_agent(2, 1)});
    AuctionResult r = run_auction(s, 1.0, tight());
    CHECK(r.converged);
    CHECK(r.unit_cost == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.allocations[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two identical buyers split evenly") {
    AggregatorState s(0, {log_agent(2, 1, 0, 0), log_agent(2, 1, 0, 1)});
    AuctionResult r = run_auction(s, 4.0, tight());
    CHECK(r.converged);
    CHECK(r.allocations[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.allocations[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.unit_cost == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(s.cost_bidders().size() == 2);
}

TEST_CASE("seller and buyer match a bisection oracle") {
    const std::vector<Agent> agents = {log_agent(1, 1, 3, 0), log_agent(3, 1, 0, 1)};
    AggregatorState s(0, agents);
    AuctionResult r = run_auction(s, 0.5, tight());
    const double c = log_clearing_cost(agents, 0.5);
    CHECK(r.converged);
    CHECK(r.unit_cost == doctest::Approx(c).epsilon(1e-9));
    CHECK(r.allocations[0] < 0.0);
    CHECK(r.allocations[1] > 0.0);
    CHECK(r.allocations.sum() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(s.power_bidders() == std::vector<int>{0});
}

TEST_CASE("log populations clear at the oracle cost") {
    Rng rng(42);
    for (int t = 0; t < 30; ++t) {
        std::vector<Agent> agents;
        const int n = 2 + rng.uniform_int(0, 10);
        for (int i = 0; i < n; ++i)
            agents.push_back(log_agent(rng.uniform(1, 3), rng.uniform(0.5, 2),
                                       rng.uniform() < 0.3 ? rng.uniform(0.5, 3) : 0.0, i));
        const double p = rng.uniform(0.5, 2.0) * n;
        AggregatorState s(t, agents);
        AuctionResult r = run_auction(s, p, tight());
        CHECK(r.converged);
        CHECK(r.unit_cost == doctest::Approx(log_clearing_cost(agents, p)).epsilon(1e-8));
    }
}

TEST_CASE("random aggregators reach an equilibrium") {
    Rng rng(43);
    int vacuous = 0;
    for (int t = 0; t < 50; ++t) {
        const int n = 9 + rng.uniform_int(0, 16);
        AggregatorState s(t, random_population(rng, n));
        const double p = rng.uniform(16.0, 48.0);
        AuctionResult r = run_auction(s, p, tight());
        CHECK(r.converged);
        EquilibriumReport eq = verify_equilibrium(s, 1e-6);
        CHECK(eq.passed);
        if (!eq.warning.empty()) ++vacuous;
        CHECK(std::abs(r.allocations.sum() - p) <= 1e-9 * std::max(1.0, p));
        for (size_t i = 0; i < s.agents.size(); ++i) CHECK(s.agents[i].power_bid + s.agents[i].g >= -1e-12);
        CHECK(max_unilateral_gain(s) <= 1e-9);
    }
    CHECK(vacuous == 0);
}

TEST_CASE("no equilibrium inside a sigmoid demand gap") {
    // Sigmoid(4, 1) demand jumps from 0 to 1 at its exit cost, so a lone
    // buyer offered 0.5 has no market-clearing cost.
    AggregatorState s(0, {sigmoid_agent(4, 1)});
    AuctionOptions o = tight();
    o.max_iter = 500;
    AuctionResult r = run_auction(s, 0.5, o);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(verify_equilibrium(s, 1e-6).passed);
    AggregatorState ok(0, {sigmoid_agent(4, 1)});
    CHECK(run_auction(ok, 2.0, o).converged);
}

TEST_CASE("equilibrium check detects a perturbed cost and warns when vacuous") {
    AggregatorState s(0, {log_agent(2, 1, 0, 0), log_agent(3, 2, 1, 1)});
    run_auction(s, 2.0, tight());
    CHECK(verify_equilibrium(s, 1e-8).passed);
    s.unit_cost *= 1.001;
    CHECK_FALSE(verify_equilibrium(s, 1e-6).passed);

    AggregatorState idle(1, {log_agent(1, 1)});
    EquilibriumReport rep = verify_equilibrium(idle, 1e-6);
    CHECK(rep.active.empty());
    CHECK(rep.passed);
    CHECK_FALSE(rep.warning.empty());
}

TEST_CASE("aggregator utility sums agent utilities") {
    AggregatorState s(0, {log_agent(2, 1, 0, 0), sigmoid_agent(4, 1, 1, 1)});
    s.agents[0].power_bid = 1.0;
    s.agents[1].power_bid = 0.0;
    CHECK(aggregator_utility(s) == doctest::Approx(2.0 * std::log(2.0) + 2.0));
}

TEST_CASE("unit cost falls as the allocation grows") {
    Rng rng(44);
    const std::vector<Agent> agents = random_population(rng, 10);
    double prev = std::numeric_limits<double>::infinity();
    for (double p = 2.0; p <= 30.0; p += 2.0) {
        AggregatorState s(0, agents);
        const double c = run_auction(s, p, tight()).unit_cost;
        CHECK(c <= prev + 1e-12);
        prev = c;
    }
}

TEST_CASE("auction input errors") {
    AggregatorState empty(0, {});
    CHECK_THROWS_AS(run_auction(empty, 1.0), UsageError);
    AggregatorState s(0, {log_agent(1, 1)});
    CHECK_THROWS_AS(run_auction(s, -1.0), UsageError);
    AuctionOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(run_auction(s, 1.0, bad), UsageError);
}
