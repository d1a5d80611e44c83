#pragma once

#include "alma/grid.hpp"
#include "alma/market.hpp"
#include "alma/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace alma {

/// Ranges for the random prosumer population.
struct AgentGenSpec {
    int count_min = 9;
    int count_max = 25;
    std::vector<std::string> favored = {"A4", "A6", "A10", "A12"};
    double sigmoid_fraction = 0.3;
    double pv_fraction = 0.3;
    double log_a_min = 1.0, log_a_max = 3.0;
    double log_b_min = 0.5, log_b_max = 2.0;
    double sigmoid_a_min = 4.0, sigmoid_a_max = 8.0;
    double sigmoid_b_min = 1.0, sigmoid_b_max = 4.0;
    double pv_min = 0.5, pv_max = 3.0;
    /// Multiplies every drawn utility scale a (the currency unit).
    double utility_scale = 1.0;
};

struct SolverSettings {
    int max_iter = 3000;
    double tol_feas = 1e-4;
    /// Stationarity: min-norm <= tol_stat * (|c| + |g|).
    double tol_stat = 1e-5;
    /// Also stop once the gradient cosine reaches this value while feasible;
    /// values below -1 disable the test.
    double cosine_target = -2.0;
    double primal_step = 1e-2;
    double dual_gain = 0.05;
    double penalty = 0.0;
    double nu_max = 1.0;
    /// Cap on the per-iteration move along the objective direction, as a
    /// fraction of P0 / A; zero disables the cap.
    double max_move = 0.1;
    /// Initial allocation: init_scale * P0 / A per aggregator.
    double init_scale = 1e-3;
    double auction_tol = 1e-8;
    int auction_max_iter = 500;
    double role_tol = 0.25;
    double initial_cost = 1.0;
    /// Pareto sweep initialization: p_k = P0 / A * U(sweep_init_min, sweep_init_max).
    double sweep_init_min = 0.1;
    double sweep_init_max = 2.0;
    /// Pareto sweep equality multiplier drawn from U(-s, s) * c0.
    double sweep_dual_scale = 0.1;
};

struct Scenario {
    std::string name = "ieee37";
    std::string topology = "ieee37";  // "ieee37" or a topology file path
    std::string constraints = "build";  // "build" or a constraint file path
    std::uint64_t seed = 1;
    double P0 = 0.0;
    double c0 = 0.0;
    AgentGenSpec agents;
    SolverSettings solver;
    /// Explicit populations per aggregator; empty means draw from the seed.
    std::vector<std::vector<Agent>> populations;
};

/// The bundled 37-node scenario.
Scenario default_scenario();

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// Draws one aggregator's prosumers.
std::vector<Agent> generate_agents(int count, const AgentGenSpec& spec, Rng& rng);

/// Network, constraints and aggregator states ready for a run.
struct World {
    NetworkModel network;
    GridConstraints grid;
    std::vector<AggregatorState> aggregators;

    std::vector<int> agent_counts() const;
};

World build_world(const Scenario& s);

/// Scenario with the generated populations written out explicitly.
Scenario materialize(const Scenario& s);

}  // namespace alma
