#pragma once

#include "alma/linalg.hpp"

#include <string>
#include <vector>

namespace alma {

enum class UtilityFamily {
    Log,      // a ln(1 + b x)
    Sigmoid,  // a x^2 / (b + x^2)
};

std::string to_string(UtilityFamily f);
UtilityFamily utility_family_from_string(const std::string& s);

struct Agent {
    int id = 0;
    UtilityFamily family = UtilityFamily::Log;
    double a = 1.0;
    double b = 1.0;
    double g = 0.0;           // PV generation
    double power_bid = 0.0;   // negative means net sale
    double cost_bid = 0.0;
};

double utility(const Agent& agent, double x);
double marginal_utility(const Agent& agent, double x);
double marginal_utility_slope(const Agent& agent, double x);

/// argmax over z >= lower_bound of u(z) - c z. Ties resolve to the lower
/// bound.
double best_consumption(const Agent& agent, double c, double lower_bound);

/// argmax over x >= -g of u(x + g) - c x.
double seller_best_response(const Agent& agent, double c);

/// Each buyer receives (cost_i p_i / R) S.
Vec proportional_allocation(const Vec& power, const Vec& cost, double supply, double revenue);

/// argmax over x >= 0 of u((S p / R) x + g) - x p; 0 when no positive bid
/// improves on not buying.
double buyer_cost_bid(const Agent& agent, double power, double supply, double revenue);

double seller_payoff(const Agent& agent, double power, double c);
double buyer_payoff(const Agent& agent, double bid, double power, double supply, double revenue);

enum class Role {
    Power,  // seller: receives c, returns a power bid
    Cost,   // buyer: receives an allocation, returns a cost bid
};

struct AggregatorState {
    int id = 0;
    std::vector<Agent> agents;
    std::vector<Role> roles;
    std::vector<double> money;  // buyers' monetary bids cost_bid * power_bid
    double unit_cost = 0.0;
    double supply = 0.0;
    double revenue = 0.0;
    double allocation = 0.0;
    double damping = 1.0;
    bool initialized = false;

    explicit AggregatorState(int id = 0, std::vector<Agent> agents = {});

    std::vector<int> power_bidders() const;
    std::vector<int> cost_bidders() const;
    int agent_count() const { return static_cast<int>(agents.size()); }
};

struct AuctionOptions {
    double tol = 1e-8;
    int max_iter = 500;
    /// A buyer becomes a seller only when its cost bid is below
    /// (1 - role_tol) c.
    double role_tol = 0.25;
    double initial_cost = 1.0;
};

struct AuctionResult {
    double unit_cost = 0.0;
    Vec allocations;
    int iterations = 0;
    bool converged = false;
    bool damped = false;
    int reassignments = 0;
};

/// Runs the aggregator double auction for DSO allocation p_k, continuing
/// from the stored state when it is initialized.
AuctionResult run_auction(AggregatorState& state, double p_k, const AuctionOptions& options = {});

struct EquilibriumReport {
    double max_residual = 0.0;
    std::vector<int> active;         // agent indices with interior consumption
    std::vector<double> residuals;   // |u'(p + g) - c| per active agent
    bool passed = true;
    std::string warning;
};

EquilibriumReport verify_equilibrium(const AggregatorState& state, double tol);

/// Sum of u(p_i + g_i) over the aggregator's agents.
double aggregator_utility(const AggregatorState& state);

/// Largest gain any single agent obtains by scaling its own bid by
/// (1 +/- rel) with the aggregate quantities held fixed.
double max_unilateral_gain(const AggregatorState& state, double rel = 0.01);

}  // namespace alma
