#include "alma/market.hpp"

#include "alma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alma {

std::string to_string(UtilityFamily f) { return f == UtilityFamily::Log ? "log" : "sigmoid"; }

UtilityFamily utility_family_from_string(const std::string& s) {
    if (s == "log") return UtilityFamily::Log;
    if (s == "sigmoid") return UtilityFamily::Sigmoid;
    throw UsageError("unknown utility family '" + s + "' (expected log or sigmoid)");
}

namespace {

void check_domain(const Agent& agent, double x) {
    if (agent.family == UtilityFamily::Log) {
        if (!(1.0 + agent.b * x > 0.0)) throw DomainError("log utility needs 1 + b x > 0");
    } else if (!(x >= 0.0)) {
        throw DomainError("sigmoid utility needs x >= 0");
    }
}

// Root of u'(z) = c on the decreasing branch z >= sqrt(b/3) of the sigmoid
// marginal; the caller guarantees c is below the peak marginal.
double sigmoid_decreasing_root(const Agent& agent, double c) {
    double lo = std::sqrt(agent.b / 3.0);
    double hi = std::max(2.0 * lo, 1.0);
    while (marginal_utility(agent, hi) > c) hi *= 2.0;
    double z = hi;
    for (int it = 0; it < 200; ++it) {
        const double f = marginal_utility(agent, z) - c;
        if (f > 0.0)
            lo = z;
        else
            hi = z;
        const double slope = marginal_utility_slope(agent, z);
        double next = slope < 0.0 ? z - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 1e-15 * std::max(1.0, z) || hi - lo <= 1e-15 * std::max(1.0, hi)) {
            z = next;
            break;
        }
        z = next;
    }
    return z;
}

}  // namespace

double utility(const Agent& agent, double x) {
    check_domain(agent, x);
    if (agent.family == UtilityFamily::Log) return agent.a * std::log1p(agent.b * x);
    return agent.a * x * x / (agent.b + x * x);
}

double marginal_utility(const Agent& agent, double x) {
    check_domain(agent, x);
    if (agent.family == UtilityFamily::Log) return agent.a * agent.b / (1.0 + agent.b * x);
    const double d = agent.b + x * x;
    return 2.0 * agent.a * agent.b * x / (d * d);
}

double marginal_utility_slope(const Agent& agent, double x) {
    check_domain(agent, x);
    if (agent.family == UtilityFamily::Log) {
        const double d = 1.0 + agent.b * x;
        return -agent.a * agent.b * agent.b / (d * d);
    }
    const double d = agent.b + x * x;
    return 2.0 * agent.a * agent.b * (agent.b - 3.0 * x * x) / (d * d * d);
}

double best_consumption(const Agent& agent, double c, double lower_bound) {
    detail::require(c > 0.0, "unit cost must be positive");
    if (agent.family == UtilityFamily::Log) {
        detail::require(1.0 + agent.b * lower_bound > 0.0, "lower bound outside the log domain");
        return std::max(agent.a / c - 1.0 / agent.b, lower_bound);
    }
    detail::require(lower_bound >= 0.0, "lower bound outside the sigmoid domain");
    const double peak = marginal_utility(agent, std::sqrt(agent.b / 3.0));
    if (c >= peak) return lower_bound;
    const double z = sigmoid_decreasing_root(agent, c);
    if (z <= lower_bound) return lower_bound;
    const double at_root = utility(agent, z) - c * z;
    const double at_bound = utility(agent, lower_bound) - c * lower_bound;
    return at_root > at_bound ? z : lower_bound;
}

double seller_best_response(const Agent& agent, double c) {
    return best_consumption(agent, c, 0.0) - agent.g;
}

Vec proportional_allocation(const Vec& power, const Vec& cost, double supply, double revenue) {
    detail::require(power.size() == cost.size(), "power and cost bids must have equal length");
    detail::require(supply >= 0.0, "supply must be nonnegative");
    if (!(revenue > 0.0)) throw DomainError("auction degenerate: no willing buyers (revenue is zero)");
    return power.cwiseProduct(cost) * (supply / revenue);
}

double buyer_cost_bid(const Agent& agent, double power, double supply, double revenue) {
    detail::require(power > 0.0 && supply > 0.0 && revenue > 0.0,
                    "buyer bid needs positive allocation, supply and revenue");
    const double price = revenue / supply;
    const double y = best_consumption(agent, price, agent.g) - agent.g;
    if (y <= 0.0) return 0.0;
    return y * revenue / (supply * power);
}

double seller_payoff(const Agent& agent, double power, double c) {
    return utility(agent, power + agent.g) - c * power;
}

double buyer_payoff(const Agent& agent, double bid, double power, double supply, double revenue) {
    return utility(agent, supply * power / revenue * bid + agent.g) - bid * power;
}

AggregatorState::AggregatorState(int id_, std::vector<Agent> agents_)
    : id(id_), agents(std::move(agents_)), roles(agents.size(), Role::Cost), money(agents.size(), 0.0) {}

std::vector<int> AggregatorState::power_bidders() const {
    std::vector<int> out;
    for (size_t i = 0; i < agents.size(); ++i)
        if (roles[i] == Role::Power) out.push_back(agents[i].id);
    return out;
}

std::vector<int> AggregatorState::cost_bidders() const {
    std::vector<int> out;
    for (size_t i = 0; i < agents.size(); ++i)
        if (roles[i] == Role::Cost) out.push_back(agents[i].id);
    return out;
}

namespace {

constexpr double kTiny = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxLogStep = 0.6931471805599453;  // log 2

void cold_start(AggregatorState& s, double p_k, double c) {
    s.unit_cost = c;
    s.damping = 1.0;
    double sold = 0.0;
    for (size_t i = 0; i < s.agents.size(); ++i) {
        Agent& ag = s.agents[i];
        const double p = seller_best_response(ag, c);
        ag.power_bid = p;
        if (p >= 0.0) {
            s.roles[i] = Role::Cost;
            ag.cost_bid = c;
            s.money[i] = c * p;
        } else {
            s.roles[i] = Role::Power;
            ag.cost_bid = c;
            s.money[i] = 0.0;
            sold += p;
        }
    }
    s.supply = p_k - sold;
    s.revenue = 0.0;
    for (size_t i = 0; i < s.agents.size(); ++i)
        if (s.roles[i] == Role::Cost) s.revenue += s.money[i];
    s.initialized = true;
}

// Buyer allocations proportional to monetary bids (step 6); returns the
// revenue used as the denominator.
void allocate(AggregatorState& s) {
    double total = 0.0;
    for (size_t i = 0; i < s.agents.size(); ++i)
        if (s.roles[i] == Role::Cost) total += s.money[i];
    for (size_t i = 0; i < s.agents.size(); ++i) {
        if (s.roles[i] != Role::Cost) continue;
        s.agents[i].power_bid = total > 0.0 ? s.money[i] / total * s.supply : 0.0;
    }
}

}  // namespace

AuctionResult run_auction(AggregatorState& s, double p_k, const AuctionOptions& opt) {
    detail::require(!s.agents.empty(), "auction needs at least one agent");
    detail::require(opt.tol > 0.0 && opt.max_iter >= 1, "auction tolerance and iteration cap must be positive");
    detail::require(s.roles.size() == s.agents.size() && s.money.size() == s.agents.size(),
                    "aggregator state is inconsistent");
    double potential = p_k;
    for (const Agent& ag : s.agents) potential += ag.g;
    detail::require(potential > 0.0, "no energy available: allocation plus generation must be positive");

    if (!s.initialized || !(s.unit_cost > 0.0))
        cold_start(s, p_k, opt.initial_cost > 0.0 ? opt.initial_cost : 1.0);
    s.allocation = p_k;
    s.damping = 1.0;

    AuctionResult res;
    double prev_delta = 0.0, prev_prev_delta = 0.0;
    int quiet = 0;
    double lo = 0.0, hi = kInf;
    int settled = 0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        res.iterations = it;
        const double c_old = s.unit_cost;
        int moved = 0;

        // Steps 1-2: role reassignment from the previous iteration's bids.
        for (size_t i = 0; i < s.agents.size(); ++i) {
            Agent& ag = s.agents[i];
            if (s.roles[i] == Role::Power && ag.power_bid >= 0.0) {
                s.roles[i] = Role::Cost;
                ag.cost_bid = c_old;
                s.money[i] = c_old * ag.power_bid;
                if (ag.power_bid > kTiny) ++moved;
            }
        }
        for (size_t i = 0; i < s.agents.size(); ++i) {
            Agent& ag = s.agents[i];
            if (s.roles[i] == Role::Cost && ag.cost_bid < (1.0 - opt.role_tol) * c_old &&
                seller_best_response(ag, c_old) < 0.0) {
                s.roles[i] = Role::Power;
                if (ag.power_bid > kTiny || s.money[i] > kTiny) ++moved;
                s.money[i] = 0.0;
            }
        }
        double revenue = 0.0;
        for (size_t i = 0; i < s.agents.size(); ++i)
            if (s.roles[i] == Role::Cost) revenue += s.money[i];
        s.revenue = revenue;

        // Step 3: cost update toward R/S in log space, damped when the
        // steps ring or grow, and kept inside the bracket of costs seen with
        // excess supply and excess demand since the last reassignment.
        double target;
        if (s.supply <= 0.0)
            target = 2.0 * c_old;
        else if (s.revenue <= 0.0)
            target = 0.5 * c_old;
        else
            target = s.revenue / s.supply;
        if (moved > 0) {
            lo = 0.0;
            hi = kInf;
            settled = 0;
        } else if (++settled >= 2) {
            if (target > c_old)
                lo = std::max(lo, c_old);
            else if (target < c_old)
                hi = std::min(hi, c_old);
        }
        const double delta = s.damping * std::clamp(std::log(target / c_old), -kMaxLogStep, kMaxLogStep);
        if (it > 2) {
            const bool growing = std::abs(delta) > std::abs(prev_delta) &&
                                 std::abs(prev_delta) > std::abs(prev_prev_delta);
            const bool ringing = delta * prev_delta < 0.0 && std::abs(delta) > 0.5 * std::abs(prev_delta);
            if ((growing || ringing) && s.damping > 1e-3) {
                s.damping *= 0.5;
                res.damped = true;
                quiet = 0;
            } else if (++quiet >= 5 && s.damping < 1.0) {
                s.damping = std::min(1.0, 2.0 * s.damping);
                quiet = 0;
            }
        }
        double c_new = c_old * std::exp(s.damping * std::clamp(std::log(target / c_old), -kMaxLogStep, kMaxLogStep));
        if (lo > 0.0 && hi < kInf && (c_new <= lo || c_new >= hi)) c_new = std::sqrt(lo * hi);
        prev_prev_delta = prev_delta;
        prev_delta = std::log(c_new / c_old);
        s.unit_cost = c_new;
        const double c = c_new;

        // Steps 4-5: sellers respond to c, supply tallied.
        double sold = 0.0;
        for (size_t i = 0; i < s.agents.size(); ++i) {
            if (s.roles[i] != Role::Power) continue;
            Agent& ag = s.agents[i];
            ag.power_bid = seller_best_response(ag, c);
            ag.cost_bid = c;
            sold += ag.power_bid;
        }
        s.supply = p_k - sold;

        // Step 6: proportional allocation of the supply.
        allocate(s);

        // Steps 7-8: buyers bid against the posted cost; the monetary bid
        // c y* fixes their share of the next allocation.
        double new_revenue = 0.0;
        for (size_t i = 0; i < s.agents.size(); ++i) {
            if (s.roles[i] != Role::Cost) continue;
            Agent& ag = s.agents[i];
            const double y = best_consumption(ag, c, ag.g) - ag.g;
            s.money[i] = y > 0.0 ? c * y : 0.0;
            if (ag.power_bid > 0.0)
                ag.cost_bid = s.money[i] / ag.power_bid;
            else
                ag.cost_bid = s.money[i] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            new_revenue += s.money[i];
        }
        s.revenue = new_revenue;
        res.reassignments += moved;

        const bool cost_settled =
            s.supply > 0.0 && s.revenue > 0.0 && std::abs(s.revenue / s.supply - c) <= opt.tol * c;
        if (cost_settled && moved == 0) {
            res.converged = true;
            break;
        }
    }
    // Final allocation against the latest bids.
    if (s.revenue > 0.0 && s.supply > 0.0) {
        allocate(s);
        for (size_t i = 0; i < s.agents.size(); ++i)
            if (s.roles[i] == Role::Cost && s.agents[i].power_bid > 0.0)
                s.agents[i].cost_bid = s.money[i] / s.agents[i].power_bid;
    }
    res.unit_cost = s.unit_cost;
    res.allocations.resize(static_cast<Index>(s.agents.size()));
    for (size_t i = 0; i < s.agents.size(); ++i) res.allocations[static_cast<Index>(i)] = s.agents[i].power_bid;
    return res;
}

EquilibriumReport verify_equilibrium(const AggregatorState& s, double tol) {
    EquilibriumReport rep;
    for (size_t i = 0; i < s.agents.size(); ++i) {
        const Agent& ag = s.agents[i];
        const double z = ag.power_bid + ag.g;
        const bool interior = z > kTiny && (s.roles[i] == Role::Power || ag.power_bid > kTiny);
        if (!interior) continue;
        const double r = std::abs(marginal_utility(ag, z) - s.unit_cost);
        rep.active.push_back(static_cast<int>(i));
        rep.residuals.push_back(r);
        rep.max_residual = std::max(rep.max_residual, r);
    }
    if (rep.active.empty()) rep.warning = "no active agents; equilibrium check is vacuous";
    rep.passed = rep.max_residual <= tol;
    return rep;
}

double aggregator_utility(const AggregatorState& s) {
    double total = 0.0;
    for (const Agent& ag : s.agents) total += utility(ag, ag.power_bid + ag.g);
    return total;
}

double max_unilateral_gain(const AggregatorState& s, double rel) {
    double worst = -std::numeric_limits<double>::infinity();
    double total_money = 0.0;
    for (size_t i = 0; i < s.agents.size(); ++i)
        if (s.roles[i] == Role::Cost) total_money += s.money[i];
    for (size_t i = 0; i < s.agents.size(); ++i) {
        const Agent& ag = s.agents[i];
        for (double sign : {-1.0, 1.0}) {
            double gain;
            if (s.roles[i] == Role::Power) {
                const double p = ag.power_bid * (1.0 + sign * rel);
                if (p + ag.g < 0.0) continue;
                gain = seller_payoff(ag, p, s.unit_cost) - seller_payoff(ag, ag.power_bid, s.unit_cost);
            } else {
                if (!(ag.power_bid > 0.0) || !(total_money > 0.0)) continue;
                const double x = ag.cost_bid * (1.0 + sign * rel);
                gain = buyer_payoff(ag, x, ag.power_bid, s.supply, total_money) -
                       buyer_payoff(ag, ag.cost_bid, ag.power_bid, s.supply, total_money);
            }
            worst = std::max(worst, gain);
        }
    }
    return worst;
}

}  // namespace alma
