#include "alma/scenario.hpp"

#include "alma/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace alma {

using nlohmann::json;

Scenario default_scenario() {
    Scenario s;
    s.P0 = 550.0;
    s.c0 = 3e-4;
    s.agents.utility_scale = 1e-3;
    s.solver.primal_step = 2e4;
    s.solver.cosine_target = -0.98;
    s.solver.initial_cost = 1e-3;
    return s;
}

namespace {

json agent_to_json(const Agent& a) {
    return json{{"id", a.id}, {"family", to_string(a.family)}, {"a", a.a}, {"b", a.b}, {"g", a.g}};
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("scenario field '" + where + key + "': " + e.what());
    }
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["topology"] = s.topology;
    j["constraints"] = s.constraints;
    j["seed"] = s.seed;
    j["P0"] = s.P0;
    j["c0"] = s.c0;
    const AgentGenSpec& g = s.agents;
    j["agents"] = {{"count_min", g.count_min},           {"count_max", g.count_max},
                   {"favored", g.favored},               {"sigmoid_fraction", g.sigmoid_fraction},
                   {"pv_fraction", g.pv_fraction},       {"log_a", {g.log_a_min, g.log_a_max}},
                   {"log_b", {g.log_b_min, g.log_b_max}}, {"sigmoid_a", {g.sigmoid_a_min, g.sigmoid_a_max}},
                   {"sigmoid_b", {g.sigmoid_b_min, g.sigmoid_b_max}}, {"pv", {g.pv_min, g.pv_max}},
                   {"utility_scale", g.utility_scale}};
    const SolverSettings& v = s.solver;
    j["solver"] = {{"max_iter", v.max_iter},
                   {"tol_feas", v.tol_feas},
                   {"tol_stat", v.tol_stat},
                   {"cosine_target", v.cosine_target},
                   {"primal_step", v.primal_step},
                   {"dual_gain", v.dual_gain},
                   {"penalty", v.penalty},
                   {"nu_max", v.nu_max},
                   {"max_move", v.max_move},
                   {"init_scale", v.init_scale},
                   {"auction_tol", v.auction_tol},
                   {"auction_max_iter", v.auction_max_iter},
                   {"role_tol", v.role_tol},
                   {"initial_cost", v.initial_cost},
                   {"sweep_init", {v.sweep_init_min, v.sweep_init_max}},
                   {"sweep_dual_scale", v.sweep_dual_scale}};
    if (!s.populations.empty()) {
        json pops = json::array();
        for (const auto& pop : s.populations) {
            json arr = json::array();
            for (const Agent& a : pop) arr.push_back(agent_to_json(a));
            pops.push_back(arr);
        }
        j["populations"] = pops;
    }
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s = default_scenario();
    read(j, "name", s.name, "");
    read(j, "topology", s.topology, "");
    read(j, "constraints", s.constraints, "");
    read(j, "seed", s.seed, "");
    read(j, "P0", s.P0, "");
    read(j, "c0", s.c0, "");
    auto pair = [](const json& o, const char* key, double& lo, double& hi, const std::string& where) {
        if (!o.contains(key)) return;
        const json& v = o.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() || v[0] > v[1])
            throw ParseError("scenario field '" + where + key + "': expected [min, max]");
        lo = v[0].get<double>();
        hi = v[1].get<double>();
    };
    if (j.contains("agents")) {
        const json& a = j.at("agents");
        AgentGenSpec& g = s.agents;
        read(a, "count_min", g.count_min, "agents.");
        read(a, "count_max", g.count_max, "agents.");
        read(a, "favored", g.favored, "agents.");
        read(a, "sigmoid_fraction", g.sigmoid_fraction, "agents.");
        read(a, "pv_fraction", g.pv_fraction, "agents.");
        pair(a, "log_a", g.log_a_min, g.log_a_max, "agents.");
        pair(a, "log_b", g.log_b_min, g.log_b_max, "agents.");
        pair(a, "sigmoid_a", g.sigmoid_a_min, g.sigmoid_a_max, "agents.");
        pair(a, "sigmoid_b", g.sigmoid_b_min, g.sigmoid_b_max, "agents.");
        pair(a, "pv", g.pv_min, g.pv_max, "agents.");
        read(a, "utility_scale", g.utility_scale, "agents.");
        if (!(g.utility_scale > 0)) throw ParseError("scenario field 'agents.utility_scale': must be positive");
        if (g.count_min < 1 || g.count_min > g.count_max)
            throw ParseError("scenario field 'agents.count_min': need 1 <= count_min <= count_max");
        if (!(g.sigmoid_fraction >= 0 && g.sigmoid_fraction <= 1))
            throw ParseError("scenario field 'agents.sigmoid_fraction': must lie in [0, 1]");
        if (!(g.pv_fraction >= 0 && g.pv_fraction <= 1))
            throw ParseError("scenario field 'agents.pv_fraction': must lie in [0, 1]");
        if (g.log_a_min <= 0 || g.log_b_min <= 0 || g.sigmoid_a_min <= 0 || g.sigmoid_b_min <= 0 || g.pv_min < 0)
            throw ParseError("scenario field 'agents': utility parameters must be positive");
    }
    if (j.contains("solver")) {
        const json& o = j.at("solver");
        SolverSettings& v = s.solver;
        read(o, "max_iter", v.max_iter, "solver.");
        read(o, "tol_feas", v.tol_feas, "solver.");
        read(o, "tol_stat", v.tol_stat, "solver.");
        read(o, "cosine_target", v.cosine_target, "solver.");
        read(o, "primal_step", v.primal_step, "solver.");
        read(o, "dual_gain", v.dual_gain, "solver.");
        read(o, "penalty", v.penalty, "solver.");
        read(o, "nu_max", v.nu_max, "solver.");
        read(o, "max_move", v.max_move, "solver.");
        read(o, "init_scale", v.init_scale, "solver.");
        read(o, "auction_tol", v.auction_tol, "solver.");
        read(o, "auction_max_iter", v.auction_max_iter, "solver.");
        read(o, "role_tol", v.role_tol, "solver.");
        read(o, "initial_cost", v.initial_cost, "solver.");
        pair(o, "sweep_init", v.sweep_init_min, v.sweep_init_max, "solver.");
        read(o, "sweep_dual_scale", v.sweep_dual_scale, "solver.");
        if (v.max_iter < 1) throw ParseError("scenario field 'solver.max_iter': must be at least 1");
        if (!(v.primal_step > 0)) throw ParseError("scenario field 'solver.primal_step': must be positive");
        if (!(v.tol_feas >= 0) || !(v.tol_stat >= 0))
            throw ParseError("scenario field 'solver.tol_feas': tolerances must be nonnegative");
        if (!(v.nu_max > 0 && v.nu_max <= 1)) throw ParseError("scenario field 'solver.nu_max': must lie in (0, 1]");
    }
    if (!(s.P0 > 0)) throw ParseError("scenario field 'P0': must be positive");
    if (!(s.c0 >= 0)) throw ParseError("scenario field 'c0': must be nonnegative");
    if (j.contains("populations")) {
        const json& pops = j.at("populations");
        if (!pops.is_array()) throw ParseError("scenario field 'populations': expected an array");
        for (size_t k = 0; k < pops.size(); ++k) {
            std::vector<Agent> pop;
            for (size_t i = 0; i < pops[k].size(); ++i) {
                const json& o = pops[k][i];
                const std::string where = "populations[" + std::to_string(k) + "][" + std::to_string(i) + "].";
                Agent a;
                std::string fam = "log";
                read(o, "id", a.id, where);
                read(o, "family", fam, where);
                read(o, "a", a.a, where);
                read(o, "b", a.b, where);
                read(o, "g", a.g, where);
                try {
                    a.family = utility_family_from_string(fam);
                } catch (const UsageError& e) {
                    throw ParseError("scenario field '" + where + "family': " + e.what());
                }
                if (!(a.a > 0 && a.b > 0 && a.g >= 0))
                    throw ParseError("scenario field '" + where + "': need a > 0, b > 0, g >= 0");
                pop.push_back(a);
            }
            if (pop.empty()) throw ParseError("scenario field 'populations[" + std::to_string(k) + "]': empty population");
            s.populations.push_back(std::move(pop));
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open scenario file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write scenario file " + path);
    f << scenario_to_json(s);
    if (!f) throw UsageError("failed writing scenario file " + path);
}

std::vector<Agent> generate_agents(int count, const AgentGenSpec& spec, Rng& rng) {
    std::vector<Agent> out;
    for (int i = 0; i < count; ++i) {
        Agent a;
        a.id = i + 1;
        if (rng.uniform() < spec.sigmoid_fraction) {
            a.family = UtilityFamily::Sigmoid;
            a.a = spec.utility_scale * rng.uniform(spec.sigmoid_a_min, spec.sigmoid_a_max);
            a.b = rng.uniform(spec.sigmoid_b_min, spec.sigmoid_b_max);
        } else {
            a.family = UtilityFamily::Log;
            a.a = spec.utility_scale * rng.uniform(spec.log_a_min, spec.log_a_max);
            a.b = rng.uniform(spec.log_b_min, spec.log_b_max);
        }
        a.g = rng.uniform() < spec.pv_fraction ? rng.uniform(spec.pv_min, spec.pv_max) : 0.0;
        out.push_back(a);
    }
    return out;
}

std::vector<int> World::agent_counts() const {
    std::vector<int> out;
    for (const AggregatorState& a : aggregators) out.push_back(a.agent_count());
    return out;
}

namespace {

NetworkModel load_network(const Scenario& s) {
    if (s.topology == "ieee37") {
        std::istringstream in(ieee37_topology_text());
        return parse_topology(in);
    }
    return load_topology(s.topology);
}

}  // namespace

Scenario materialize(const Scenario& s) {
    if (!s.populations.empty()) return s;
    Scenario out = s;
    NetworkModel net = load_network(s);
    assign_agent_counts(net, s.agents.count_min, s.agents.count_max, s.agents.favored, s.seed);
    Rng rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int count : net.agent_counts()) out.populations.push_back(generate_agents(count, s.agents, rng));
    return out;
}

World build_world(const Scenario& scenario) {
    const Scenario s = materialize(scenario);
    World w;
    w.network = load_network(s);
    const std::vector<int> aggs = w.network.aggregator_nodes();
    if (s.populations.size() != aggs.size())
        throw UsageError("scenario has " + std::to_string(s.populations.size()) + " populations but the network has " +
                         std::to_string(aggs.size()) + " aggregators");
    for (size_t k = 0; k < aggs.size(); ++k) {
        w.network.node(aggs[k]).agent_count = static_cast<int>(s.populations[k].size());
        w.aggregators.emplace_back(static_cast<int>(k), s.populations[k]);
    }
    if (s.constraints == "build") {
        w.grid = build_constraints(w.network, s.P0, s.c0);
    } else {
        w.grid = load_constraints(s.constraints);
        if (w.grid.num_aggregators() != static_cast<Index>(aggs.size()))
            throw UsageError("constraint file has " + std::to_string(w.grid.num_aggregators()) +
                             " aggregator columns but the network has " + std::to_string(aggs.size()));
        w.grid.P0 = s.P0;
        w.grid.c0 = s.c0;
    }
    return w;
}

}  // namespace alma
