#include "alma/dso.hpp"
#include "alma/errors.hpp"
#include "alma/fairness.hpp"
#include "alma/grid.hpp"
#include "alma/market.hpp"
#include "alma/mgda.hpp"
#include "alma/report.hpp"
#include "alma/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace alma;

namespace {

Agent agent_from_dict(const py::dict& d) {
    Agent a;
    a.id = d.contains("id") ? d["id"].cast<int>() : 0;
    a.family = utility_family_from_string(d.contains("family") ? d["family"].cast<std::string>() : "log");
    a.a = d["a"].cast<double>();
    a.b = d["b"].cast<double>();
    a.g = d.contains("g") ? d["g"].cast<double>() : 0.0;
    return a;
}

py::dict result_dict(const BilevelResult& r) {
    py::dict out;
    out["p"] = r.state.p;
    out["c"] = r.c;
    out["weights"] = r.weights;
    out["converged"] = r.converged;
    out["stop_reason"] = r.stop_reason;
    out["iterations"] = r.iterations;
    out["welfare"] = r.welfare;
    out["fairness"] = r.fairness;
    out["cosine"] = r.cosine;
    out["feasibility"] = r.feasibility;
    out["fritz_john_stationarity"] = r.fritz_john.stationarity;
    py::dict trace;
    const CsvTable t = trace_table(r.trace);
    for (const std::string& name : t.header) {
        std::vector<double> col;
        for (size_t i = 0; i < t.rows.size(); ++i) col.push_back(t.number(i, name));
        trace[py::str(name)] = col;
    }
    out["trace"] = trace;
    return out;
}

Scenario scenario_or_default(const std::optional<std::string>& json) {
    return json ? scenario_from_json(*json) : default_scenario();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constrained vector optimization and transactive-energy market simulation";

    py::register_exception<Error>(m, "Error");
    py::register_exception<UsageError>(m, "UsageError", m.attr("Error"));
    py::register_exception<DomainError>(m, "DomainError", m.attr("Error"));
    py::register_exception<ModelError>(m, "ModelError", m.attr("Error"));
    py::register_exception<ParseError>(m, "ParseError", m.attr("Error"));
    py::register_exception<DivergedError>(m, "DivergedError", m.attr("Error"));

    m.def("jains_index", &jains_index, py::arg("x"));
    m.def("jains_gradient", &jains_gradient, py::arg("x"));
    m.def("jains_hessian_quadform", &jains_hessian_quadform, py::arg("x"), py::arg("y"));
    m.def("majorizes", &majorizes, py::arg("x"), py::arg("y"), py::arg("tol") = 1e-12);

    m.def(
        "min_norm_weights",
        [](const Mat& jacobian) {
            MinNormResult r = min_norm_weights(jacobian);
            return py::make_tuple(r.weights, r.direction, r.norm);
        },
        py::arg("jacobian"), "Returns (weights, direction, norm).");

    m.def(
        "utility",
        [](const py::dict& agent, double x) { return utility(agent_from_dict(agent), x); }, py::arg("agent"),
        py::arg("x"));
    m.def(
        "marginal_utility",
        [](const py::dict& agent, double x) { return marginal_utility(agent_from_dict(agent), x); },
        py::arg("agent"), py::arg("x"));

    m.def(
        "run_auction",
        [](const std::vector<py::dict>& agents, double p, double tol, int max_iter) {
            std::vector<Agent> pop;
            for (const py::dict& d : agents) pop.push_back(agent_from_dict(d));
            AggregatorState s(0, pop);
            AuctionOptions opt;
            opt.tol = tol;
            opt.max_iter = max_iter;
            AuctionResult r = run_auction(s, p, opt);
            EquilibriumReport eq = verify_equilibrium(s, 1e-6);
            py::dict out;
            out["unit_cost"] = r.unit_cost;
            out["allocations"] = r.allocations;
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            out["max_residual"] = eq.max_residual;
            out["max_unilateral_gain"] = max_unilateral_gain(s);
            return out;
        },
        py::arg("agents"), py::arg("p"), py::arg("tol") = 1e-8, py::arg("max_iter") = 500);

    m.def(
        "build_constraints",
        [](const std::string& topology, double P0, double c0) {
            std::istringstream in(topology);
            GridConstraints gc = build_constraints(parse_topology(in), P0, c0);
            py::dict out;
            out["C_V"] = gc.C_V;
            out["c_V_lo"] = gc.c_V_lo;
            out["c_V_hi"] = gc.c_V_hi;
            out["C_S"] = gc.C_S;
            out["c_S0"] = gc.c_S0;
            out["c_P0"] = gc.c_P0;
            out["c_P00"] = gc.c_P00;
            return out;
        },
        py::arg("topology"), py::arg("P0"), py::arg("c0"), "Constraint blocks for a topology given as text.");
    m.def("ieee37_topology_text", [] { return ieee37_topology_text(); });

    m.def("default_scenario", [] { return scenario_to_json(default_scenario()); },
          "The bundled scenario as JSON text.");
    m.def("materialize", [](const std::string& json) { return scenario_to_json(materialize(scenario_from_json(json))); },
          py::arg("scenario"));

    m.def(
        "run",
        [](const std::optional<std::string>& scenario, const std::string& mode) {
            const Scenario s = scenario_or_default(scenario);
            const World w = build_world(s);
            BilevelResult r;
            {
                py::gil_scoped_release release;
                r = run_bilevel(w, mode_from_string(mode), s.solver);
            }
            py::dict out = result_dict(r);
            out["agent_counts"] = w.agent_counts();
            return out;
        },
        py::arg("scenario") = py::none(), py::arg("mode") = "tradeoff",
        "Runs the bilevel optimization on a scenario (JSON text, default bundled).");

    m.def(
        "pareto_sweep",
        [](const std::optional<std::string>& scenario, int runs) {
            const Scenario s = scenario_or_default(scenario);
            const World w = build_world(s);
            std::vector<SweepPoint> pts;
            {
                py::gil_scoped_release release;
                pts = pareto_sweep(w, s.solver, runs, s.seed);
            }
            py::list out;
            for (const SweepPoint& p : pts) {
                py::dict d;
                d["run"] = p.run;
                d["welfare"] = p.welfare;
                d["fairness"] = p.fairness;
                d["converged"] = p.converged;
                d["iterations"] = p.iterations;
                d["error"] = p.error;
                out.append(d);
            }
            return out;
        },
        py::arg("scenario") = py::none(), py::arg("runs") = 10);
}
