#include "alma/dso.hpp"
#include "alma/errors.hpp"
#include "alma/report.hpp"
#include "alma/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace alma;

namespace {

struct Common {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iter;
    std::optional<double> tol_feas;
    std::optional<double> tol_stat;
    std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--scenario", c.scenario_path, "Scenario JSON file (default: bundled 37-node scenario)");
    cmd->add_option("--seed", c.seed, "Override the scenario seed");
    cmd->add_option("--max-iter", c.max_iter, "Maximum DSO iterations");
    cmd->add_option("--tol-feas", c.tol_feas, "Feasibility tolerance");
    cmd->add_option("--tol-stat", c.tol_stat, "Relative stationarity tolerance");
    cmd->add_option("--out", c.out, "Output directory");
}

Scenario resolve(const Common& c) {
    Scenario s = c.scenario_path.empty() ? default_scenario() : load_scenario(c.scenario_path);
    if (c.seed) {
        s.seed = *c.seed;
        if (!c.scenario_path.empty() && !s.populations.empty())
            std::cerr << "note: --seed does not redraw the explicit populations in " << c.scenario_path << "\n";
    }
    if (c.max_iter) s.solver.max_iter = *c.max_iter;
    if (c.tol_feas) s.solver.tol_feas = *c.tol_feas;
    if (c.tol_stat) s.solver.tol_stat = *c.tol_stat;
    if (s.solver.max_iter < 1) throw UsageError("--max-iter must be at least 1");
    if (s.solver.tol_feas < 0 || s.solver.tol_stat < 0) throw UsageError("tolerances must be nonnegative");
    return s;
}

fs::path out_dir(const Common& c) {
    fs::path p(c.out);
    fs::create_directories(p);
    return p;
}

void summarize(const char* label, const BilevelResult& r) {
    std::cerr << label << ": " << r.stop_reason << " after " << r.iterations << " iterations, welfare "
              << r.welfare << ", fairness " << r.fairness << ", cosine " << r.cosine << ", feasibility "
              << r.feasibility << ", FJ stationarity " << r.fritz_john.stationarity << "\n";
}

int cmd_run(const Common& c, const std::string& mode_name, std::optional<double> warm) {
    const Scenario s = resolve(c);
    const Mode mode = mode_from_string(mode_name);
    if (warm && !(*warm > 0.0)) throw UsageError("--warm-start factor must be positive");
    const World w = build_world(s);
    const fs::path dir = out_dir(c);
    try {
        BilevelResult r = run_bilevel(w, mode, s.solver);
        write_csv(trace_table(r.trace), (dir / "trace.csv").string());
        write_csv(allocation_table(w.network, r.state.p, r.c, w.agent_counts()),
                  (dir / "final_allocation.csv").string());
        summarize(mode_name.c_str(), r);
        if (!warm) return r.converged ? 0 : 1;
        World moved = w;
        moved.grid.P0 *= *warm;
        BilevelResult again = warm_restart(moved, r, mode, s.solver);
        write_csv(trace_table(again.trace), (dir / "warm_trace.csv").string());
        write_csv(allocation_table(moved.network, again.state.p, again.c, moved.agent_counts()),
                  (dir / "warm_allocation.csv").string());
        summarize("warm restart", again);
        return r.converged && again.converged ? 0 : 1;
    } catch (const BilevelDivergedError& e) {
        write_csv(trace_table(e.partial().trace), (dir / "trace.csv").string());
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int cmd_compare(const Common& c) {
    const Scenario s = resolve(c);
    const World w = build_world(s);
    const fs::path dir = out_dir(c);
    BilevelResult base = run_bilevel(w, Mode::EfficientOnly, s.solver);
    BilevelResult fair = run_bilevel(w, Mode::Tradeoff, s.solver);
    write_csv(compare_table(w.network, w.agent_counts(), base, fair), (dir / "compare.csv").string());
    summarize("efficient_only", base);
    summarize("tradeoff", fair);
    return base.converged && fair.converged ? 0 : 1;
}

int cmd_sweep(const Common& c, int runs) {
    if (runs < 2) throw UsageError("--runs must be at least 2 for a sweep");
    const Scenario s = resolve(c);
    const World w = build_world(s);
    const fs::path dir = out_dir(c);
    std::vector<SweepPoint> pts = pareto_sweep(w, s.solver, runs, s.seed);
    write_csv(pareto_table(pts), (dir / "pareto.csv").string());
    bool ok = true;
    for (const SweepPoint& p : pts) {
        if (!p.error.empty()) std::cerr << "run " << p.run << " failed: " << p.error << "\n";
        ok = ok && p.error.empty() && p.converged;
    }
    std::cerr << "sweep: " << pts.size() << " runs, " << dominated_points(pts, 1e-3).size()
              << " dominated points\n";
    return ok ? 0 : 1;
}

int cmd_gen(const Common& c, const std::string& path) {
    Scenario s = c.scenario_path.empty() ? default_scenario() : load_scenario(c.scenario_path);
    if (c.seed) {
        s.seed = *c.seed;
        s.populations.clear();
    }
    save_scenario(materialize(s), path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained multi-gradient ascent for fair transactive energy allocation"};
    app.require_subcommand(1);
    Common common;
    std::string mode = "tradeoff";
    int runs = 10;
    std::optional<double> warm;
    std::string gen_out = "scenario.json";

    auto* run = app.add_subcommand("run", "Run one bilevel optimization; writes trace.csv and final_allocation.csv");
    add_common(run, common);
    run->add_option("--mode", mode, "tradeoff or efficient_only")->check(CLI::IsMember({"tradeoff", "efficient_only"}));
    run->add_option("--warm-start", warm,
                    "After converging, scale P0 by this factor and restart from the solution; "
                    "writes warm_trace.csv and warm_allocation.csv");

    auto* compare = app.add_subcommand("compare", "Run both modes; writes compare.csv");
    add_common(compare, common);

    auto* sweep = app.add_subcommand("sweep", "Randomly initialized tradeoff runs; writes pareto.csv");
    add_common(sweep, common);
    sweep->add_option("--runs", runs, "Number of runs (at least 2)");

    auto* gen = app.add_subcommand("gen", "Write a scenario file with explicit random populations");
    gen->add_option("--scenario", common.scenario_path, "Base scenario (default: bundled)");
    gen->add_option("--seed", common.seed, "Population seed");
    gen->add_option("--out", gen_out, "Scenario file to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*run) return cmd_run(common, mode, warm);
        if (*compare) return cmd_compare(common);
        if (*sweep) return cmd_sweep(common, runs);
        if (*gen) return cmd_gen(common, gen_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
