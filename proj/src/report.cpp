#include "alma/report.hpp"

#include "alma/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace alma {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw UsageError("no CSV column named " + name);
}

double CsvTable::number(size_t row, const std::string& name) const {
    const std::string& s = rows.at(row).at(static_cast<size_t>(column(name)));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("CSV cell '" + s + "' in column " + name + " is not a number");
    return v;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const CsvTable& t, std::ostream& out) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

void write_csv(const CsvTable& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path);
    write_csv(t, f);
    if (!f) throw UsageError("failed writing " + path);
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string raw;
    bool first = true;
    while (std::getline(in, raw)) {
        if (raw.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(raw);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw ParseError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open " + path);
    return read_csv(f);
}

CsvTable trace_table(const std::vector<IterationRecord>& trace) {
    CsvTable t;
    t.header = {"iter", "welfare", "fairness", "cosine", "min_norm", "nu",
                "max_ineq_gap", "eq_gap", "inner_product", "step"};
    for (const IterationRecord& r : trace)
        t.rows.push_back({std::to_string(r.iter), format_number(r.welfare), format_number(r.fairness),
                          format_number(r.cosine), format_number(r.min_norm), format_number(r.nu),
                          format_number(r.max_ineq_gap), format_number(r.eq_gap), format_number(r.inner_product),
                          format_number(r.step)});
    return t;
}

CsvTable allocation_table(const NetworkModel& net, const Vec& p, const Vec& c, const std::vector<int>& counts) {
    CsvTable t;
    t.header = {"aggregator", "p_k", "c_k", "G_k", "p_k_per_agent"};
    const std::vector<int> aggs = net.aggregator_nodes();
    for (size_t k = 0; k < aggs.size(); ++k) {
        const Index i = static_cast<Index>(k);
        t.rows.push_back({net.node(aggs[k]).label, format_number(p[i]), format_number(c[i]),
                          std::to_string(counts[k]), format_number(p[i] / counts[k])});
    }
    return t;
}

CsvTable compare_table(const NetworkModel& net, const std::vector<int>& counts, const BilevelResult& baseline,
                       const BilevelResult& tradeoff) {
    CsvTable t;
    t.header = {"aggregator", "G_k", "p_k", "c_k", "p_k*", "c_k*"};
    const std::vector<int> aggs = net.aggregator_nodes();
    for (size_t k = 0; k < aggs.size(); ++k) {
        const Index i = static_cast<Index>(k);
        t.rows.push_back({net.node(aggs[k]).label, std::to_string(counts[k]), format_number(baseline.state.p[i]),
                          format_number(baseline.c[i]), format_number(tradeoff.state.p[i]),
                          format_number(tradeoff.c[i])});
    }
    return t;
}

CsvTable pareto_table(const std::vector<SweepPoint>& points) {
    CsvTable t;
    t.header = {"run", "welfare", "fairness", "converged", "iterations"};
    for (const SweepPoint& p : points) {
        if (!p.error.empty()) continue;
        t.rows.push_back({std::to_string(p.run), format_number(p.welfare), format_number(p.fairness),
                          p.converged ? "1" : "0", std::to_string(p.iterations)});
    }
    return t;
}

}  // namespace alma
