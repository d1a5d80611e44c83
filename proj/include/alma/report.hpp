#pragma once

#include "alma/dso.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace alma {

/// Comma-separated table with a header row; every value is written with
/// 17 significant digits.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;
    double number(size_t row, const std::string& name) const;
};

void write_csv(const CsvTable& t, std::ostream& out);
void write_csv(const CsvTable& t, const std::string& path);
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

std::string format_number(double v);

/// iter, welfare, fairness, cosine, min_norm, nu, max_ineq_gap, eq_gap,
/// plus inner_product and step.
CsvTable trace_table(const std::vector<IterationRecord>& trace);

/// aggregator, p_k, c_k, G_k, p_k_per_agent.
CsvTable allocation_table(const NetworkModel& net, const Vec& p, const Vec& c, const std::vector<int>& counts);

/// aggregator, G_k, p_k, c_k, p_k*, c_k* (asterisk columns from the
/// tradeoff run).
CsvTable compare_table(const NetworkModel& net, const std::vector<int>& counts, const BilevelResult& baseline,
                       const BilevelResult& tradeoff);

/// run, welfare, fairness, converged, iterations.
CsvTable pareto_table(const std::vector<SweepPoint>& points);

}  // namespace alma
