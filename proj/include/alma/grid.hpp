#pragma once

#include "alma/linalg.hpp"
#include "alma/vecopt.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace alma {

struct Node {
    int id = 0;
    bool is_aggregator = false;
    int agent_count = 0;
    std::string label;
};

struct Line {
    int from = 0;
    int to = 0;
    double r = 0.0;         // p.u.
    double x = 0.0;         // p.u.
    double capacity = 0.0;  // p.u.
};

/// Radial feeder rooted at the substation. Aggregators are the nodes with
/// is_aggregator set, in declaration order.
struct NetworkModel {
    std::vector<Node> nodes;
    std::vector<Line> lines;
    int substation = 0;
    double v_min = 0.95;
    double v_max = 1.05;
    double v_ref = 1.0;
    double base_power = 1.0;  // allocation units per p.u.
    double loss_slope = 0.0;  // energy-balance loss per unit path resistance

    /// Throws ModelError unless the lines form a tree over the nodes rooted
    /// at the substation with valid electrical parameters.
    void validate() const;

    std::vector<int> aggregator_nodes() const;
    std::vector<int> agent_counts() const;
    int num_aggregators() const;
    const Node& node(int id) const;
    Node& node(int id);
};

/// Topology text format; see docs/formats.md.
NetworkModel parse_topology(std::istream& in);
NetworkModel load_topology(const std::string& path);
void write_topology(const NetworkModel& net, std::ostream& out);
void save_topology(const NetworkModel& net, const std::string& path);

/// Bundled 37-node feeder with 17 aggregators (synthetic line data). Agent
/// counts are drawn from [9, 25] with aggregators A4, A6, A10, A12 drawn
/// from the upper half of the range.
NetworkModel ieee37_topology(std::uint64_t seed = 1);

/// Draws every aggregator's agent count uniformly from [count_min,
/// count_max]; aggregators whose label is in `favored` draw from the upper
/// half of the range.
void assign_agent_counts(NetworkModel& net, int count_min, int count_max,
                         const std::vector<std::string>& favored, std::uint64_t seed);

/// Text of the bundled topology file with zero agent counts.
const std::string& ieee37_topology_text();

/// Linear grid constraints over aggregator allocations p:
///   -C_V p + c_V_lo <= 0   (v <= v_max)
///    C_V p + c_V_hi <= 0   (v >= v_min)
///    C_S p + c_S0  <= 0    (line capacity)
///   -c^T p + c0 P0 <= 0    (DSO budget)
///    c_P0^T p + c_P00 = P0 (energy balance)
struct GridConstraints {
    Mat C_V;      // nodes x A
    Vec c_V_lo;
    Vec c_V_hi;
    Mat C_S;      // lines x A
    Vec c_S0;
    Vec c_P0;     // A
    double c_P00 = 0.0;
    double P0 = 0.0;
    double c0 = 0.0;

    Index num_aggregators() const { return c_P0.size(); }
    Index num_voltage_rows() const { return C_V.rows(); }
    Index num_capacity_rows() const { return C_S.rows(); }

    void validate() const;

    /// Assembled region with the budget row built from unit costs c.
    /// Inequality columns: [v<=vmax rows, v>=vmin rows, capacity rows, budget].
    LinearFeasibleRegion region(const Vec& c) const;

    bool operator==(const GridConstraints& o) const;
};

/// LinDistFlow coefficients for the network's aggregators.
GridConstraints build_constraints(const NetworkModel& net, double P0, double c0);

/// Constraint text format; see docs/formats.md.
GridConstraints parse_constraints(std::istream& in);
GridConstraints load_constraints(const std::string& path);
void write_constraints(const GridConstraints& gc, std::ostream& out);
void save_constraints(const GridConstraints& gc, const std::string& path);

}  // namespace alma
