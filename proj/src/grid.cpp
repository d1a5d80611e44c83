#include "alma/grid.hpp"

#include "alma/errors.hpp"
#include "alma/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace alma {

namespace {

// Parent line of every non-substation node and the BFS order from the root.
struct TreeIndex {
    std::map<int, int> parent_line;  // node id -> line index
    std::map<int, int> parent_node;
    std::vector<int> order;
};

TreeIndex index_tree(const NetworkModel& net) {
    std::map<int, std::vector<std::pair<int, int>>> adj;  // node -> (neighbor, line)
    for (size_t i = 0; i < net.lines.size(); ++i) {
        const Line& l = net.lines[i];
        adj[l.from].push_back({l.to, static_cast<int>(i)});
        adj[l.to].push_back({l.from, static_cast<int>(i)});
    }
    TreeIndex t;
    std::set<int> seen{net.substation};
    std::queue<int> q;
    q.push(net.substation);
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        t.order.push_back(u);
        for (auto [v, li] : adj[u]) {
            if (seen.count(v)) {
                if (t.parent_line.count(u) == 0 || t.parent_line.at(u) != li)
                    throw ModelError("network is not radial: cycle through node " + std::to_string(v));
                continue;
            }
            seen.insert(v);
            t.parent_line[v] = li;
            t.parent_node[v] = u;
            q.push(v);
        }
    }
    return t;
}

std::vector<int> path_lines(const TreeIndex& t, int node) {
    std::vector<int> out;
    auto it = t.parent_line.find(node);
    while (it != t.parent_line.end()) {
        out.push_back(it->second);
        it = t.parent_line.find(t.parent_node.at(it->first));
    }
    return out;
}

}  // namespace

void NetworkModel::validate() const {
    if (nodes.empty()) throw ModelError("network has no nodes");
    std::set<int> ids;
    for (const Node& n : nodes) {
        if (!ids.insert(n.id).second) throw ModelError("duplicate node id " + std::to_string(n.id));
        if (n.is_aggregator && n.agent_count < 0)
            throw ModelError("negative agent count at node " + std::to_string(n.id));
    }
    if (!ids.count(substation)) throw ModelError("substation node " + std::to_string(substation) + " is not in the network");
    for (const Line& l : lines) {
        if (!ids.count(l.from) || !ids.count(l.to))
            throw ModelError("line " + std::to_string(l.from) + "-" + std::to_string(l.to) + " references an unknown node");
        if (l.from == l.to) throw ModelError("self-loop at node " + std::to_string(l.from));
        if (!(l.r >= 0.0) || !(l.x >= 0.0) || !(l.capacity > 0.0) || !std::isfinite(l.r) ||
            !std::isfinite(l.x) || !std::isfinite(l.capacity))
            throw ModelError("line " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                             " needs r >= 0, x >= 0 and capacity > 0");
    }
    if (lines.size() + 1 != nodes.size())
        throw ModelError("network is not radial: " + std::to_string(nodes.size()) + " nodes need " +
                         std::to_string(nodes.size() - 1) + " lines, found " + std::to_string(lines.size()));
    TreeIndex t = index_tree(*this);
    if (t.order.size() != nodes.size()) throw ModelError("network is not connected to the substation");
    if (!(v_min > 0.0 && v_min < v_max && v_ref > 0.0)) throw ModelError("invalid voltage limits");
    if (!(base_power > 0.0)) throw ModelError("base power must be positive");
    if (!(loss_slope >= 0.0)) throw ModelError("loss slope must be nonnegative");
    if (num_aggregators() == 0) throw ModelError("network has no aggregators");
}

std::vector<int> NetworkModel::aggregator_nodes() const {
    std::vector<int> out;
    for (const Node& n : nodes)
        if (n.is_aggregator) out.push_back(n.id);
    return out;
}

std::vector<int> NetworkModel::agent_counts() const {
    std::vector<int> out;
    for (const Node& n : nodes)
        if (n.is_aggregator) out.push_back(n.agent_count);
    return out;
}

int NetworkModel::num_aggregators() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_aggregator; }));
}

const Node& NetworkModel::node(int id) const {
    for (const Node& n : nodes)
        if (n.id == id) return n;
    throw UsageError("no node with id " + std::to_string(id));
}

Node& NetworkModel::node(int id) {
    return const_cast<Node&>(static_cast<const NetworkModel&>(*this).node(id));
}

NetworkModel parse_topology(std::istream& in) {
    NetworkModel net;
    bool have_substation = false;
    std::set<int> declared;
    std::vector<int> implicit;
    std::string raw;
    int lineno = 0;
    auto note_node = [&](int id) {
        if (!declared.count(id) && std::find(implicit.begin(), implicit.end(), id) == implicit.end())
            implicit.push_back(id);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto fail = [&](const std::string& what) { throw ParseError(kw + ": " + what, lineno); };
        if (kw == "substation") {
            if (!(ls >> net.substation)) fail("expected a node id");
            have_substation = true;
            note_node(net.substation);
        } else if (kw == "voltage") {
            if (!(ls >> net.v_min >> net.v_max >> net.v_ref)) fail("expected v_min v_max v_ref");
        } else if (kw == "base_power") {
            if (!(ls >> net.base_power)) fail("expected a number");
        } else if (kw == "loss_slope") {
            if (!(ls >> net.loss_slope)) fail("expected a number");
        } else if (kw == "node") {
            Node n;
            n.is_aggregator = true;
            if (!(ls >> n.id >> n.label >> n.agent_count)) fail("expected id label agent_count");
            if (declared.count(n.id)) fail("duplicate node " + std::to_string(n.id));
            declared.insert(n.id);
            implicit.erase(std::remove(implicit.begin(), implicit.end(), n.id), implicit.end());
            net.nodes.push_back(n);
        } else if (kw == "line") {
            Line l;
            if (!(ls >> l.from >> l.to >> l.r >> l.x >> l.capacity)) fail("expected from to r x capacity");
            note_node(l.from);
            note_node(l.to);
            net.lines.push_back(l);
        } else {
            throw ParseError("unknown record '" + kw + "'", lineno);
        }
        std::string extra;
        if (ls >> extra) fail("unexpected trailing field '" + extra + "'");
    }
    if (!have_substation) throw ParseError("missing substation record");
    for (int id : implicit) {
        Node n;
        n.id = id;
        n.label = std::to_string(id);
        net.nodes.push_back(n);
    }
    net.validate();
    return net;
}

NetworkModel load_topology(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open topology file " + path);
    return parse_topology(f);
}

void write_topology(const NetworkModel& net, std::ostream& out) {
    out << std::setprecision(17);
    out << "substation " << net.substation << "\n";
    out << "voltage " << net.v_min << " " << net.v_max << " " << net.v_ref << "\n";
    out << "base_power " << net.base_power << "\n";
    out << "loss_slope " << net.loss_slope << "\n";
    for (const Node& n : net.nodes)
        if (n.is_aggregator) out << "node " << n.id << " " << n.label << " " << n.agent_count << "\n";
    for (const Line& l : net.lines)
        out << "line " << l.from << " " << l.to << " " << l.r << " " << l.x << " " << l.capacity << "\n";
}

void save_topology(const NetworkModel& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write topology file " + path);
    write_topology(net, f);
}

void assign_agent_counts(NetworkModel& net, int count_min, int count_max,
                         const std::vector<std::string>& favored, std::uint64_t seed) {
    detail::require(count_min >= 1 && count_min <= count_max, "agent count range must satisfy 1 <= min <= max");
    Rng rng(seed);
    const int upper_min = count_min + (count_max - count_min + 1) / 2;
    for (Node& n : net.nodes) {
        if (!n.is_aggregator) continue;
        const bool up = std::find(favored.begin(), favored.end(), n.label) != favored.end();
        n.agent_count = up ? rng.uniform_int(upper_min, count_max) : rng.uniform_int(count_min, count_max);
    }
}

NetworkModel ieee37_topology(std::uint64_t seed) {
    std::istringstream in(ieee37_topology_text());
    NetworkModel net = parse_topology(in);
    assign_agent_counts(net, 9, 25, {"A4", "A6", "A10", "A12"}, seed);
    return net;
}

void GridConstraints::validate() const {
    const Index A = c_P0.size();
    detail::require(A > 0, "grid constraints need at least one aggregator");
    detail::require(C_V.cols() == A && C_S.cols() == A, "constraint blocks must have one column per aggregator");
    detail::require(c_V_lo.size() == C_V.rows() && c_V_hi.size() == C_V.rows(),
                    "voltage offsets must have one entry per voltage row");
    detail::require(c_S0.size() == C_S.rows(), "capacity offsets must have one entry per capacity row");
    detail::require(all_finite(C_V) && all_finite(C_S) && all_finite(c_V_lo) && all_finite(c_V_hi) &&
                        all_finite(c_S0) && all_finite(c_P0) && std::isfinite(c_P00) &&
                        std::isfinite(P0) && std::isfinite(c0),
                    "constraint coefficients must be finite");
}

LinearFeasibleRegion GridConstraints::region(const Vec& c) const {
    validate();
    const Index A = num_aggregators();
    detail::require(c.size() == A, "unit cost vector must have one entry per aggregator");
    const Index nv = C_V.rows(), ns = C_S.rows();
    Mat Am(A, 2 * nv + ns + 1);
    Vec a(2 * nv + ns + 1);
    Am.leftCols(nv) = -C_V.transpose();
    Am.middleCols(nv, nv) = C_V.transpose();
    Am.middleCols(2 * nv, ns) = C_S.transpose();
    Am.col(2 * nv + ns) = -c;
    a << c_V_lo, c_V_hi, c_S0, c0 * P0;
    Mat B = c_P0;
    Vec b(1);
    b << c_P00 - P0;
    return LinearFeasibleRegion(std::move(Am), std::move(a), std::move(B), std::move(b));
}

bool GridConstraints::operator==(const GridConstraints& o) const {
    return C_V == o.C_V && c_V_lo == o.c_V_lo && c_V_hi == o.c_V_hi && C_S == o.C_S && c_S0 == o.c_S0 &&
           c_P0 == o.c_P0 && c_P00 == o.c_P00 && P0 == o.P0 && c0 == o.c0;
}

GridConstraints build_constraints(const NetworkModel& net, double P0, double c0) {
    net.validate();
    const TreeIndex t = index_tree(net);
    const std::vector<int> aggs = net.aggregator_nodes();
    const Index A = static_cast<Index>(aggs.size());
    const Index N = static_cast<Index>(net.nodes.size());
    const Index L = static_cast<Index>(net.lines.size());

    std::vector<std::vector<int>> agg_paths;
    for (int id : aggs) agg_paths.push_back(path_lines(t, id));

    GridConstraints gc;
    gc.C_V = Mat::Zero(N, A);
    for (Index n = 0; n < N; ++n) {
        const std::vector<int> pn = path_lines(t, net.nodes[static_cast<size_t>(n)].id);
        const std::set<int> on_path(pn.begin(), pn.end());
        for (Index k = 0; k < A; ++k) {
            double r = 0.0;
            for (int li : agg_paths[static_cast<size_t>(k)])
                if (on_path.count(li)) r += net.lines[static_cast<size_t>(li)].r;
            gc.C_V(n, k) = 2.0 * r / net.base_power;
        }
    }
    gc.c_V_lo = Vec::Constant(N, net.v_ref * net.v_ref - net.v_max * net.v_max);
    gc.c_V_hi = Vec::Constant(N, net.v_min * net.v_min - net.v_ref * net.v_ref);

    gc.C_S = Mat::Zero(L, A);
    gc.c_S0.resize(L);
    for (Index l = 0; l < L; ++l) gc.c_S0[l] = -net.lines[static_cast<size_t>(l)].capacity;
    gc.c_P0.resize(A);
    for (Index k = 0; k < A; ++k) {
        double r = 0.0;
        for (int li : agg_paths[static_cast<size_t>(k)]) {
            gc.C_S(li, k) = 1.0 / net.base_power;
            r += net.lines[static_cast<size_t>(li)].r;
        }
        gc.c_P0[k] = 1.0 + net.loss_slope * r;
    }
    gc.c_P00 = 0.0;
    gc.P0 = P0;
    gc.c0 = c0;
    gc.validate();
    return gc;
}

namespace {

struct Block {
    Index rows = 0, cols = 0;
    std::vector<double> values;
    int line = 0;
};

Mat block_matrix(const std::map<std::string, Block>& blocks, const std::string& name) {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw ParseError("missing block " + name);
    const Block& b = it->second;
    Mat m(b.rows, b.cols);
    for (Index i = 0; i < b.rows; ++i)
        for (Index j = 0; j < b.cols; ++j) m(i, j) = b.values[static_cast<size_t>(i * b.cols + j)];
    return m;
}

Vec block_vector(const std::map<std::string, Block>& blocks, const std::string& name, Index expected) {
    Mat m = block_matrix(blocks, name);
    const Block& b = blocks.at(name);
    if (m.cols() != 1 || (expected >= 0 && m.rows() != expected))
        throw ParseError("block " + name + " has dimensions " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " + std::to_string(expected) + "x1",
                         b.line);
    return m.col(0);
}

double block_scalar(const std::map<std::string, Block>& blocks, const std::string& name) {
    return block_vector(blocks, name, 1)[0];
}

}  // namespace

GridConstraints parse_constraints(std::istream& in) {
    static const std::set<std::string> known{"C_V", "c_V_lo", "c_V_hi", "C_S", "c_S0",
                                             "c_P0", "c_P00", "P0", "c0"};
    std::map<std::string, Block> blocks;
    std::string raw;
    int lineno = 0;
    std::string current;
    auto finish_current = [&]() {
        if (current.empty()) return;
        Block& b = blocks[current];
        if (b.values.size() != static_cast<size_t>(b.rows * b.cols))
            throw ParseError("block " + current + " declares " + std::to_string(b.rows) + "x" +
                                 std::to_string(b.cols) + " but has " + std::to_string(b.values.size()) +
                                 " values",
                             b.line);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "block") {
            finish_current();
            std::string name;
            long long r = -1, c = -1;
            if (!(ls >> name >> r >> c) || r < 0 || c < 0)
                throw ParseError("block header needs: block NAME ROWS COLS", lineno);
            if (!known.count(name)) throw ParseError("unknown block " + name, lineno);
            if (blocks.count(name)) throw ParseError("duplicate block " + name, lineno);
            Block b;
            b.rows = r;
            b.cols = c;
            b.line = lineno;
            blocks[name] = b;
            current = name;
            std::string extra;
            if (ls >> extra) throw ParseError("unexpected field '" + extra + "' after block header", lineno);
            continue;
        }
        if (current.empty()) throw ParseError("value before any block header", lineno);
        Block& b = blocks[current];
        do {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw ParseError("block " + current + ": bad number '" + tok + "'", lineno);
            b.values.push_back(v);
        } while (ls >> tok);
    }
    finish_current();

    GridConstraints gc;
    gc.C_V = block_matrix(blocks, "C_V");
    gc.C_S = block_matrix(blocks, "C_S");
    const Index A = gc.C_V.cols();
    if (gc.C_S.cols() != A)
        throw ParseError("block C_S has " + std::to_string(gc.C_S.cols()) + " columns, expected " +
                             std::to_string(A),
                         blocks.at("C_S").line);
    gc.c_V_lo = block_vector(blocks, "c_V_lo", gc.C_V.rows());
    gc.c_V_hi = block_vector(blocks, "c_V_hi", gc.C_V.rows());
    gc.c_S0 = block_vector(blocks, "c_S0", gc.C_S.rows());
    gc.c_P0 = block_vector(blocks, "c_P0", A);
    gc.c_P00 = block_scalar(blocks, "c_P00");
    gc.P0 = block_scalar(blocks, "P0");
    gc.c0 = block_scalar(blocks, "c0");
    try {
        gc.validate();
    } catch (const UsageError& e) {
        throw ParseError(e.what());
    }
    return gc;
}

GridConstraints load_constraints(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open constraint file " + path);
    return parse_constraints(f);
}

void write_constraints(const GridConstraints& gc, std::ostream& out) {
    auto put = [&](const std::string& name, const Mat& m) {
        out << "block " << name << " " << m.rows() << " " << m.cols() << "\n";
        char buf[40];
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
                out << (j ? " " : "") << buf;
            }
            out << "\n";
        }
    };
    auto scalar = [](double v) { return Mat::Constant(1, 1, v); };
    put("C_V", gc.C_V);
    put("c_V_lo", gc.c_V_lo);
    put("c_V_hi", gc.c_V_hi);
    put("C_S", gc.C_S);
    put("c_S0", gc.c_S0);
    put("c_P0", gc.c_P0);
    put("c_P00", scalar(gc.c_P00));
    put("P0", scalar(gc.P0));
    put("c0", scalar(gc.c0));
}

void save_constraints(const GridConstraints& gc, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write constraint file " + path);
    write_constraints(gc, f);
}

}  // namespace alma
