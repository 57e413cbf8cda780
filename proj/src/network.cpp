#include "gridrisk/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace gridrisk {

using nlohmann::json;

Eigen::MatrixXd incidence_matrix(const PowerNetwork& net) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(net.node_count, net.line_count);
    for (int k = 0; k < net.line_count; ++k) {
        b(net.lines[k].first, k) = 1.0;
        b(net.lines[k].second, k) = -1.0;
    }
    return b;
}

namespace {

bool connected(const PowerNetwork& net) {
    // union-find; the test suite cross-checks against a plain BFS
    std::vector<int> parent(net.node_count);
    for (int i = 0; i < net.node_count; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [i, j] : net.lines) parent[find(i)] = find(j);
    for (int i = 1; i < net.node_count; ++i)
        if (find(i) != find(0)) return false;
    return true;
}

}  // namespace

void validate(const PowerNetwork& net) {
    if (net.node_count < 2) throw ValidationError("network needs at least two nodes");
    if (net.line_count < 1) throw ValidationError("network needs at least one line");
    if (net.supply_count < 1 || net.supply_count >= net.node_count)
        throw ValidationError("network needs at least one supply and one demand node");
    if (static_cast<int>(net.lines.size()) != net.line_count ||
        net.inertia.size() != net.node_count || net.damping.size() != net.node_count ||
        net.noise.size() != net.node_count || net.capacity.size() != net.line_count)
        throw ValidationError("inconsistent array sizes");
    for (int i = 0; i < net.node_count; ++i) {
        if (!(net.inertia(i) > 0.0))
            throw ValidationError("inertia must be positive at node " + std::to_string(net.node_ids[i]));
        if (!(net.damping(i) >= 0.0))
            throw ValidationError("damping must be nonnegative at node " + std::to_string(net.node_ids[i]));
        if (!(net.noise(i) >= 0.0))
            throw ValidationError("noise must be nonnegative at node " + std::to_string(net.node_ids[i]));
    }
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < net.line_count; ++k) {
        auto [i, j] = net.lines[k];
        if (i < 0 || j < 0 || i >= net.node_count || j >= net.node_count)
            throw ValidationError("line endpoint out of range");
        if (i == j) throw ValidationError("line endpoints must be distinct");
        if (!(net.capacity(k) > 0.0))
            throw ValidationError("capacity must be positive on line " + std::to_string(net.node_ids[i]) +
                                  "-" + std::to_string(net.node_ids[j]));
        auto key = std::minmax(i, j);
        if (!seen.insert(key).second)
            throw ValidationError("duplicate line " + std::to_string(net.node_ids[key.first]) + "-" +
                                  std::to_string(net.node_ids[key.second]));
    }
    if (!connected(net)) throw ValidationError("network graph is not connected");
}

void validate(const DispatchProblem& prob) {
    validate(prob.network);
    if (prob.p_max.size() != prob.network.supply_count)
        throw ValidationError("p_max length must equal the supply node count");
    if (prob.demand.size() != prob.network.demand_count())
        throw ValidationError("demand length must equal the demand node count");
    for (int i = 0; i < prob.p_max.size(); ++i)
        if (!(prob.p_max(i) >= 0.0)) throw ValidationError("supply ceilings must be nonnegative");
    for (int i = 0; i < prob.demand.size(); ++i)
        if (!(prob.demand(i) > 0.0)) throw ValidationError("demand must be strictly positive");
    if (!(prob.total_demand() > 0.0)) throw ValidationError("total demand must be positive");
    if (prob.p_max.sum() < prob.total_demand())
        throw ValidationError("total supply ceiling below total demand");
    if (!(prob.r_epsilon > 0.0)) throw ValidationError("r_epsilon must be positive");
}

Eigen::VectorXd full_supply(const DispatchProblem& prob, const Eigen::VectorXd& p_s) {
    const int n_plus = prob.network.supply_count;
    if (p_s.size() != n_plus - 1) throw std::invalid_argument("decision vector has wrong length");
    Eigen::VectorXd p(n_plus);
    p.head(n_plus - 1) = p_s;
    p(n_plus - 1) = prob.total_demand() - p_s.sum();
    return p;
}

Eigen::VectorXd full_power_vector(const DispatchProblem& prob, const Eigen::VectorXd& p_s) {
    Eigen::VectorXd p(prob.network.node_count);
    p.head(prob.network.supply_count) = full_supply(prob, p_s);
    p.tail(prob.network.demand_count()) = -prob.demand;
    return p;
}

namespace {

double require_number(const json& node, const char* field, int id) {
    if (!node.contains(field) || !node[field].is_number())
        throw ParseError("node " + std::to_string(id) + ": missing numeric field \"" + field + "\"");
    return node[field].get<double>();
}

DispatchProblem from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        throw ParseError(origin + ": missing \"nodes\" array");
    if (!doc.contains("lines") || !doc["lines"].is_array())
        throw ParseError(origin + ": missing \"lines\" array");

    struct NodeRec {
        int id;
        bool supply;
        double inertia, damping, noise, injection;
    };
    std::vector<NodeRec> supply_nodes, demand_nodes;
    for (const auto& nd : doc["nodes"]) {
        if (!nd.is_object() || !nd.contains("id") || !nd["id"].is_number_integer())
            throw ParseError(origin + ": every node needs an integer \"id\"");
        const int id = nd["id"].get<int>();
        if (!nd.contains("role") || !nd["role"].is_string())
            throw ParseError("node " + std::to_string(id) + ": missing \"role\"");
        const std::string role = nd["role"].get<std::string>();
        NodeRec rec;
        rec.id = id;
        rec.inertia = require_number(nd, "inertia", id);
        rec.damping = require_number(nd, "damping", id);
        rec.noise = require_number(nd, "noise", id);
        if (role == "supply") {
            rec.supply = true;
            rec.injection = require_number(nd, "p_max", id);
            supply_nodes.push_back(rec);
        } else if (role == "demand") {
            rec.supply = false;
            rec.injection = require_number(nd, "demand", id);
            demand_nodes.push_back(rec);
        } else {
            throw ParseError("node " + std::to_string(id) + ": role must be \"supply\" or \"demand\"");
        }
    }

    DispatchProblem prob;
    PowerNetwork& net = prob.network;
    net.supply_count = static_cast<int>(supply_nodes.size());
    net.node_count = static_cast<int>(supply_nodes.size() + demand_nodes.size());
    net.inertia.resize(net.node_count);
    net.damping.resize(net.node_count);
    net.noise.resize(net.node_count);
    prob.p_max.resize(net.supply_count);
    prob.demand.resize(net.node_count - net.supply_count);

    // supply-first re-indexing, preserving the file's relative order
    std::map<int, int> index_of;
    int idx = 0;
    for (const auto& rec : supply_nodes) {
        if (index_of.count(rec.id)) throw ParseError("duplicate node id " + std::to_string(rec.id));
        index_of[rec.id] = idx;
        net.node_ids.push_back(rec.id);
        net.inertia(idx) = rec.inertia;
        net.damping(idx) = rec.damping;
        net.noise(idx) = rec.noise;
        prob.p_max(idx) = rec.injection;
        ++idx;
    }
    for (const auto& rec : demand_nodes) {
        if (index_of.count(rec.id)) throw ParseError("duplicate node id " + std::to_string(rec.id));
        index_of[rec.id] = idx;
        net.node_ids.push_back(rec.id);
        net.inertia(idx) = rec.inertia;
        net.damping(idx) = rec.damping;
        net.noise(idx) = rec.noise;
        prob.demand(idx - net.supply_count) = rec.injection;
        ++idx;
    }

    const auto& jlines = doc["lines"];
    net.line_count = static_cast<int>(jlines.size());
    net.capacity.resize(net.line_count);
    int k = 0;
    for (const auto& ln : jlines) {
        if (!ln.is_object() || !ln.contains("from") || !ln.contains("to") ||
            !ln["from"].is_number_integer() || !ln["to"].is_number_integer())
            throw ParseError(origin + ": line " + std::to_string(k) + ": needs integer \"from\" and \"to\"");
        const int from = ln["from"].get<int>();
        const int to = ln["to"].get<int>();
        if (!index_of.count(from) || !index_of.count(to))
            throw ParseError("line " + std::to_string(from) + "-" + std::to_string(to) +
                             " references an unknown node id");
        if (!ln.contains("capacity") || !ln["capacity"].is_number())
            throw ParseError("line " + std::to_string(from) + "-" + std::to_string(to) +
                             ": missing numeric \"capacity\"");
        net.lines.emplace_back(index_of[from], index_of[to]);
        net.capacity(k) = ln["capacity"].get<double>();
        ++k;
    }

    if (doc.contains("r_epsilon")) {
        if (!doc["r_epsilon"].is_number()) throw ParseError(origin + ": \"r_epsilon\" must be a number");
        prob.r_epsilon = doc["r_epsilon"].get<double>();
    }

    validate(prob);
    return prob;
}

}  // namespace

DispatchProblem parse_network(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return from_json(doc, origin);
}

DispatchProblem load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str(), path);
}

std::string serialize_network(const DispatchProblem& prob) {
    const PowerNetwork& net = prob.network;
    json nodes = json::array();
    for (int i = 0; i < net.node_count; ++i) {
        json nd = {{"id", net.node_ids[i]},
                   {"role", i < net.supply_count ? "supply" : "demand"},
                   {"inertia", net.inertia(i)},
                   {"damping", net.damping(i)},
                   {"noise", net.noise(i)}};
        if (i < net.supply_count)
            nd["p_max"] = prob.p_max(i);
        else
            nd["demand"] = prob.demand(i - net.supply_count);
        nodes.push_back(nd);
    }
    json lines = json::array();
    for (int k = 0; k < net.line_count; ++k) {
        auto [i, j] = net.line_label(k);
        lines.push_back({{"from", i}, {"to", j}, {"capacity", net.capacity(k)}});
    }
    json doc = {{"nodes", nodes}, {"lines", lines}, {"r_epsilon", prob.r_epsilon}};
    return doc.dump(2) + "\n";
}

bool identical_structure(const DispatchProblem& a, const DispatchProblem& b) {
    const PowerNetwork &na = a.network, &nb = b.network;
    return na.node_count == nb.node_count && na.line_count == nb.line_count &&
           na.supply_count == nb.supply_count && na.lines == nb.lines && na.node_ids == nb.node_ids &&
           na.inertia == nb.inertia && na.damping == nb.damping && na.noise == nb.noise &&
           na.capacity == nb.capacity && a.p_max == b.p_max && a.demand == b.demand &&
           a.r_epsilon == b.r_epsilon;
}

}  // namespace gridrisk
