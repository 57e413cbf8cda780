#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridrisk {

/// Malformed network file (bad JSON, wrong types, missing fields).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structurally well-formed input that violates a model invariant
/// (disconnected graph, nonpositive capacity, supply below demand, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Static description of the power network. Nodes are stored supply-first:
/// internal indices 0..supply_count-1 are supply nodes, the rest demand
/// nodes. `node_ids` keeps the external 1-based ids for reporting.
struct PowerNetwork {
    int node_count = 0;
    int line_count = 0;
    int supply_count = 0;
    std::vector<std::pair<int, int>> lines;  // 0-based internal endpoints
    std::vector<int> node_ids;
    Eigen::VectorXd inertia;   // M diagonal, > 0
    Eigen::VectorXd damping;   // D diagonal, >= 0
    Eigen::VectorXd noise;     // K2 diagonal, >= 0
    Eigen::VectorXd capacity;  // W diagonal per line, > 0

    int demand_count() const { return node_count - supply_count; }
    /// External (id_i, id_j) pair of line k, as written in the input file.
    std::pair<int, int> line_label(int k) const {
        return {node_ids[lines[k].first], node_ids[lines[k].second]};
    }
};

/// One dispatch instance: the network plus supply ceilings, the demand
/// forecast for the next short horizon, and the risk multiplier.
struct DispatchProblem {
    PowerNetwork network;
    Eigen::VectorXd p_max;   // length n+
    Eigen::VectorXd demand;  // length nV - n+, strictly positive
    double r_epsilon = 3.08;

    double total_demand() const { return demand.sum(); }
    int decision_dim() const { return network.supply_count - 1; }
};

/// Node-by-line incidence matrix: column k is +1 at i_k, -1 at j_k.
Eigen::MatrixXd incidence_matrix(const PowerNetwork& net);

/// Throws ValidationError if any PowerNetwork invariant fails.
void validate(const PowerNetwork& net);
void validate(const DispatchProblem& prob);

/// Full supply vector of length n+: p_s with the balance-closing last entry.
Eigen::VectorXd full_supply(const DispatchProblem& prob, const Eigen::VectorXd& p_s);

/// Full nodal power vector [p+, -p-] of length nV.
Eigen::VectorXd full_power_vector(const DispatchProblem& prob, const Eigen::VectorXd& p_s);

DispatchProblem load_network(const std::string& path);
DispatchProblem parse_network(const std::string& text, const std::string& origin = "<string>");
std::string serialize_network(const DispatchProblem& prob);

bool identical_structure(const DispatchProblem& a, const DispatchProblem& b);

}  // namespace gridrisk
