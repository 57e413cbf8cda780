#include "gridrisk/equilibrium.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <queue>

namespace gridrisk {

Eigen::MatrixXd laplacian_pseudo_inverse(const PowerNetwork& net) {
    const int n = net.node_count;
    const Eigen::MatrixXd b_mat = incidence_matrix(net);
    const Eigen::MatrixXd gram = b_mat * net.capacity.asDiagonal() * b_mat.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of B W B^T failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();

    Eigen::VectorXd lambda_pinv(n);
    int zero_count = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lambda(i)) <= 1e-9 * scale) {
            lambda_pinv(i) = 0.0;
            ++zero_count;
        } else {
            lambda_pinv(i) = 1.0 / lambda(i);
        }
    }
    if (zero_count != 1)
        throw NumericalError("B W B^T has " + std::to_string(zero_count) +
                             " near-zero eigenvalues; expected exactly one for a connected graph");
    return eig.eigenvectors() * lambda_pinv.asDiagonal() * eig.eigenvectors().transpose();
}

AffineSineMap build_affine_map(const DispatchProblem& prob) {
    const PowerNetwork& net = prob.network;
    const int n = net.node_count;
    const int n_plus = net.supply_count;
    const Eigen::MatrixXd b_mat = incidence_matrix(net);
    const Eigen::MatrixXd pinv = laplacian_pseudo_inverse(net);
    // full map from nodal injections to line sines; columns are then
    // differenced against the last supply node per the balance constraint
    const Eigen::MatrixXd full = b_mat.transpose() * pinv;  // n_E x nV

    AffineSineMap map;
    map.A.resize(net.line_count, n_plus - 1);
    for (int i = 0; i + 1 < n_plus; ++i) map.A.col(i) = full.col(i) - full.col(n_plus - 1);
    map.b = Eigen::VectorXd::Zero(net.line_count);
    for (int j = n_plus; j < n; ++j)
        map.b += prob.demand(j - n_plus) * (full.col(n_plus - 1) - full.col(j));
    return map;
}

namespace {

// Spanning-tree propagation of per-line values: assigns node potentials
// phi with phi[root] = 0 and phi_i - phi_j = value_k on tree lines;
// returns the max |phi_i - phi_j - value_k| residual over non-tree lines.
double tree_propagate(const PowerNetwork& net, const Eigen::VectorXd& value, int root,
                      Eigen::VectorXd& phi) {
    const int n = net.node_count;
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, line)
    for (int k = 0; k < net.line_count; ++k) {
        adj[net.lines[k].first].push_back({net.lines[k].second, k});
        adj[net.lines[k].second].push_back({net.lines[k].first, k});
    }
    phi = Eigen::VectorXd::Zero(n);
    std::vector<bool> seen(n, false);
    std::vector<bool> tree_line(net.line_count, false);
    std::queue<int> queue;
    queue.push(root);
    seen[root] = true;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (const auto& [w, k] : adj[u]) {
            if (seen[w]) continue;
            seen[w] = true;
            tree_line[k] = true;
            const double d = (net.lines[k].first == u) ? value(k) : -value(k);
            // phi_i - phi_j = value_k with i = lines[k].first
            phi(w) = phi(u) - d;
            queue.push(w);
        }
    }
    double residual = 0.0;
    for (int k = 0; k < net.line_count; ++k) {
        if (tree_line[k]) continue;
        const double r = std::abs(phi(net.lines[k].first) - phi(net.lines[k].second) - value(k));
        residual = std::max(residual, r);
    }
    return residual;
}

}  // namespace

SynchronousState solve_synchronous_state(const PowerNetwork& net, const AffineSineMap& map,
                                         const Eigen::VectorXd& p_s) {
    if (!p_s.allFinite()) throw std::invalid_argument("decision vector must be finite");
    SynchronousState st;
    st.sine_diffs = map.A * p_s + map.b;
    const double v_inf = st.sine_diffs.size() > 0 ? st.sine_diffs.cwiseAbs().maxCoeff() : 0.0;
    st.gamma_margin = 1.0 - v_inf;
    st.feasible = v_inf < 1.0;

    st.angle_diffs.resize(st.sine_diffs.size());
    for (int k = 0; k < st.sine_diffs.size(); ++k) {
        const double v = std::clamp(st.sine_diffs(k), -1.0, 1.0);
        st.angle_diffs(k) = std::asin(v);
    }

    // The sine vector lies in the image of B^T by construction, so its
    // spanning-tree residual detects numerical breakdown only.
    Eigen::VectorXd psi;
    const double residual = tree_propagate(net, st.sine_diffs, net.node_count - 1, psi);
    if (residual > 1e-8)
        throw NumericalError("line sine vector is not cycle-consistent (residual " +
                             std::to_string(residual) + ")");

    Eigen::VectorXd theta;
    tree_propagate(net, st.angle_diffs, net.node_count - 1, theta);
    st.theta = theta;
    return st;
}

SynchronousState state_from_theta(const PowerNetwork& net, const Eigen::VectorXd& theta) {
    if (theta.size() != net.node_count) throw std::invalid_argument("theta has wrong length");
    SynchronousState st;
    st.theta = theta;
    st.angle_diffs.resize(net.line_count);
    for (int k = 0; k < net.line_count; ++k)
        st.angle_diffs(k) = theta(net.lines[k].first) - theta(net.lines[k].second);
    st.sine_diffs = st.angle_diffs.array().sin();
    const double m_inf = net.line_count > 0 ? st.angle_diffs.cwiseAbs().maxCoeff() : 0.0;
    st.feasible = m_inf < M_PI / 2.0;
    st.gamma_margin = 1.0 - st.sine_diffs.cwiseAbs().maxCoeff();
    return st;
}

double synchronous_frequency(const DispatchProblem& prob, const Eigen::VectorXd& power) {
    const double d_sum = prob.network.damping.sum();
    if (!(d_sum > 0.0)) throw std::domain_error("total damping is zero");
    return power.sum() / d_sum;
}

}  // namespace gridrisk
