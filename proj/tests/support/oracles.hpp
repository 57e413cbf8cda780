#pragma once

// Test-only reference computations, kept independent of the library's own
// solution paths.

#include "gridrisk/network.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <queue>
#include <random>
#include <vector>

namespace oracles {

// plain breadth-first search connectivity check
inline bool bfs_connected(int nodes, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(nodes);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<bool> seen(nodes, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int visited = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : adj[u])
            if (!seen[w]) {
                seen[w] = true;
                ++visited;
                q.push(w);
            }
    }
    return visited == nodes;
}

// central-difference Jacobian of a vector field
inline Eigen::MatrixXd numerical_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field, const Eigen::VectorXd& x,
    double h = 1e-5) {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(field(x).size());
    Eigen::MatrixXd jac(m, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        jac.col(i) = (field(xp) - field(xm)) / (2.0 * h);
    }
    return jac;
}

// controllability-Gramian quadrature: integral of e^{Jt} K K^T e^{J^T t}
// over [0, T] by Simpson's rule with matrix-exponential stepping
inline Eigen::MatrixXd gramian_quadrature(const Eigen::MatrixXd& j, const Eigen::MatrixXd& k,
                                          double t_final, double dt = 0.01) {
    const Eigen::MatrixXd phi = (j * dt).exp();
    Eigen::MatrixXd e = k;  // e(t) = e^{Jt} K
    const int steps = static_cast<int>(t_final / dt);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(j.rows(), j.rows());
    Eigen::MatrixXd prev = e * e.transpose();
    for (int s = 1; s <= steps; ++s) {
        const Eigen::MatrixXd mid_e = (j * (dt * (s - 0.5))).exp() * k;
        e = phi * e;
        const Eigen::MatrixXd cur = e * e.transpose();
        acc += (dt / 6.0) * (prev + 4.0 * mid_e * mid_e.transpose() + cur);
        prev = cur;
    }
    return acc;
}

// uniform random member of the feasible polytope by rejection sampling over
// the ceiling box
inline Eigen::VectorXd random_member(std::mt19937_64& rng, const Eigen::VectorXd& b2,
                                     const std::function<bool(const Eigen::VectorXd&)>& member,
                                     int max_tries = 200000) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd p(b2.size());
    for (int t = 0; t < max_tries; ++t) {
        for (int i = 0; i < b2.size(); ++i) p(i) = unit(rng) * b2(i);
        if (member(p)) return p;
    }
    throw std::runtime_error("random_member: rejection sampling failed");
}

}  // namespace oracles
