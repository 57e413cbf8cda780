#pragma once

#include "gridrisk/equilibrium.hpp"
#include "gridrisk/network.hpp"

#include <Eigen/Dense>

#include <array>

namespace gridrisk {

/// Linearization of the swing dynamics at a synchronous state.
struct Jacobian {
    Eigen::MatrixXd J;          // 2nV x 2nV, [[0, I], [-M^-1 L, -M^-1 D]]
    Eigen::MatrixXd laplacian;  // nV x nV, B W diag(cos m) B^T
    std::array<int, 3> spectral_index{};  // (n-, n0, n+) by eigenvalue real part
};

/// Builds the Jacobian at a feasible synchronous state. Throws
/// std::invalid_argument if the state is infeasible (a cosine would flip
/// sign, invalidating the stability premises).
Jacobian build_jacobian(const PowerNetwork& net, const SynchronousState& state);

/// Laplacian of a complete network from pairwise phase differences
/// (entry (i,j) = -L_ij cos(theta_i - theta_j)). Throws if the graph is
/// not complete.
Eigen::MatrixXd laplacian_complete(const PowerNetwork& net, const SynchronousState& state);

/// Right-hand side of the deterministic swing equations at state
/// [theta; omega] with nodal power injection `power`. Shared with the
/// Monte Carlo module and used as the finite-difference oracle target.
Eigen::VectorXd swing_rhs(const PowerNetwork& net, const Eigen::VectorXd& power,
                          const Eigen::VectorXd& state);

}  // namespace gridrisk
