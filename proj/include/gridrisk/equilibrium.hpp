#pragma once

#include "gridrisk/network.hpp"

#include <Eigen/Dense>

namespace gridrisk {

/// Numerical failure inside the equilibrium computation (e.g. the weighted
/// graph Laplacian has more than one near-zero eigenvalue).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Affine map from the decision vector to the per-line sine values:
/// sin(theta_i - theta_j) per line = A * p_s + b. Rows follow network
/// line order.
struct AffineSineMap {
    Eigen::MatrixXd A;  // n_E x (n+ - 1)
    Eigen::VectorXd b;  // n_E
};

/// Synchronous (steady) state for a fixed dispatch. `angle_diffs` holds the
/// per-line values arcsin(sine_diffs); `theta` is one representative phase
/// vector, pinned at theta[nV-1] = 0, whose spanning-tree differences equal
/// angle_diffs. On meshed graphs the per-line angles are the quantities all
/// downstream computations use.
struct SynchronousState {
    Eigen::VectorXd theta;        // nV
    Eigen::VectorXd sine_diffs;   // n_E
    Eigen::VectorXd angle_diffs;  // n_E, radians
    bool feasible = false;
    double gamma_margin = 0.0;  // 1 - ||sine_diffs||_inf
};

/// Moore-Penrose pseudo-inverse of the capacity-weighted Laplacian
/// B W B^T, with the constant mode zeroed. Throws NumericalError if more
/// than one eigenvalue is near zero (a disconnected graph slipping past
/// validation).
Eigen::MatrixXd laplacian_pseudo_inverse(const PowerNetwork& net);

/// Assembles A and b from the pseudo-inverse per the balance constraint.
AffineSineMap build_affine_map(const DispatchProblem& prob);

/// Evaluates the map at p_s, flags strict-stability feasibility
/// (||A p_s + b||_inf < 1) and recovers a pinned phase vector. Infeasibility
/// is a state flag, not an exception. Throws NumericalError if the sine
/// vector fails the spanning-tree cycle-consistency check, which cannot
/// happen unless the linear algebra broke down.
SynchronousState solve_synchronous_state(const PowerNetwork& net, const AffineSineMap& map,
                                         const Eigen::VectorXd& p_s);

/// State with angle_diffs == B^T theta, for a caller-supplied phase vector.
SynchronousState state_from_theta(const PowerNetwork& net, const Eigen::VectorXd& theta);

/// Synchronous frequency sum(p) / sum(D); zero iff supply balances demand.
double synchronous_frequency(const DispatchProblem& prob, const Eigen::VectorXd& power);

}  // namespace gridrisk
