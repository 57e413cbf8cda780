#pragma once

#include "gridrisk/linearization.hpp"
#include "gridrisk/network.hpp"

#include <Eigen/Dense>

namespace gridrisk {

/// Zero-mode-free copy of the stochastic linearized system. The uniform
/// phase shift is projected out of the theta block so the Lyapunov
/// equation has a unique solution.
struct ReducedSystem {
    Eigen::MatrixXd J_r;  // (2nV-1) x (2nV-1), Hurwitz
    Eigen::MatrixXd K_r;  // (2nV-1) x nV
    Eigen::MatrixXd C_r;  // n_E x (2nV-1)
};

/// Deterministic orthonormal basis of the complement of span{1} in R^n
/// (Householder completion of 1/sqrt(n)); returns n x (n-1).
Eigen::MatrixXd phase_mean_complement_basis(int n);

/// Reduces (J, K, C) with the default basis. Throws NumericalError if the
/// reduced matrix still has an eigenvalue with real part >= -1e-9, which
/// signals an infeasible or marginal state.
ReducedSystem reduce(const Jacobian& jac, const PowerNetwork& net);
ReducedSystem reduce(const Jacobian& jac, const PowerNetwork& net, const Eigen::MatrixXd& basis);

/// Solves 0 = J_r Q + Q J_r^T + K_r K_r^T by Schur-form back-substitution
/// (Bartels-Stewart). The result is symmetrized; the residual is checked
/// against 1e-8 * ||K_r K_r^T||_F.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& J_r, const Eigen::MatrixXd& K_r);

/// Stationary line-difference statistics of the invariant distribution.
struct InvariantStatistics {
    Eigen::MatrixXd Q_y;    // n_E x n_E
    Eigen::VectorXd sigma;  // sqrt of the diagonal, strictly positive
    Eigen::MatrixXd Q_xr;
};

InvariantStatistics line_statistics(const Eigen::MatrixXd& Q_xr, const ReducedSystem& red);

}  // namespace gridrisk
