#include "gridrisk/linearization.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace gridrisk {

Jacobian build_jacobian(const PowerNetwork& net, const SynchronousState& state) {
    if (!state.feasible)
        throw std::invalid_argument("cannot linearize at an infeasible synchronous state");
    const int n = net.node_count;
    const Eigen::MatrixXd b_mat = incidence_matrix(net);
    Eigen::VectorXd cos_m = state.angle_diffs.array().cos();

    Jacobian jac;
    jac.laplacian = b_mat * net.capacity.asDiagonal() * cos_m.asDiagonal() * b_mat.transpose();
    jac.laplacian = 0.5 * (jac.laplacian + jac.laplacian.transpose());

    const Eigen::VectorXd inv_m = net.inertia.cwiseInverse();
    jac.J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    jac.J.topRightCorner(n, n).setIdentity();
    jac.J.bottomLeftCorner(n, n) = -(inv_m.asDiagonal() * jac.laplacian);
    jac.J.bottomRightCorner(n, n) = (-net.damping.cwiseProduct(inv_m)).asDiagonal();

    Eigen::EigenSolver<Eigen::MatrixXd> eig(jac.J, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success) throw NumericalError("Jacobian eigenvalue computation failed");
    jac.spectral_index = {0, 0, 0};
    for (int i = 0; i < eig.eigenvalues().size(); ++i) {
        const double re = eig.eigenvalues()(i).real();
        if (re < -1e-9)
            ++jac.spectral_index[0];
        else if (re > 1e-9)
            ++jac.spectral_index[2];
        else
            ++jac.spectral_index[1];
    }
    return jac;
}

Eigen::MatrixXd laplacian_complete(const PowerNetwork& net, const SynchronousState& state) {
    const int n = net.node_count;
    if (net.line_count != n * (n - 1) / 2)
        throw std::invalid_argument("graph is not complete");

    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < net.line_count; ++k) {
        const auto [i, j] = net.lines[k];
        const double entry = -net.capacity(k) * std::cos(state.theta(i) - state.theta(j));
        lap(i, j) = entry;
        lap(j, i) = entry;
    }
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) row += lap(i, j);
        lap(i, i) = -row;
    }
    return lap;
}

Eigen::VectorXd swing_rhs(const PowerNetwork& net, const Eigen::VectorXd& power,
                          const Eigen::VectorXd& state) {
    const int n = net.node_count;
    if (state.size() != 2 * n) throw std::invalid_argument("state has wrong length");
    const auto theta = state.head(n);
    const auto omega = state.tail(n);

    Eigen::VectorXd flow = Eigen::VectorXd::Zero(n);  // B W sin(B^T theta)
    for (int k = 0; k < net.line_count; ++k) {
        const auto [i, j] = net.lines[k];
        const double s = net.capacity(k) * std::sin(theta(i) - theta(j));
        flow(i) += s;
        flow(j) -= s;
    }
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = omega;
    rhs.tail(n) =
        (-net.damping.cwiseProduct(omega) - flow + power).cwiseQuotient(net.inertia);
    return rhs;
}

}  // namespace gridrisk
