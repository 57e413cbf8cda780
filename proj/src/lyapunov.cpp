#include "gridrisk/lyapunov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace gridrisk {

Eigen::MatrixXd phase_mean_complement_basis(int n) {
    // Householder reflector mapping e_1 to 1/sqrt(n); its remaining columns
    // span the complement of span{1} orthonormally.
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    Eigen::VectorXd w = v - Eigen::VectorXd::Unit(n, 0);
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    const double wsq = w.squaredNorm();
    if (wsq > 0.0) h -= (2.0 / wsq) * (w * w.transpose());
    return h.rightCols(n - 1);
}

ReducedSystem reduce(const Jacobian& jac, const PowerNetwork& net) {
    return reduce(jac, net, phase_mean_complement_basis(net.node_count));
}

ReducedSystem reduce(const Jacobian& jac, const PowerNetwork& net, const Eigen::MatrixXd& basis) {
    const int n = net.node_count;
    if (basis.rows() != n || basis.cols() != n - 1)
        throw std::invalid_argument("reduction basis has wrong shape");

    Eigen::MatrixXd t_red = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n);
    t_red.topLeftCorner(n - 1, n) = basis.transpose();
    t_red.bottomRightCorner(n, n).setIdentity();

    // noise enters the frequency equations as power disturbance, so the
    // inertia division applies to K2 as well
    Eigen::MatrixXd k_full = Eigen::MatrixXd::Zero(2 * n, n);
    k_full.bottomRows(n) = net.noise.cwiseQuotient(net.inertia).asDiagonal();

    Eigen::MatrixXd c_full = Eigen::MatrixXd::Zero(net.line_count, 2 * n);
    c_full.leftCols(n) = incidence_matrix(net).transpose();

    ReducedSystem red;
    red.J_r = t_red * jac.J * t_red.transpose();
    red.K_r = t_red * k_full;
    red.C_r = c_full * t_red.transpose();

    Eigen::EigenSolver<Eigen::MatrixXd> eig(red.J_r, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success) throw NumericalError("reduced-system eigenvalues failed");
    const double max_re = eig.eigenvalues().real().maxCoeff();
    if (max_re >= -1e-9)
        throw NumericalError("reduced system is not Hurwitz (max Re = " + std::to_string(max_re) +
                             "); state is marginal or infeasible");
    return red;
}

namespace {

// Solves T Y + Y T^T = F for quasi-upper-triangular T (real Schur form),
// overwriting F with Y. Blocks are resolved back-to-front; each diagonal
// pair yields a Kronecker system of size at most 4.
void schur_sylvester_inplace(const Eigen::MatrixXd& t, Eigen::MatrixXd& f) {
    const int n = t.rows();
    std::vector<int> starts;  // block start indices
    for (int i = 0; i < n;) {
        starts.push_back(i);
        i += (i + 1 < n && std::abs(t(i + 1, i)) > 0.0) ? 2 : 1;
    }
    const int nb = static_cast<int>(starts.size());
    auto block_size = [&](int bi) {
        return (bi + 1 < nb ? starts[bi + 1] : n) - starts[bi];
    };

    for (int bi = nb - 1; bi >= 0; --bi) {
        const int i0 = starts[bi], p = block_size(bi);
        for (int bj = nb - 1; bj >= 0; --bj) {
            const int j0 = starts[bj], q = block_size(bj);

            Eigen::MatrixXd rhs = f.block(i0, j0, p, q);
            if (i0 + p < n)
                rhs -= t.block(i0, i0 + p, p, n - i0 - p) * f.block(i0 + p, j0, n - i0 - p, q);
            if (j0 + q < n)
                rhs -= f.block(i0, j0 + q, p, n - j0 - q) *
                       t.block(j0, j0 + q, q, n - j0 - q).transpose();

            // (I_q (x) T_ii + T_jj (x) I_p) vec(Y) = vec(rhs), column-major
            const int m = p * q;
            Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> sys(m, m);
            sys.setZero();
            for (int c = 0; c < q; ++c)
                sys.block(c * p, c * p, p, p) = t.block(i0, i0, p, p);
            for (int c = 0; c < q; ++c)
                for (int d = 0; d < q; ++d)
                    for (int r = 0; r < p; ++r) sys(c * p + r, d * p + r) += t(j0 + c, j0 + d);

            Eigen::Map<Eigen::VectorXd> rhs_vec(rhs.data(), m);
            Eigen::PartialPivLU<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>> lu(sys);
            Eigen::VectorXd y = lu.solve(rhs_vec);
            if (!y.allFinite())
                throw NumericalError("Sylvester block solve is singular; J_r is not Hurwitz");
            f.block(i0, j0, p, q) = Eigen::Map<Eigen::MatrixXd>(y.data(), p, q);
        }
    }
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& j_r, const Eigen::MatrixXd& k_r) {
    const Eigen::MatrixXd w = k_r * k_r.transpose();

    Eigen::RealSchur<Eigen::MatrixXd> schur(j_r);
    if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition failed");
    const Eigen::MatrixXd& u = schur.matrixU();
    const Eigen::MatrixXd& t = schur.matrixT();

    Eigen::MatrixXd f = -(u.transpose() * w * u);
    schur_sylvester_inplace(t, f);
    Eigen::MatrixXd q = u * f * u.transpose();
    q = 0.5 * (q + q.transpose());

    const double w_norm = w.norm();
    const double residual = (j_r * q + q * j_r.transpose() + w).norm();
    if (w_norm > 0.0 && residual > 1e-8 * w_norm)
        throw NumericalError("Lyapunov residual " + std::to_string(residual / w_norm) +
                             " exceeds 1e-8 relative");
    return q;
}

InvariantStatistics line_statistics(const Eigen::MatrixXd& q_xr, const ReducedSystem& red) {
    InvariantStatistics stats;
    stats.Q_xr = q_xr;
    stats.Q_y = red.C_r * q_xr * red.C_r.transpose();
    stats.Q_y = 0.5 * (stats.Q_y + stats.Q_y.transpose());
    stats.sigma.resize(stats.Q_y.rows());
    for (int k = 0; k < stats.Q_y.rows(); ++k) {
        const double var = stats.Q_y(k, k);
        if (!(var > 0.0))
            throw NumericalError("nonpositive line variance on line " + std::to_string(k));
        stats.sigma(k) = std::sqrt(var);
    }
    return stats;
}

}  // namespace gridrisk
