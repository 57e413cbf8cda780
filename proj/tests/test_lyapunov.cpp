#include "gridrisk/equilibrium.hpp"
#include "gridrisk/feasible_set.hpp"
#include "gridrisk/fixtures.hpp"
#include "gridrisk/linearization.hpp"
#include "gridrisk/lyapunov.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace gridrisk;

namespace {

DispatchProblem two_node_problem() {
    DispatchProblem prob;
    PowerNetwork& net = prob.network;
    net.node_count = 2;
    net.line_count = 1;
    net.supply_count = 1;
    net.lines = {{0, 1}};
    net.node_ids = {1, 2};
    net.inertia = Eigen::Vector2d(2.0, 1.0);
    net.damping = Eigen::Vector2d(1.5, 1.0);
    net.noise = Eigen::Vector2d(0.8, 1.1);
    net.capacity = Eigen::VectorXd::Constant(1, 25.0);
    prob.p_max = Eigen::VectorXd::Constant(1, 15.0);
    prob.demand = Eigen::VectorXd::Constant(1, 12.5);
    return prob;
}

InvariantStatistics stats_at(const DispatchProblem& prob, const Eigen::VectorXd& p_s,
                             ReducedSystem* red_out = nullptr) {
    const AffineSineMap map = build_affine_map(prob);
    const SynchronousState st = solve_synchronous_state(prob.network, map, p_s);
    REQUIRE(st.feasible);
    const Jacobian jac = build_jacobian(prob.network, st);
    const ReducedSystem red = reduce(jac, prob.network);
    const Eigen::MatrixXd q = solve_lyapunov(red.J_r, red.K_r);
    if (red_out) *red_out = red;
    return line_statistics(q, red);
}

int line_index(const PowerNetwork& net, int a, int b) {
    for (int k = 0; k < net.line_count; ++k) {
        auto [i, j] = net.line_label(k);
        if ((i == a && j == b) || (i == b && j == a)) return k;
    }
    return -1;
}

}  // namespace

TEST_CASE("scalar lyapunov closed form") {
    const Eigen::MatrixXd j = Eigen::MatrixXd::Constant(1, 1, -2.0);
    const Eigen::MatrixXd k = Eigen::MatrixXd::Constant(1, 1, 3.0);
    const Eigen::MatrixXd q = solve_lyapunov(j, k);
    CHECK(q(0, 0) == doctest::Approx(9.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("diagonal lyapunov decouples into scalars") {
    Eigen::MatrixXd j = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
    const Eigen::MatrixXd q = solve_lyapunov(j, Eigen::MatrixXd::Identity(2, 2));
    CHECK(q(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(q(0, 1)) <= 1e-14);
}

TEST_CASE("random stable systems satisfy the residual bound and are PD") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 12;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
        a -= (a.cwiseAbs().rowwise().sum().maxCoeff() + 0.5) * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) k(i, j) = gauss(rng);

        const Eigen::MatrixXd q = solve_lyapunov(a, k);
        const Eigen::MatrixXd w = k * k.transpose();
        CHECK((a * q + q * a.transpose() + w).norm() <= 1e-8 * w.norm());
        CHECK(q.isApprox(q.transpose(), 1e-12));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("reduction leaves the line-difference rows unchanged") {
    const DispatchProblem prob = fixture("eight_node");
    const AffineSineMap map = build_affine_map(prob);
    const SynchronousState st =
        solve_synchronous_state(prob.network, map, Eigen::Vector3d(12, 12, 12));
    const Jacobian jac = build_jacobian(prob.network, st);
    const ReducedSystem red = reduce(jac, prob.network);

    const int n = prob.network.node_count;
    Eigen::MatrixXd t_red = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n);
    t_red.topLeftCorner(n - 1, n) = phase_mean_complement_basis(n).transpose();
    t_red.bottomRightCorner(n, n).setIdentity();
    Eigen::MatrixXd c_full = Eigen::MatrixXd::Zero(prob.network.line_count, 2 * n);
    c_full.leftCols(n) = incidence_matrix(prob.network).transpose();
    CHECK((red.C_r * t_red - c_full).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("reduced system is Hurwitz on the examples") {
    SUBCASE("two-node") {
        const DispatchProblem prob = two_node_problem();
        const AffineSineMap map = build_affine_map(prob);
        const SynchronousState st = solve_synchronous_state(prob.network, map, Eigen::VectorXd(0));
        const Jacobian jac = build_jacobian(prob.network, st);
        const ReducedSystem red = reduce(jac, prob.network);
        CHECK(red.J_r.rows() == 3);
        Eigen::EigenSolver<Eigen::MatrixXd> eig(red.J_r);
        CHECK(eig.eigenvalues().real().maxCoeff() < 0.0);
    }
    SUBCASE("eight-node at the optimum") {
        const DispatchProblem prob = fixture("eight_node");
        const AffineSineMap map = build_affine_map(prob);
        const SynchronousState st = solve_synchronous_state(
            prob.network, map, Eigen::Vector3d(11.7679, 13.7632, 13.5247));
        const Jacobian jac = build_jacobian(prob.network, st);
        const ReducedSystem red = reduce(jac, prob.network);
        Eigen::EigenSolver<Eigen::MatrixXd> eig(red.J_r);
        CHECK(eig.eigenvalues().real().maxCoeff() < 0.0);
    }
}

TEST_CASE("sigma reproduces the published eight-node values") {
    const DispatchProblem prob = fixture("eight_node");
    const InvariantStatistics stats =
        stats_at(prob, Eigen::Vector3d(11.7679, 13.7632, 13.5247));
    CHECK(stats.sigma(line_index(prob.network, 6, 7)) == doctest::Approx(0.2681).epsilon(4e-4));
    CHECK(stats.sigma(line_index(prob.network, 2, 3)) == doctest::Approx(0.1267).epsilon(8e-4));
}

TEST_CASE("sigma reproduces the published ring value") {
    const DispatchProblem prob = fixture("ring_asymmetric");
    const InvariantStatistics stats =
        stats_at(prob, Eigen::Vector3d(21.7314, 19.3050, 23.0071));
    CHECK(stats.sigma(line_index(prob.network, 1, 12)) == doctest::Approx(0.2647).epsilon(4e-4));
}

TEST_CASE("noise scaling and monotonicity") {
    const DispatchProblem base = fixture("eight_node");
    const Eigen::VectorXd p_s = Eigen::Vector3d(12, 12, 12);
    const InvariantStatistics s0 = stats_at(base, p_s);

    DispatchProblem scaled = base;
    scaled.network.noise *= 1.7;
    const InvariantStatistics s1 = stats_at(scaled, p_s);
    CHECK((s1.sigma - 1.7 * s0.sigma).cwiseAbs().maxCoeff() <= 1e-10);

    DispatchProblem bumped = base;
    bumped.network.noise(3) += 0.9;
    const InvariantStatistics s2 = stats_at(bumped, p_s);
    CHECK(((s2.sigma - s0.sigma).array() >= -1e-12).all());
    CHECK((s2.sigma - s0.sigma).maxCoeff() > 1e-4);
}

TEST_CASE("line variances are strictly positive on random feasible dispatches") {
    std::mt19937_64 rng(17);
    for (const auto& name : {"eight_node", "ring_asymmetric"}) {
        const DispatchProblem prob = fixture(name);
        const AffineSineMap map = build_affine_map(prob);
        const FeasiblePolytope poly = build_polytope(prob);
        int tested = 0;
        for (int trial = 0; trial < 2000 && tested < 50; ++trial) {
            const Eigen::VectorXd p = oracles::random_member(
                rng, poly.b2, [&](const Eigen::VectorXd& q) { return poly.contains(q); });
            const SynchronousState st = solve_synchronous_state(prob.network, map, p);
            if (!st.feasible) continue;
            const Jacobian jac = build_jacobian(prob.network, st);
            const ReducedSystem red = reduce(jac, prob.network);
            const InvariantStatistics stats = line_statistics(solve_lyapunov(red.J_r, red.K_r), red);
            CHECK(stats.sigma.minCoeff() > 0.0);
            ++tested;
        }
        CHECK(tested == 50);
    }
}

TEST_CASE("any orthonormal reduction basis yields the same line covariance") {
    const DispatchProblem prob = fixture("eight_node");
    const AffineSineMap map = build_affine_map(prob);
    const SynchronousState st =
        solve_synchronous_state(prob.network, map, Eigen::Vector3d(12, 13, 14));
    const Jacobian jac = build_jacobian(prob.network, st);

    const ReducedSystem red_a = reduce(jac, prob.network);
    // a different orthonormal basis of the complement of span{1}
    const int n = prob.network.node_count;
    Eigen::MatrixXd seed(n, n);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) seed(i, j) = gauss(rng);
    seed.col(0) = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    const Eigen::MatrixXd alt_basis =
        Eigen::HouseholderQR<Eigen::MatrixXd>(seed).householderQ() *
        Eigen::MatrixXd::Identity(n, n).rightCols(n - 1);
    REQUIRE((alt_basis.transpose() * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    const ReducedSystem red_b = reduce(jac, prob.network, alt_basis);

    const InvariantStatistics sa = line_statistics(solve_lyapunov(red_a.J_r, red_a.K_r), red_a);
    const InvariantStatistics sb = line_statistics(solve_lyapunov(red_b.J_r, red_b.K_r), red_b);
    CHECK((sa.Q_y - sb.Q_y).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("solver matches the quadrature gramian on small networks") {
    SUBCASE("two-node") {
        const DispatchProblem prob = two_node_problem();
        ReducedSystem red;
        const InvariantStatistics stats = stats_at(prob, Eigen::VectorXd(0), &red);
        const Eigen::MatrixXd oracle = oracles::gramian_quadrature(red.J_r, red.K_r, 200.0);
        CHECK((stats.Q_xr - oracle).norm() <= 1e-6 * oracle.norm());
    }
    SUBCASE("four-node star") {
        DispatchProblem prob;
        PowerNetwork& net = prob.network;
        net.node_count = 4;
        net.supply_count = 2;
        net.lines = {{0, 2}, {1, 2}, {2, 3}};
        net.line_count = 3;
        net.node_ids = {1, 2, 3, 4};
        net.inertia = Eigen::Vector4d(2, 2, 1, 1);
        net.damping = Eigen::Vector4d(1.5, 1.5, 1, 1);
        net.noise = Eigen::Vector4d(0.6, 0.8, 1.0, 0.9);
        net.capacity = Eigen::Vector3d(20, 20, 15);
        prob.p_max = Eigen::Vector2d(10, 10);
        prob.demand = Eigen::Vector2d(6, 7);
        ReducedSystem red;
        const InvariantStatistics stats = stats_at(prob, Eigen::VectorXd::Constant(1, 6.0), &red);
        const Eigen::MatrixXd oracle = oracles::gramian_quadrature(red.J_r, red.K_r, 200.0);
        CHECK((stats.Q_xr - oracle).norm() <= 1e-6 * oracle.norm());
    }
}

TEST_CASE("Q_xr is positive definite at example states") {
    const DispatchProblem prob = fixture("ring_asymmetric");
    const InvariantStatistics stats = stats_at(prob, Eigen::Vector3d(21, 19, 23));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(stats.Q_xr);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}
