#pragma once

#include "gridrisk/equilibrium.hpp"
#include "gridrisk/feasible_set.hpp"
#include "gridrisk/lyapunov.hpp"
#include "gridrisk/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace gridrisk {

/// Objective value f(p_s) = max_k |m_k| + r_eps sigma_k with its per-line
/// breakdown. Infeasible points carry the capacity penalty
/// pi/2 + ||v||_inf - 1 instead of the undefined risk value; a Lyapunov
/// breakdown at a marginal state is reported the same way, with
/// `failure` describing the offending solve.
struct ObjectiveEvaluation {
    Eigen::VectorXd p_s;
    double f_value = 0.0;
    Eigen::VectorXd components;  // f_k per line
    Eigen::VectorXd angle_abs;   // |m_k|
    Eigen::VectorXd sigma;       // empty when infeasible
    int argmax_line = -1;        // smallest index on exact ties
    bool feasible = false;
    std::string failure;         // nonempty when a solve broke down
};

/// Caches everything that is constant across evaluations of one problem
/// (the affine sine map, the reduction, the constant K_r and C_r).
class Evaluator {
public:
    explicit Evaluator(const DispatchProblem& prob);

    ObjectiveEvaluation operator()(const Eigen::VectorXd& p_s) const;

    const DispatchProblem& problem() const { return *prob_; }
    const AffineSineMap& map() const { return map_; }

private:
    const DispatchProblem* prob_;
    AffineSineMap map_;
    Eigen::MatrixXd incidence_;
    Eigen::MatrixXd basis_;        // U1
    Eigen::MatrixXd k_r_, c_r_;    // constant across p_s
    Eigen::VectorXd inv_inertia_;
};

ObjectiveEvaluation evaluate(const DispatchProblem& prob, const Eigen::VectorXd& p_s);

/// Baseline dispatch scaling every ceiling by total demand over total
/// ceiling; the last entry absorbs the rounding residual so the balance
/// is exact.
Eigen::VectorXd proportional_dispatch(const DispatchProblem& prob);

struct MinimizeOptions {
    int max_iter = 400;
    double step_scale = 0.5;  // step length c / sqrt(t), in p.u.
    double tol = 1e-5;        // best-value improvement threshold
    int patience = 25;        // iterations without improvement before stopping
    bool polish = true;       // min-norm descent to the nearest stationary point
    double fd_step = 1e-6;    // forward difference step for the sigma gradient
};

struct OptimizationResult {
    Eigen::VectorXd p_s_star;
    Eigen::VectorXd supply;  // full p+ including the induced last entry
    double f_star = 0.0;
    bool feasible = false;
    std::vector<std::pair<Eigen::VectorXd, double>> trace;
    std::string termination;
    double wall_seconds = 0.0;
    long long evaluations = 0;
};

/// Projected subgradient descent on the nonsmooth objective, followed by a
/// generalized-subgradient (min-norm) polish. Returns the best feasible
/// member seen.
OptimizationResult minimize(const DispatchProblem& prob, const Eigen::VectorXd& start,
                            const MinimizeOptions& opts = {});

/// Runs minimize from every start and keeps the best result.
OptimizationResult minimize_multi(const DispatchProblem& prob,
                                  const std::vector<Eigen::VectorXd>& starts,
                                  const MinimizeOptions& opts = {});

/// Exhaustive lattice search over the feasible polytope; deterministic
/// (value, lexicographic) reduction across worker threads.
OptimizationResult grid_minimize(const DispatchProblem& prob, int steps_per_dim, int threads = 0);

}  // namespace gridrisk
