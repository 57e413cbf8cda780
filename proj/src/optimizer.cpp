#include "gridrisk/optimizer.hpp"

#include "gridrisk/linearization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace gridrisk {

namespace {
constexpr double kHalfPi = M_PI / 2.0;
}

Evaluator::Evaluator(const DispatchProblem& prob)
    : prob_(&prob),
      map_(build_affine_map(prob)),
      incidence_(incidence_matrix(prob.network)),
      basis_(phase_mean_complement_basis(prob.network.node_count)) {
    const PowerNetwork& net = prob.network;
    const int n = net.node_count;
    inv_inertia_ = net.inertia.cwiseInverse();

    Eigen::MatrixXd k_full = Eigen::MatrixXd::Zero(2 * n, n);
    k_full.bottomRows(n) = net.noise.cwiseQuotient(net.inertia).asDiagonal();
    Eigen::MatrixXd t_red = Eigen::MatrixXd::Zero(2 * n - 1, 2 * n);
    t_red.topLeftCorner(n - 1, n) = basis_.transpose();
    t_red.bottomRightCorner(n, n).setIdentity();
    k_r_ = t_red * k_full;

    Eigen::MatrixXd c_full = Eigen::MatrixXd::Zero(net.line_count, 2 * n);
    c_full.leftCols(n) = incidence_.transpose();
    c_r_ = c_full * t_red.transpose();
}

ObjectiveEvaluation Evaluator::operator()(const Eigen::VectorXd& p_s) const {
    const PowerNetwork& net = prob_->network;
    const int n = net.node_count;
    const int n_e = net.line_count;

    ObjectiveEvaluation ev;
    ev.p_s = p_s;
    const Eigen::VectorXd v = map_.A * p_s + map_.b;
    const double v_inf = v.cwiseAbs().maxCoeff();
    ev.feasible = v_inf < 1.0;

    auto penalize = [&](double value) {
        ev.feasible = false;
        ev.components.resize(n_e);
        ev.angle_abs.resize(n_e);
        ev.sigma.resize(0);
        for (int k = 0; k < n_e; ++k) {
            const double a = std::abs(v(k));
            ev.angle_abs(k) = a < 1.0 ? std::asin(a) : kHalfPi;
            ev.components(k) = a < 1.0 ? ev.angle_abs(k) : value;
        }
        ev.f_value = value;
        v.cwiseAbs().maxCoeff(&ev.argmax_line);
    };

    if (!ev.feasible) {
        penalize(kHalfPi + v_inf - 1.0);
        return ev;
    }

    Eigen::VectorXd cos_m = (1.0 - v.array().square()).sqrt();
    const Eigen::MatrixXd lap =
        incidence_ * net.capacity.asDiagonal() * cos_m.asDiagonal() * incidence_.transpose();

    // reduced Jacobian assembled directly in block form
    const int nr = 2 * n - 1;
    Eigen::MatrixXd j_r = Eigen::MatrixXd::Zero(nr, nr);
    j_r.topRightCorner(n - 1, n) = basis_.transpose();
    j_r.bottomLeftCorner(n, n - 1) = (-inv_inertia_).asDiagonal() * (lap * basis_);
    j_r.bottomRightCorner(n, n).diagonal() = -net.damping.cwiseProduct(inv_inertia_);

    try {
        const Eigen::MatrixXd q_xr = solve_lyapunov(j_r, k_r_);
        const Eigen::MatrixXd q_y = c_r_ * q_xr * c_r_.transpose();
        ev.angle_abs = v.array().abs().asin();
        ev.sigma.resize(n_e);
        ev.components.resize(n_e);
        for (int k = 0; k < n_e; ++k) {
            const double var = q_y(k, k);
            if (!(var > 0.0)) throw NumericalError("nonpositive line variance");
            ev.sigma(k) = std::sqrt(var);
            ev.components(k) = ev.angle_abs(k) + prob_->r_epsilon * ev.sigma(k);
        }
        ev.f_value = ev.components.maxCoeff(&ev.argmax_line);
    } catch (const NumericalError& e) {
        // marginal state: the Lyapunov solve broke down; fold it into the
        // penalty landscape so the optimizer steers away instead of dying
        ev.failure = e.what();
        penalize(kHalfPi + std::abs(v_inf - 1.0));
    }
    return ev;
}

ObjectiveEvaluation evaluate(const DispatchProblem& prob, const Eigen::VectorXd& p_s) {
    return Evaluator(prob)(p_s);
}

Eigen::VectorXd proportional_dispatch(const DispatchProblem& prob) {
    const double total = prob.total_demand();
    const double scale = total / prob.p_max.sum();
    Eigen::VectorXd p = scale * prob.p_max;
    p(p.size() - 1) = total - p.head(p.size() - 1).sum();
    return p;
}

namespace {

// subgradient of the active component: analytic arcsin term plus forward
// differences on the sigma term
Eigen::VectorXd active_gradient(const Evaluator& eval, const ObjectiveEvaluation& at, int line,
                                double fd_step, long long& eval_count) {
    const AffineSineMap& map = eval.map();
    const double v_k = (map.A.row(line) * at.p_s + map.b.row(line)).value();
    const double sign = v_k > 0.0 ? 1.0 : (v_k < 0.0 ? -1.0 : 0.0);
    Eigen::VectorXd g;
    if (!at.feasible) {
        g = sign * map.A.row(line).transpose();
        return g;
    }
    g = sign * map.A.row(line).transpose() / std::sqrt(std::max(1.0 - v_k * v_k, 1e-12));
    const double r_eps = eval.problem().r_epsilon;
    for (int i = 0; i < at.p_s.size(); ++i) {
        Eigen::VectorXd shifted = at.p_s;
        shifted(i) += fd_step;
        ObjectiveEvaluation pe = eval(shifted);
        ++eval_count;
        if (pe.feasible) {
            g(i) += r_eps * (pe.sigma(line) - at.sigma(line)) / fd_step;
        } else {
            shifted(i) -= 2.0 * fd_step;
            ObjectiveEvaluation me = eval(shifted);
            ++eval_count;
            if (me.feasible) g(i) += r_eps * (at.sigma(line) - me.sigma(line)) / fd_step;
        }
    }
    return g;
}

// minimum-norm element of the convex hull of the rows of g, by support-set
// enumeration (the active set is small)
Eigen::VectorXd min_norm_element(const std::vector<Eigen::VectorXd>& gs) {
    const int n = static_cast<int>(gs.size());
    double best_sq = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = gs.front();
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> support;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) support.push_back(i);
        const int r = static_cast<int>(support.size());
        Eigen::MatrixXd gram(r, r);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) gram(a, b) = gs[support[a]].dot(gs[support[b]]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram + 1e-14 * Eigen::MatrixXd::Identity(r, r));
        Eigen::VectorXd lambda = lu.solve(Eigen::VectorXd::Ones(r));
        const double lsum = lambda.sum();
        if (!(lsum > 0.0)) continue;
        lambda /= lsum;
        if ((lambda.array() < -1e-10).any()) continue;
        Eigen::VectorXd d = Eigen::VectorXd::Zero(gs.front().size());
        for (int a = 0; a < r; ++a) d += lambda(a) * gs[support[a]];
        const double sq = d.squaredNorm();
        if (sq < best_sq) {
            best_sq = sq;
            best = d;
        }
    }
    return best;
}

struct BestPoint {
    double f = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x;
    bool feasible = false;

    void offer(const ObjectiveEvaluation& ev) {
        if (!ev.feasible && feasible) return;
        if ((ev.feasible && !feasible) || ev.f_value < f) {
            f = ev.f_value;
            x = ev.p_s;
            feasible = ev.feasible;
        }
    }
};

// generalized-subgradient descent to the nearest Clarke-stationary point;
// near-active components within `delta` of the max contribute
void polish(const Evaluator& eval, const FeasiblePolytope& poly, BestPoint& best,
            const MinimizeOptions& opts, long long& eval_count,
            std::vector<std::pair<Eigen::VectorXd, double>>& trace) {
    if (!best.feasible) return;
    const double delta = 2e-3;
    Eigen::VectorXd x = best.x;
    ObjectiveEvaluation at = eval(x);
    ++eval_count;
    for (int it = 0; it < 120; ++it) {
        std::vector<Eigen::VectorXd> gs;
        for (int k = 0; k < at.components.size(); ++k)
            if (at.components(k) >= at.f_value - delta)
                gs.push_back(active_gradient(eval, at, k, opts.fd_step, eval_count));
        const Eigen::VectorXd d = min_norm_element(gs);
        const double nd = d.norm();
        if (nd < 1e-7) break;
        double step = 0.2;
        bool improved = false;
        while (step > 1e-7) {
            const Eigen::VectorXd y = project(poly, x - (step / nd) * d);
            ObjectiveEvaluation ey = eval(y);
            ++eval_count;
            if (ey.feasible && ey.f_value < at.f_value - 1e-12) {
                x = y;
                at = ey;
                best.offer(ey);
                trace.emplace_back(y, ey.f_value);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
}

}  // namespace

OptimizationResult minimize(const DispatchProblem& prob, const Eigen::VectorXd& start,
                            const MinimizeOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const Evaluator eval(prob);
    const FeasiblePolytope poly = build_polytope(prob);
    if (start.size() != poly.dim())
        throw std::invalid_argument("start vector has wrong dimension");
    if (!start.allFinite()) throw std::invalid_argument("start vector must be finite");

    OptimizationResult result;
    long long eval_count = 0;
    Eigen::VectorXd x = project(poly, start);
    BestPoint best;
    ObjectiveEvaluation ev = eval(x);
    ++eval_count;
    best.offer(ev);
    result.trace.emplace_back(x, ev.f_value);
    result.termination = "max-iterations";

    int stalled = 0;
    for (int t = 1; t <= opts.max_iter && poly.dim() > 0; ++t) {
        const Eigen::VectorXd g = active_gradient(eval, ev, ev.argmax_line, opts.fd_step, eval_count);
        const double gn = g.norm();
        if (gn < 1e-14) {
            result.termination = "zero-subgradient";
            break;
        }
        x = project(poly, x - (opts.step_scale / std::sqrt(double(t))) * g / gn);
        ev = eval(x);
        ++eval_count;
        result.trace.emplace_back(x, ev.f_value);

        const double prev_best = best.f;
        best.offer(ev);
        if (best.feasible && best.f < prev_best - opts.tol)
            stalled = 0;
        else if (++stalled >= opts.patience) {
            result.termination = "stalled";
            break;
        }
    }

    if (opts.polish && poly.dim() > 0) polish(eval, poly, best, opts, eval_count, result.trace);

    result.p_s_star = best.x;
    result.f_star = best.f;
    result.feasible = best.feasible;
    result.supply = full_supply(prob, best.x);
    result.evaluations = eval_count;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

OptimizationResult minimize_multi(const DispatchProblem& prob,
                                  const std::vector<Eigen::VectorXd>& starts,
                                  const MinimizeOptions& opts) {
    if (starts.empty()) throw std::invalid_argument("minimize_multi: no starts given");
    OptimizationResult best;
    bool have = false;
    for (const auto& s : starts) {
        OptimizationResult r = minimize(prob, s, opts);
        if (!have || (r.feasible && !best.feasible) ||
            (r.feasible == best.feasible && r.f_star < best.f_star)) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

OptimizationResult grid_minimize(const DispatchProblem& prob, int steps_per_dim, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const FeasiblePolytope poly = build_polytope(prob);
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const int d = poly.dim();

    struct Local {
        double f = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
        long long evals = 0;
    };
    auto lex_less = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (int i = 0; i < a.size(); ++i) {
            if (a(i) < b(i)) return true;
            if (a(i) > b(i)) return false;
        }
        return false;
    };

    std::vector<Local> locals(threads);
    std::vector<std::thread> pool;
    const int span = d == 0 ? 1 : steps_per_dim;
    for (int w = 0; w < threads; ++w) {
        const int lo = static_cast<int>(static_cast<long long>(span) * w / threads);
        const int hi = static_cast<int>(static_cast<long long>(span) * (w + 1) / threads);
        if (lo >= hi) continue;
        pool.emplace_back([&, w, lo, hi] {
            const Evaluator eval(prob);
            Local& local = locals[w];
            grid_range(poly, steps_per_dim, lo, hi, [&](const Eigen::VectorXd& p) {
                ObjectiveEvaluation ev = eval(p);
                ++local.evals;
                if (!ev.feasible) return;
                if (ev.f_value < local.f ||
                    (ev.f_value == local.f && lex_less(p, local.x))) {
                    local.f = ev.f_value;
                    local.x = p;
                }
            });
        });
    }
    for (auto& th : pool) th.join();

    OptimizationResult result;
    result.termination = "grid-exhausted";
    for (const auto& local : locals) {
        result.evaluations += local.evals;
        if (local.x.size() == 0) continue;
        if (result.p_s_star.size() == 0 || local.f < result.f_star ||
            (local.f == result.f_star && lex_less(local.x, result.p_s_star))) {
            result.f_star = local.f;
            result.p_s_star = local.x;
            result.feasible = true;
        }
    }
    if (!result.feasible) throw ValidationError("grid search found no feasible lattice member");
    result.supply = full_supply(prob, result.p_s_star);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace gridrisk
