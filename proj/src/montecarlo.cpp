#include "gridrisk/montecarlo.hpp"

#include "gridrisk/equilibrium.hpp"
#include "gridrisk/linearization.hpp"
#include "gridrisk/optimizer.hpp"

#include <atomic>
#include <functional>
#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace gridrisk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct PathAccumulator {
    // Welford accumulators per line plus a subsampled series for the
    // autocorrelation-time estimate; the series is folded into an
    // effective-sample count when the path finishes.
    int n_lines;
    std::vector<double> mean, m2;
    std::vector<long long> exits;
    long long count = 0;
    std::vector<std::vector<double>> series;  // [line][subsample]
    std::vector<double> effective;            // per line, filled by finish()

    explicit PathAccumulator(int lines) : n_lines(lines), mean(lines, 0.0), m2(lines, 0.0),
                                          exits(lines, 0), series(lines), effective(lines, 0.0) {}

    void add(const Eigen::VectorXd& diff, bool record_series) {
        ++count;
        for (int k = 0; k < n_lines; ++k) {
            const double x = diff(k);
            const double delta = x - mean[k];
            mean[k] += delta / double(count);
            m2[k] += delta * (x - mean[k]);
            if (std::abs(x) >= M_PI / 2.0) ++exits[k];
            if (record_series) series[k].push_back(x);
        }
    }

    void finish(const std::function<double(const std::vector<double>&)>& act) {
        for (int k = 0; k < n_lines; ++k) {
            effective[k] = double(series[k].size()) / act(series[k]);
            series[k].clear();
            series[k].shrink_to_fit();
        }
    }
};

// integrated autocorrelation time, capped at 100 lags
double integrated_act(const std::vector<double>& s) {
    const int n = static_cast<int>(s.size());
    if (n < 8) return 1.0;
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= n;
    if (!(var > 0.0)) return 1.0;
    double tau = 1.0;
    const int max_lag = std::min(100, n / 4);
    for (int lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (int i = 0; i + lag < n; ++i) c += (s[i] - mean) * (s[i + lag] - mean);
        c /= double(n - lag) * var;
        if (c <= 0.0) break;
        tau += 2.0 * c;
    }
    return tau;
}

}  // namespace

SimulationReport simulate(const DispatchProblem& prob, const Eigen::VectorXd& p_s,
                          const SimulationConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
    if (!(cfg.horizon > cfg.burn_in) || cfg.burn_in < 0.0)
        throw std::invalid_argument("simulate: need horizon > burn_in >= 0");
    if (cfg.paths < 1) throw std::invalid_argument("simulate: paths must be >= 1");

    const PowerNetwork& net = prob.network;
    const int n = net.node_count;
    const int n_e = net.line_count;

    const AffineSineMap map = build_affine_map(prob);
    const SynchronousState state = solve_synchronous_state(net, map, p_s);
    if (!state.feasible)
        throw ValidationError("simulate: synchronous state infeasible at this dispatch");

    const Eigen::VectorXd power = full_power_vector(prob, p_s);
    const Eigen::VectorXd noise_gain = net.noise.cwiseQuotient(net.inertia);  // on the omega block
    Eigen::MatrixXd lap_over_m;  // M^-1 * Laplacian, used by the linearized model
    {
        const Eigen::MatrixXd b_mat = incidence_matrix(net);
        Eigen::VectorXd cos_m = state.angle_diffs.array().cos();
        lap_over_m = net.inertia.cwiseInverse().asDiagonal() *
                     (b_mat * net.capacity.asDiagonal() * cos_m.asDiagonal() * b_mat.transpose());
    }
    const Eigen::VectorXd damping_over_m = net.damping.cwiseQuotient(net.inertia);

    const long long total_steps = std::llround(cfg.horizon / cfg.dt);
    const long long burn_steps = std::llround(cfg.burn_in / cfg.dt);
    const int stride = std::max(1, static_cast<int>(std::lround(0.1 / cfg.dt)));
    const double sqrt_dt = std::sqrt(cfg.dt);

    auto run_path = [&](int path_index) {
        std::mt19937_64 rng(splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ull * (path_index + 1))));
        std::normal_distribution<double> gauss(0.0, 1.0);
        PathAccumulator acc(n_e);

        Eigen::VectorXd theta, omega;
        if (cfg.model == SimModel::linearized) {
            theta = Eigen::VectorXd::Zero(n);  // deviations
            omega = Eigen::VectorXd::Zero(n);
        } else {
            theta = state.theta;
            omega = Eigen::VectorXd::Zero(n);
        }
        Eigen::VectorXd xi(n), diff(n_e), flow(n);

        for (long long step = 1; step <= total_steps; ++step) {
            for (int i = 0; i < n; ++i) xi(i) = gauss(rng);
            if (cfg.model == SimModel::linearized) {
                const Eigen::VectorXd dth = omega;
                omega += cfg.dt * (-(lap_over_m * theta) - damping_over_m.cwiseProduct(omega)) +
                         sqrt_dt * noise_gain.cwiseProduct(xi);
                theta += cfg.dt * dth;
            } else {
                flow.setZero();
                for (int k = 0; k < n_e; ++k) {
                    const auto [i, j] = net.lines[k];
                    const double s = net.capacity(k) * std::sin(theta(i) - theta(j));
                    flow(i) += s;
                    flow(j) -= s;
                }
                const Eigen::VectorXd dth = omega;
                omega += cfg.dt * (power - flow - net.damping.cwiseProduct(omega))
                                     .cwiseQuotient(net.inertia) +
                         sqrt_dt * noise_gain.cwiseProduct(xi);
                theta += cfg.dt * dth;
            }
            if ((step & 255) == 0 &&
                !(theta.cwiseAbs().maxCoeff() <= 1e6 && omega.cwiseAbs().maxCoeff() <= 1e6))
                throw NumericalError("simulate: state blow-up (bad dt or unstable system)");

            if (step <= burn_steps) continue;
            for (int k = 0; k < n_e; ++k) {
                const auto [i, j] = net.lines[k];
                const double dev = theta(i) - theta(j);
                diff(k) = cfg.model == SimModel::linearized ? state.angle_diffs(k) + dev : dev;
            }
            acc.add(diff, (step - burn_steps) % stride == 0);
        }
        acc.finish(integrated_act);
        return acc;
    };

    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, cfg.paths);
    std::vector<PathAccumulator> results(cfg.paths, PathAccumulator(n_e));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int p = next.fetch_add(1); p < cfg.paths; p = next.fetch_add(1)) {
                try {
                    results[p] = run_path(p);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);

    // deterministic path-ordered reduction with compensated sums
    SimulationReport report;
    report.config = cfg;
    report.subsample_stride = stride;
    report.lines.resize(n_e);
    for (int k = 0; k < n_e; ++k) {
        double sum = 0.0, sum_c = 0.0;
        double sq = 0.0, sq_c = 0.0;
        long long count = 0, exits = 0;
        double eff = 0.0;
        auto kahan = [](double& s, double& c, double term) {
            const double y = term - c;
            const double t = s + y;
            c = (t - s) - y;
            s = t;
        };
        for (const auto& acc : results) {
            kahan(sum, sum_c, acc.mean[k] * double(acc.count));
            kahan(sq, sq_c, acc.m2[k] + double(acc.count) * acc.mean[k] * acc.mean[k]);
            count += acc.count;
            exits += acc.exits[k];
            eff += acc.effective[k];
        }
        LineSimStats& ls = report.lines[k];
        ls.samples = count;
        ls.exit_count = exits;
        const double mean = sum / double(count);
        const double var = std::max(0.0, sq / double(count) - mean * mean);
        ls.empirical_std = std::sqrt(var);
        ls.effective_samples = std::max(1.0, eff);
        ls.std_half_width = 1.96 * ls.empirical_std / std::sqrt(2.0 * ls.effective_samples);
        ls.exit_frequency = double(exits) / double(count);
        // rule-of-three upper bound when no exits were observed
        ls.exit_half_width =
            exits > 0 ? 1.96 * std::sqrt(ls.exit_frequency * (1.0 - ls.exit_frequency) /
                                         ls.effective_samples)
                      : 3.0 / ls.effective_samples;
    }
    return report;
}

double exit_frequency(const SimulationReport& report, int line) {
    return report.lines.at(line).exit_frequency;
}

}  // namespace gridrisk
