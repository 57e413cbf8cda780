#pragma once

#include "gridrisk/network.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gridrisk {

enum class SimModel { linearized, nonlinear };

struct SimulationConfig {
    double dt = 1e-3;      // seconds
    double horizon = 60.0;  // seconds, total integration time
    double burn_in = 0.0;  // seconds discarded before statistics
    int paths = 1;
    std::uint64_t seed = 0;
    SimModel model = SimModel::linearized;
    int threads = 0;  // 0 = hardware concurrency
};

/// Per-line sample statistics of one simulation run.
struct LineSimStats {
    double empirical_std = 0.0;     // std of the line angle difference
    double std_half_width = 0.0;    // 95% half-width for the std estimate
    long long exit_count = 0;       // samples with |angle difference| >= pi/2
    long long samples = 0;          // post-burn-in samples counted
    double effective_samples = 0.0; // samples adjusted by autocorrelation time
    double exit_frequency = 0.0;
    double exit_half_width = 0.0;   // binomial 95% half-width at effective N
};

struct SimulationReport {
    std::vector<LineSimStats> lines;
    SimulationConfig config;  // echo
    int subsample_stride = 1;
};

/// Integrates the stochastic system at dispatch p_s by Euler-Maruyama.
/// The linearized model runs dx = J x dt + K dv in deviation coordinates;
/// the nonlinear model integrates the swing equations from the synchronous
/// state with the same power-noise injection M^-1 K2 dv on the frequency
/// block. Identical seed and config give an identical report.
SimulationReport simulate(const DispatchProblem& prob, const Eigen::VectorXd& p_s,
                          const SimulationConfig& cfg);

/// Fraction of post-burn-in samples outside the safe set on one line.
double exit_frequency(const SimulationReport& report, int line);

}  // namespace gridrisk
