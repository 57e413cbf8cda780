#include "gridrisk/equilibrium.hpp"
#include "gridrisk/fixtures.hpp"
#include "gridrisk/montecarlo.hpp"
#include "gridrisk/network.hpp"
#include "gridrisk/optimizer.hpp"
#include "gridrisk/report.hpp"
#include "gridrisk/risk.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace gridrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

Eigen::VectorXd parse_vector(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        values.push_back(std::stod(cell));
    }
    Eigen::VectorXd v(values.size());
    for (size_t i = 0; i < values.size(); ++i) v(i) = values[i];
    return v;
}

std::vector<Eigen::VectorXd> parse_start_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open start file: " + path);
    std::vector<Eigen::VectorXd> starts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        starts.push_back(parse_vector(line));
    }
    if (starts.empty()) throw ParseError("start file has no vectors: " + path);
    return starts;
}

struct Output {
    std::string path;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) {
            file.open(path);
            if (!file) throw std::runtime_error("cannot open output file: " + path);
        }
        return file;
    }
    std::ofstream file;
};

std::string summarize(const OptimizationResult& r) {
    std::ostringstream os;
    os << "f_star=" << format_fixed(r.f_star) << " p_s_star=";
    for (int i = 0; i < r.p_s_star.size(); ++i)
        os << (i ? "," : "") << format_fixed(r.p_s_star(i));
    os << " supply=";
    for (int i = 0; i < r.supply.size(); ++i) os << (i ? "," : "") << format_fixed(r.supply(i));
    os << " termination=" << r.termination << " evals=" << r.evaluations
       << " wall_s=" << format_fixed(r.wall_seconds);
    return os.str();
}

DispatchProblem load_problem(const std::string& network, double r_epsilon_override) {
    DispatchProblem prob = load_network(network);
    if (r_epsilon_override > 0.0) prob.r_epsilon = r_epsilon_override;
    return prob;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dispatch optimization for stochastic power networks"};
    app.require_subcommand(1);

    std::string network, start_text, multi_start_path, out_path;
    int steps = 150;
    int max_iter = 400;
    double tol = 1e-5;
    double step_scale = 0.5;
    double r_epsilon = -1.0;
    std::uint64_t seed = 0;
    double dt = 1e-3, horizon = 60.0, burn_in = 0.0;
    int paths = 1;
    std::string model = "linearized";

    auto add_common = [&](CLI::App* cmd, bool needs_network = true) {
        if (needs_network)
            cmd->add_option("--network", network, "network file path")->required();
        cmd->add_option("--out", out_path, "output file (default standard output)");
        cmd->add_option("--r-epsilon", r_epsilon, "override the risk multiplier")
            ->check(CLI::PositiveNumber);
    };

    auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate the objective at a dispatch");
    add_common(evaluate_cmd);
    evaluate_cmd->add_option("--start", start_text, "decision vector v1,v2,...")->required();

    auto* optimize_cmd = app.add_subcommand("optimize", "minimize the worst-line risk");
    add_common(optimize_cmd);
    optimize_cmd->add_option("--start", start_text, "decision vector v1,v2,...");
    optimize_cmd->add_option("--multi-start", multi_start_path, "file with one start per line");
    optimize_cmd->add_option("--max-iter", max_iter, "subgradient iteration cap");
    optimize_cmd->add_option("--tol", tol, "improvement tolerance");
    optimize_cmd->add_option("--step-scale", step_scale, "step schedule scale c");

    auto* grid_cmd = app.add_subcommand("grid", "exhaustive lattice search");
    add_common(grid_cmd);
    grid_cmd->add_option("--steps", steps, "lattice points per dimension");

    auto* prop_cmd = app.add_subcommand("proportional", "evaluate the proportional baseline");
    add_common(prop_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "Euler-Maruyama validation run");
    add_common(simulate_cmd);
    simulate_cmd->add_option("--start", start_text, "decision vector v1,v2,...");
    simulate_cmd->add_option("--seed", seed, "random seed");
    simulate_cmd->add_option("--dt", dt, "time step (s)");
    simulate_cmd->add_option("--horizon", horizon, "total simulated time (s)");
    simulate_cmd->add_option("--burn-in", burn_in, "discarded initial time (s)");
    simulate_cmd->add_option("--paths", paths, "number of sample paths");
    simulate_cmd->add_option("--model", model, "linearized | nonlinear");

    auto* compare_cmd = app.add_subcommand("compare", "proportional baseline vs optimized dispatch");
    add_common(compare_cmd);
    compare_cmd->add_option("--start", start_text, "optimizer start vector");
    compare_cmd->add_option("--max-iter", max_iter, "subgradient iteration cap");
    compare_cmd->add_option("--tol", tol, "improvement tolerance");
    compare_cmd->add_option("--step-scale", step_scale, "step schedule scale c");

    auto* thresholds_cmd = app.add_subcommand("thresholds", "print the (epsilon, r_epsilon) table");
    thresholds_cmd->add_option("--out", out_path, "output file (default standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    Output out{out_path};
    try {
        if (thresholds_cmd->parsed()) {
            auto& os = out.stream();
            os << "epsilon,r_epsilon\n";
            for (const auto& [eps, r] : ThresholdTable::rows) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f,%.2f\n", eps, r);
                os << buf;
            }
            return kExitOk;
        }

        if (evaluate_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            const Eigen::VectorXd p_s = parse_vector(start_text);
            const FeasiblePolytope poly = build_polytope(prob);
            const std::string violated = poly.violation(p_s);
            if (!violated.empty()) {
                std::cerr << "dispatch outside the feasible set: " << violated << "\n";
                return kExitInfeasible;
            }
            const ObjectiveEvaluation ev = evaluate(prob, p_s);
            if (!ev.feasible) {
                std::cerr << "no strictly-stable synchronous state at this dispatch "
                          << "(line sine magnitude reaches "
                          << ev.f_value - M_PI / 2.0 + 1.0 << ")\n";
                return kExitInfeasible;
            }
            write_report_csv(out.stream(), build_report(prob, ev),
                             "f=" + format_fixed(ev.f_value));
            return kExitOk;
        }

        if (optimize_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            MinimizeOptions opts;
            opts.max_iter = max_iter;
            opts.tol = tol;
            opts.step_scale = step_scale;
            std::vector<Eigen::VectorXd> starts;
            if (!multi_start_path.empty())
                starts = parse_start_file(multi_start_path);
            else if (!start_text.empty())
                starts.push_back(parse_vector(start_text));
            else
                starts.push_back(proportional_dispatch(prob).head(prob.decision_dim()));
            const OptimizationResult r = minimize_multi(prob, starts, opts);
            if (!r.feasible) {
                std::cerr << "optimizer found no feasible dispatch\n";
                return kExitInfeasible;
            }
            const ObjectiveEvaluation ev = evaluate(prob, r.p_s_star);
            write_report_csv(out.stream(), build_report(prob, ev), summarize(r));
            return kExitOk;
        }

        if (grid_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            const OptimizationResult r = grid_minimize(prob, steps);
            const ObjectiveEvaluation ev = evaluate(prob, r.p_s_star);
            write_report_csv(out.stream(), build_report(prob, ev), summarize(r));
            return kExitOk;
        }

        if (prop_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            const Eigen::VectorXd p = proportional_dispatch(prob);
            const ObjectiveEvaluation ev = evaluate(prob, p.head(prob.decision_dim()));
            if (!ev.feasible) {
                std::cerr << "proportional dispatch has no strictly-stable synchronous state\n";
                return kExitInfeasible;
            }
            write_report_csv(out.stream(), build_report(prob, ev),
                             "f=" + format_fixed(ev.f_value));
            return kExitOk;
        }

        if (simulate_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            Eigen::VectorXd p_s = start_text.empty()
                                      ? proportional_dispatch(prob).head(prob.decision_dim()).eval()
                                      : parse_vector(start_text);
            SimulationConfig cfg;
            cfg.dt = dt;
            cfg.horizon = horizon;
            cfg.burn_in = burn_in;
            cfg.paths = paths;
            cfg.seed = seed;
            if (model == "nonlinear")
                cfg.model = SimModel::nonlinear;
            else if (model != "linearized")
                throw CLI::ValidationError("--model must be linearized or nonlinear");
            const SimulationReport rep = simulate(prob, p_s, cfg);
            auto& os = out.stream();
            os << "# seed=" << cfg.seed << " dt=" << cfg.dt << " horizon=" << cfg.horizon
               << " burn_in=" << cfg.burn_in << " paths=" << cfg.paths << " model="
               << (cfg.model == SimModel::linearized ? "linearized" : "nonlinear") << "\n";
            os << "i,j,empirical_std,std_half_width,exit_count,samples,effective_samples,"
                  "exit_frequency,exit_half_width\n";
            for (int k = 0; k < prob.network.line_count; ++k) {
                const auto [i, j] = prob.network.line_label(k);
                const LineSimStats& ls = rep.lines[k];
                os << i << ',' << j << ',' << format_fixed(ls.empirical_std) << ','
                   << format_prob(ls.std_half_width) << ',' << ls.exit_count << ',' << ls.samples
                   << ',' << format_fixed(ls.effective_samples) << ','
                   << format_prob(ls.exit_frequency) << ',' << format_prob(ls.exit_half_width)
                   << "\n";
            }
            return kExitOk;
        }

        if (compare_cmd->parsed()) {
            DispatchProblem prob = load_problem(network, r_epsilon);
            MinimizeOptions opts;
            opts.max_iter = max_iter;
            opts.tol = tol;
            opts.step_scale = step_scale;
            const Eigen::VectorXd prop = proportional_dispatch(prob);
            const ObjectiveEvaluation base = evaluate(prob, prop.head(prob.decision_dim()));
            if (!base.feasible) {
                std::cerr << "proportional dispatch has no strictly-stable synchronous state\n";
                return kExitInfeasible;
            }
            Eigen::VectorXd start = start_text.empty()
                                        ? prop.head(prob.decision_dim()).eval()
                                        : parse_vector(start_text);
            const OptimizationResult r = minimize(prob, start, opts);
            if (!r.feasible) {
                std::cerr << "optimizer found no feasible dispatch\n";
                return kExitInfeasible;
            }
            const ObjectiveEvaluation opt = evaluate(prob, r.p_s_star);
            write_comparison_csv(out.stream(), build_comparison(prob, base, opt), summarize(r));
            return kExitOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
