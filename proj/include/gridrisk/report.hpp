#pragma once

#include "gridrisk/network.hpp"
#include "gridrisk/optimizer.hpp"
#include "gridrisk/risk.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gridrisk {

/// One line of the per-line output table: rows sorted by f_component
/// descending, ties by (i, j).
struct LineReportRow {
    int i = 0, j = 0;  // external node ids
    double abs_angle = 0.0;
    double sigma = 0.0;
    double f_component = 0.0;
    double flow_bound = 0.0;  // L_ij sin(min(f_component, pi/2))
    double f_a = 0.0;
    double f_b = 0.0;
    double p_out_bound = 0.0;  // f*-anchored global bound
};

/// Builds the sorted report for a feasible evaluation; the global exit
/// bound is anchored at the evaluation's own objective value.
std::vector<LineReportRow> build_report(const DispatchProblem& prob,
                                        const ObjectiveEvaluation& ev);

void write_report_csv(std::ostream& out, const std::vector<LineReportRow>& rows,
                      const std::string& comment = {});

/// Paired without/with table used by the compare command.
struct CompareRow {
    int i = 0, j = 0;
    LineReportRow without;
    LineReportRow with;
};

std::vector<CompareRow> build_comparison(const DispatchProblem& prob,
                                         const ObjectiveEvaluation& baseline,
                                         const ObjectiveEvaluation& optimized);

void write_comparison_csv(std::ostream& out, const std::vector<CompareRow>& rows,
                          const std::string& comment = {});

/// Parses write_report_csv output back (used by the round-trip tests).
std::vector<LineReportRow> parse_report_csv(std::istream& in);

std::string format_fixed(double value);  // 4 decimal places
std::string format_prob(double value);   // scientific, 3 significant digits

}  // namespace gridrisk
