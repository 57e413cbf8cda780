#include "gridrisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace gridrisk {

std::string format_fixed(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

std::string format_prob(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", value);
    return buf;
}

namespace {

LineReportRow make_row(const DispatchProblem& prob, const ObjectiveEvaluation& ev, int k) {
    const PowerNetwork& net = prob.network;
    LineReportRow row;
    const auto [i, j] = net.line_label(k);
    row.i = i;
    row.j = j;
    row.abs_angle = ev.angle_abs(k);
    row.sigma = ev.sigma(k);
    row.f_component = ev.components(k);
    row.flow_bound = net.capacity(k) * std::sin(std::min(row.f_component, M_PI / 2.0));
    const LineRisk risk = line_risk(ev.angle_abs(k), ev.sigma(k), ev.f_value, prob.r_epsilon);
    row.f_a = risk.f_a;
    row.f_b = risk.f_b;
    row.p_out_bound = risk.p_out_bound_global.value_or(risk.p_out_bound_direct);
    return row;
}

bool row_order(const LineReportRow& a, const LineReportRow& b) {
    if (a.f_component != b.f_component) return a.f_component > b.f_component;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

}  // namespace

std::vector<LineReportRow> build_report(const DispatchProblem& prob,
                                        const ObjectiveEvaluation& ev) {
    if (!ev.feasible)
        throw ValidationError("cannot report an infeasible evaluation: " +
                              std::to_string(ev.f_value));
    std::vector<LineReportRow> rows;
    rows.reserve(prob.network.line_count);
    for (int k = 0; k < prob.network.line_count; ++k) rows.push_back(make_row(prob, ev, k));
    std::sort(rows.begin(), rows.end(), row_order);
    return rows;
}

void write_report_csv(std::ostream& out, const std::vector<LineReportRow>& rows,
                      const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "i,j,abs_angle,sigma,f_component,flow_bound,f_a,f_b,p_out_bound\n";
    for (const auto& r : rows) {
        out << r.i << ',' << r.j << ',' << format_fixed(r.abs_angle) << ','
            << format_fixed(r.sigma) << ',' << format_fixed(r.f_component) << ','
            << format_fixed(r.flow_bound) << ',' << format_prob(r.f_a) << ','
            << format_prob(r.f_b) << ',' << format_prob(r.p_out_bound) << "\n";
    }
}

std::vector<CompareRow> build_comparison(const DispatchProblem& prob,
                                         const ObjectiveEvaluation& baseline,
                                         const ObjectiveEvaluation& optimized) {
    std::vector<LineReportRow> without_rows = build_report(prob, baseline);
    std::vector<LineReportRow> with_rows = build_report(prob, optimized);
    std::vector<CompareRow> rows;
    rows.reserve(without_rows.size());
    // sorted by the baseline side, largest f_component first
    for (const auto& w : without_rows) {
        CompareRow row;
        row.i = w.i;
        row.j = w.j;
        row.without = w;
        for (const auto& c : with_rows)
            if (c.i == w.i && c.j == w.j) row.with = c;
        rows.push_back(row);
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<CompareRow>& rows,
                          const std::string& comment) {
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "i,j,control,abs_angle,sigma,f_component,flow_bound,f_a,f_b,p_out_bound\n";
    for (const auto& r : rows) {
        for (const auto* side : {&r.without, &r.with}) {
            out << r.i << ',' << r.j << ',' << (side == &r.without ? "without" : "with") << ','
                << format_fixed(side->abs_angle) << ',' << format_fixed(side->sigma) << ','
                << format_fixed(side->f_component) << ',' << format_fixed(side->flow_bound) << ','
                << format_prob(side->f_a) << ',' << format_prob(side->f_b) << ','
                << format_prob(side->p_out_bound) << "\n";
        }
    }
}

std::vector<LineReportRow> parse_report_csv(std::istream& in) {
    std::vector<LineReportRow> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 9) throw ParseError("report CSV row with wrong column count");
        LineReportRow r;
        r.i = std::stoi(cells[0]);
        r.j = std::stoi(cells[1]);
        r.abs_angle = std::stod(cells[2]);
        r.sigma = std::stod(cells[3]);
        r.f_component = std::stod(cells[4]);
        r.flow_bound = std::stod(cells[5]);
        r.f_a = std::stod(cells[6]);
        r.f_b = std::stod(cells[7]);
        r.p_out_bound = std::stod(cells[8]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace gridrisk
