#include "gridrisk/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace gridrisk {

bool FeasiblePolytope::contains(const Eigen::VectorXd& p_s, double tol) const {
    return violation(p_s, tol).empty();
}

std::string FeasiblePolytope::violation(const Eigen::VectorXd& p_s, double tol) const {
    if (p_s.size() != dim()) return "decision vector has wrong length";
    std::ostringstream msg;
    for (int i = 0; i < dim(); ++i) {
        if (p_s(i) < -tol) {
            msg << "p_s[" << i + 1 << "] = " << p_s(i) << " < 0";
            return msg.str();
        }
        if (p_s(i) > b2(i) + tol) {
            msg << "p_s[" << i + 1 << "] = " << p_s(i) << " exceeds ceiling " << b2(i);
            return msg.str();
        }
    }
    const Eigen::VectorXd prefix = A1 * p_s;
    for (int i = 0; i < dim(); ++i) {
        if (prefix(i) < b1(i) - tol) {
            msg << "prefix sum p_1+...+p_" << i + 1 << " = " << prefix(i) << " below bound " << b1(i);
            return msg.str();
        }
    }
    const double last = induced_last(p_s);
    if (last < -tol) {
        msg << "induced last supply " << last << " < 0";
        return msg.str();
    }
    if (last > last_ceiling + tol) {
        msg << "induced last supply " << last << " exceeds ceiling " << last_ceiling;
        return msg.str();
    }
    return {};
}

FeasiblePolytope build_polytope(const DispatchProblem& prob) {
    const int n_plus = prob.network.supply_count;
    const int d = n_plus - 1;
    FeasiblePolytope poly;
    poly.p_sum = prob.total_demand();
    poly.last_ceiling = prob.p_max(n_plus - 1);
    poly.A1 = Eigen::MatrixXd::Zero(d, d);
    poly.b1.resize(d);
    poly.b2.resize(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) poly.A1(i, j) = 1.0;
        // demand not coverable by the ceilings of supplies i+2 .. n+
        double bound = poly.p_sum;
        for (int j = i + 1; j < n_plus; ++j) bound -= prob.p_max(j);
        poly.b1(i) = bound;
        poly.b2(i) = prob.p_max(i);
    }

    const double scale = poly.p_sum / prob.p_max.sum();
    Eigen::VectorXd proportional = scale * prob.p_max.head(d);
    if (d > 0 && !poly.contains(proportional, 1e-7))
        throw ValidationError("feasible polytope is empty: " + poly.violation(proportional, 1e-7));
    if (d == 0 && (poly.p_sum < -1e-9 || poly.p_sum > poly.last_ceiling + 1e-9))
        throw ValidationError("feasible polytope is empty: single supply cannot meet demand");
    return poly;
}

namespace {

// Half-space form G x <= h of all polytope constraints.
void constraint_rows(const FeasiblePolytope& poly, Eigen::MatrixXd& g, Eigen::VectorXd& h) {
    const int d = poly.dim();
    const int rows = 3 * d + 2;
    g.setZero(rows, d);
    h.resize(rows);
    int r = 0;
    for (int i = 0; i < d; ++i, ++r) {  // -x_i <= 0
        g(r, i) = -1.0;
        h(r) = 0.0;
    }
    for (int i = 0; i < d; ++i, ++r) {  // x_i <= b2_i
        g(r, i) = 1.0;
        h(r) = poly.b2(i);
    }
    for (int i = 0; i < d; ++i, ++r) {  // -(prefix_i) <= -b1_i
        g.row(r).head(i + 1).setConstant(-1.0);
        h(r) = -poly.b1(i);
    }
    g.row(r).setConstant(1.0);  // sum <= p_sum  (induced last >= 0)
    h(r) = poly.p_sum;
    ++r;
    g.row(r).setConstant(-1.0);  // sum >= p_sum - last ceiling
    h(r) = -(poly.p_sum - poly.last_ceiling);
}

}  // namespace

Eigen::VectorXd project(const FeasiblePolytope& poly, const Eigen::VectorXd& q) {
    const int d = poly.dim();
    if (q.size() != d) throw std::invalid_argument("project: wrong dimension");
    if (d == 0) return q;
    if (poly.contains(q, 1e-12)) return q;

    Eigen::MatrixXd g;
    Eigen::VectorXd h;
    constraint_rows(poly, g, h);
    const int m = static_cast<int>(h.size());

    // The projection satisfies KKT with some linearly independent active
    // set, and projecting onto that affine subspace reproduces it; so the
    // nearest feasible candidate over all independent subsets is exact.
    double best_dist = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    std::vector<int> subset;
    std::function<void(int)> recurse = [&](int start) {
        if (!subset.empty()) {
            const int r = static_cast<int>(subset.size());
            Eigen::MatrixXd gs(r, d);
            Eigen::VectorXd hs(r);
            for (int a = 0; a < r; ++a) {
                gs.row(a) = g.row(subset[a]);
                hs(a) = h(subset[a]);
            }
            Eigen::MatrixXd gram = gs * gs.transpose();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
            if (lu.rank() == r) {
                const Eigen::VectorXd lambda = lu.solve(gs * q - hs);
                const Eigen::VectorXd x = q - gs.transpose() * lambda;
                if (((g * x - h).array() <= 1e-9).all()) {
                    const double dist = (x - q).squaredNorm();
                    if (dist < best_dist - 1e-15) {
                        best_dist = dist;
                        best = x;
                    }
                }
            }
        }
        if (static_cast<int>(subset.size()) == d) return;
        for (int c = start; c < m; ++c) {
            subset.push_back(c);
            recurse(c + 1);
            subset.pop_back();
        }
    };
    recurse(0);

    if (!best.size()) throw ValidationError("project: polytope appears empty");
    // snap tiny constraint violations from round-off
    for (int i = 0; i < d; ++i) best(i) = std::clamp(best(i), 0.0, poly.b2(i));
    return best;
}

void grid_range(const FeasiblePolytope& poly, int steps_per_dim, int first_lo, int first_hi,
                const std::function<void(const Eigen::VectorXd&)>& yield) {
    if (steps_per_dim < 2) throw std::invalid_argument("grid: steps_per_dim must be >= 2");
    const int d = poly.dim();
    if (d == 0) {
        if (first_lo == 0 && poly.contains(Eigen::VectorXd(0))) yield(Eigen::VectorXd(0));
        return;
    }
    Eigen::VectorXd point(d);
    std::function<void(int)> walk = [&](int dim_idx) {
        const int lo = dim_idx == 0 ? first_lo : 0;
        const int hi = dim_idx == 0 ? first_hi : steps_per_dim;
        for (int k = lo; k < hi; ++k) {
            point(dim_idx) = poly.b2(dim_idx) * double(k) / double(steps_per_dim - 1);
            if (dim_idx + 1 < d)
                walk(dim_idx + 1);
            else if (poly.contains(point))
                yield(point);
        }
    };
    walk(0);
}

void grid(const FeasiblePolytope& poly, int steps_per_dim,
          const std::function<void(const Eigen::VectorXd&)>& yield) {
    grid_range(poly, steps_per_dim, 0, poly.dim() == 0 ? 1 : steps_per_dim, yield);
}

}  // namespace gridrisk
