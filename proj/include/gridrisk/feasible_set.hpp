#pragma once

#include "gridrisk/network.hpp"

#include <Eigen/Dense>

#include <functional>

namespace gridrisk {

/// The polytope of feasible decision vectors: prefix-sum lower bounds
/// b1 <= A1 p_s, the box 0 <= p_s <= b2, and the balance-closing last
/// supply within its ceiling. A1 is lower-triangular ones, so row i of
/// A1 p_s is the prefix sum p_1 + ... + p_i.
struct FeasiblePolytope {
    Eigen::MatrixXd A1;
    Eigen::VectorXd b1;
    Eigen::VectorXd b2;
    double p_sum = 0.0;        // total demand = total supply
    double last_ceiling = 0.0;  // ceiling of the induced supply node

    int dim() const { return static_cast<int>(b2.size()); }
    double induced_last(const Eigen::VectorXd& p_s) const { return p_sum - p_s.sum(); }
    bool contains(const Eigen::VectorXd& p_s, double tol = 1e-9) const;
    /// Human-readable description of the first violated constraint,
    /// empty when p_s is a member.
    std::string violation(const Eigen::VectorXd& p_s, double tol = 1e-9) const;
};

/// Throws ValidationError if the polytope would be empty.
FeasiblePolytope build_polytope(const DispatchProblem& prob);

/// Euclidean projection onto the polytope, exact via enumeration of
/// linearly independent active sets (the dimension is small by
/// construction). Idempotent.
Eigen::VectorXd project(const FeasiblePolytope& poly, const Eigen::VectorXd& q);

/// Streams the members of the lattice with `steps_per_dim` points per
/// dimension over [0, b2(i)] in lexicographic order.
void grid(const FeasiblePolytope& poly, int steps_per_dim,
          const std::function<void(const Eigen::VectorXd&)>& yield);

/// Same lattice restricted to first-coordinate indices [first_lo, first_hi),
/// for partitioning across workers.
void grid_range(const FeasiblePolytope& poly, int steps_per_dim, int first_lo, int first_hi,
                const std::function<void(const Eigen::VectorXd&)>& yield);

}  // namespace gridrisk
