#pragma once

// Dense two-phase simplex for small linear programs.
//
// Programs are stated over variables with lower bounds only (0 by default,
// -infinity for free variables) and a list of <=, = or >= rows. The solver
// shifts bounded variables to zero, splits free ones into a difference of two
// nonnegative columns, and runs a tableau simplex with Dantzig pricing,
// falling back to Bland's rule once the iteration count passes 2*(m+n).

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fundbench::lp {

enum class Sense { Maximize, Minimize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

/// Lower bound marking a free variable.
inline constexpr double kFree = -std::numeric_limits<double>::infinity();

/// Pivot and reduced-cost tolerance.
inline constexpr double kPivotTolerance = 1e-9;
/// Tolerance for reported constraint satisfaction and phase-one feasibility.
inline constexpr double kFeasibilityTolerance = 1e-7;

struct Constraint {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Thrown for dimension mismatches or non-finite data. Always a caller bug.
class MalformedProgram : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LinearProgram {
public:
    LinearProgram() = default;
    LinearProgram(Sense sense, std::vector<double> objective);

    Sense sense() const { return sense_; }
    std::size_t num_vars() const { return objective_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }

    const std::vector<double>& objective() const { return objective_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<double>& lower_bounds() const { return lower_bounds_; }
    double lower_bound(std::size_t var) const { return lower_bounds_.at(var); }

    void set_objective(Sense sense, std::vector<double> objective);
    void add_constraint(std::vector<double> coeffs, Relation relation, double rhs);
    void set_lower_bound(std::size_t var, double bound);

    /// Throws MalformedProgram when a row has the wrong length or any entry
    /// is non-finite (lower bounds may be kFree).
    void validate() const;

    double evaluate(std::span<const double> x) const;

private:
    Sense sense_ = Sense::Maximize;
    std::vector<double> objective_;
    std::vector<Constraint> constraints_;
    std::vector<double> lower_bounds_;
};

struct LpSolution {
    Status status = Status::Infeasible;
    std::optional<double> objective_value;  // present iff optimal
    std::vector<double> primal_values;      // empty unless optimal
    std::size_t iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

std::string_view to_string(Status status);

/// Solves `lp`. Deterministic: identical programs give bit-identical results.
LpSolution solve(const LinearProgram& lp);

/// Optimizes `lp`, then optimizes `secondary_objective` (in the same sense)
/// over the primary optimal face. The primary value is held within 1e-9
/// relative of its optimum. `objective_value` of the result is the primary
/// objective evaluated at the returned point.
LpSolution solve_lexicographic(const LinearProgram& lp, std::span<const double> secondary_objective);

}  // namespace fundbench::lp
