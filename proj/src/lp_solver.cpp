#include "fundbench/lp_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace fundbench::lp {

LinearProgram::LinearProgram(Sense sense, std::vector<double> objective)
    : sense_(sense), objective_(std::move(objective)), lower_bounds_(objective_.size(), 0.0) {}

void LinearProgram::set_objective(Sense sense, std::vector<double> objective) {
    if (objective.size() != objective_.size()) {
        throw MalformedProgram("objective length changed from " + std::to_string(objective_.size()) +
                               " to " + std::to_string(objective.size()));
    }
    sense_ = sense;
    objective_ = std::move(objective);
}

void LinearProgram::add_constraint(std::vector<double> coeffs, Relation relation, double rhs) {
    constraints_.push_back(Constraint{std::move(coeffs), relation, rhs});
}

void LinearProgram::set_lower_bound(std::size_t var, double bound) {
    lower_bounds_.at(var) = bound;
}

void LinearProgram::validate() const {
    const std::size_t n = num_vars();
    if (lower_bounds_.size() != n) {
        throw MalformedProgram("lower bound vector has length " + std::to_string(lower_bounds_.size()) +
                               ", expected " + std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(objective_[j])) {
            throw MalformedProgram("non-finite objective coefficient at variable " + std::to_string(j));
        }
        const double lb = lower_bounds_[j];
        if (std::isnan(lb) || (std::isinf(lb) && lb > 0)) {
            throw MalformedProgram("invalid lower bound at variable " + std::to_string(j));
        }
    }
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        const auto& row = constraints_[i];
        if (row.coeffs.size() != n) {
            throw MalformedProgram("constraint " + std::to_string(i) + " has " +
                                   std::to_string(row.coeffs.size()) + " coefficients, expected " +
                                   std::to_string(n));
        }
        if (!std::isfinite(row.rhs)) {
            throw MalformedProgram("non-finite rhs in constraint " + std::to_string(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(row.coeffs[j])) {
                throw MalformedProgram("non-finite coefficient in constraint " + std::to_string(i) +
                                       ", variable " + std::to_string(j));
            }
        }
    }
}

double LinearProgram::evaluate(std::span<const double> x) const {
    double value = 0.0;
    for (std::size_t j = 0; j < objective_.size(); ++j) value += objective_[j] * x[j];
    return value;
}

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ColumnMap {
    Eigen::Index plus = 0;
    Eigen::Index minus = -1;  // only for free variables
    double shift = 0.0;
};

enum class Outcome { Optimal, Unbounded };

class TableauSimplex {
public:
    explicit TableauSimplex(const LinearProgram& lp) : lp_(lp) { build(); }

    LpSolution run() {
        LpSolution out;

        // Phase one: maximize minus the sum of artificials.
        if (artificial_begin_ < num_cols_) {
            load_phase_one_objective();
            iterate(out.iterations);  // bounded below by zero, never unbounded
            const double infeasibility = -tableau_(rows_, rhs_col());
            if (infeasibility > kFeasibilityTolerance * rhs_scale_) {
                out.status = Status::Infeasible;
                return out;
            }
            drive_out_artificials();
        }

        load_phase_two_objective();
        if (iterate(out.iterations) == Outcome::Unbounded) {
            out.status = Status::Unbounded;
            return out;
        }

        std::vector<double> standard(static_cast<std::size_t>(num_cols_), 0.0);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            standard[static_cast<std::size_t>(basis_[i])] = tableau_(i, rhs_col());
        }
        out.primal_values.resize(lp_.num_vars());
        for (std::size_t k = 0; k < lp_.num_vars(); ++k) {
            const auto& col = columns_[k];
            double value = col.shift + standard[static_cast<std::size_t>(col.plus)];
            if (col.minus >= 0) value -= standard[static_cast<std::size_t>(col.minus)];
            out.primal_values[k] = value;
        }
        out.status = Status::Optimal;
        out.objective_value = lp_.evaluate(out.primal_values);
        return out;
    }

private:
    Eigen::Index rhs_col() const { return num_cols_; }

    void build() {
        const std::size_t n = lp_.num_vars();
        columns_.resize(n);
        Eigen::Index structural = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double lb = lp_.lower_bound(k);
            columns_[k].plus = structural++;
            if (std::isinf(lb)) {
                columns_[k].minus = structural++;
            } else {
                columns_[k].shift = lb;
            }
        }

        const auto& rows = lp_.constraints();
        rows_ = static_cast<Eigen::Index>(rows.size());

        std::vector<Relation> relation(rows.size());
        std::vector<double> sign(rows.size(), 1.0);
        std::vector<double> rhs(rows.size());
        Eigen::Index slacks = 0;
        Eigen::Index artificials = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double b = rows[i].rhs;
            for (std::size_t k = 0; k < n; ++k) b -= rows[i].coeffs[k] * columns_[k].shift;
            relation[i] = rows[i].relation;
            if (b < 0.0) {
                sign[i] = -1.0;
                b = -b;
                if (relation[i] == Relation::LessEqual) {
                    relation[i] = Relation::GreaterEqual;
                } else if (relation[i] == Relation::GreaterEqual) {
                    relation[i] = Relation::LessEqual;
                }
            }
            rhs[i] = b;
            if (relation[i] != Relation::Equal) ++slacks;
            if (relation[i] != Relation::LessEqual) ++artificials;
        }

        slack_begin_ = structural;
        artificial_begin_ = structural + slacks;
        num_cols_ = artificial_begin_ + artificials;
        tableau_ = Tableau::Zero(rows_ + 1, num_cols_ + 1);
        basis_.assign(static_cast<std::size_t>(rows_), 0);

        Eigen::Index next_slack = slack_begin_;
        Eigen::Index next_artificial = artificial_begin_;
        rhs_scale_ = 1.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            for (std::size_t k = 0; k < n; ++k) {
                const double a = sign[i] * rows[i].coeffs[k];
                tableau_(r, columns_[k].plus) += a;
                if (columns_[k].minus >= 0) tableau_(r, columns_[k].minus) -= a;
            }
            tableau_(r, rhs_col()) = rhs[i];
            rhs_scale_ = std::max(rhs_scale_, rhs[i]);
            switch (relation[i]) {
                case Relation::LessEqual:
                    tableau_(r, next_slack) = 1.0;
                    basis_[i] = next_slack++;
                    break;
                case Relation::GreaterEqual:
                    tableau_(r, next_slack++) = -1.0;
                    tableau_(r, next_artificial) = 1.0;
                    basis_[i] = next_artificial++;
                    break;
                case Relation::Equal:
                    tableau_(r, next_artificial) = 1.0;
                    basis_[i] = next_artificial++;
                    break;
            }
        }
        bland_after_ = 2 * static_cast<std::size_t>(rows_ + num_cols_);
        iteration_limit_ = 50 * static_cast<std::size_t>(rows_ + num_cols_) + 1000;
    }

    void load_phase_one_objective() {
        auto z = tableau_.row(rows_);
        z.setZero();
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] >= artificial_begin_) z -= tableau_.row(i);
        }
        for (Eigen::Index j = artificial_begin_; j < num_cols_; ++j) z(j) = 0.0;
    }

    void load_phase_two_objective() {
        auto z = tableau_.row(rows_);
        z.setZero();
        const double direction = lp_.sense() == Sense::Maximize ? 1.0 : -1.0;
        const auto& c = lp_.objective();
        for (std::size_t k = 0; k < columns_.size(); ++k) {
            z(columns_[k].plus) = -direction * c[k];
            if (columns_[k].minus >= 0) z(columns_[k].minus) = direction * c[k];
        }
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double f = z(basis_[i]);
            if (f != 0.0) {
                z -= f * tableau_.row(i);
                z(basis_[i]) = 0.0;
            }
        }
    }

    // Artificials left in the basis at zero level are swapped for any
    // structural or slack column with a usable entry; rows with none are
    // redundant and keep their artificial, which can never leave or grow.
    void drive_out_artificials() {
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[i] < artificial_begin_) continue;
            Eigen::Index best = -1;
            double best_abs = kPivotTolerance;
            for (Eigen::Index j = 0; j < artificial_begin_; ++j) {
                const double a = std::abs(tableau_(i, j));
                if (a > best_abs) {
                    best_abs = a;
                    best = j;
                }
            }
            if (best >= 0) pivot(i, best);
        }
    }

    Outcome iterate(std::size_t& iterations) {
        for (;;) {
            const bool bland = iterations >= bland_after_;
            const Eigen::Index enter = choose_entering(bland);
            if (enter < 0) return Outcome::Optimal;
            const Eigen::Index leave = choose_leaving(enter);
            if (leave < 0) return Outcome::Unbounded;
            pivot(leave, enter);
            if (++iterations > iteration_limit_) {
                throw std::runtime_error("simplex iteration limit exceeded");
            }
        }
    }

    Eigen::Index choose_entering(bool bland) const {
        Eigen::Index best = -1;
        double best_value = -kPivotTolerance;
        for (Eigen::Index j = 0; j < artificial_begin_; ++j) {
            const double d = tableau_(rows_, j);
            if (d < best_value) {
                best = j;
                if (bland) break;
                best_value = d;
            }
        }
        return best;
    }

    Eigen::Index choose_leaving(Eigen::Index enter) const {
        Eigen::Index best = -1;
        double best_ratio = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double a = tableau_(i, enter);
            if (a <= kPivotTolerance) continue;
            const double ratio = tableau_(i, rhs_col()) / a;
            if (best < 0) {
                best = i;
                best_ratio = ratio;
                continue;
            }
            const double slack = 1e-12 * (1.0 + std::abs(best_ratio));
            if (ratio < best_ratio - slack ||
                (ratio <= best_ratio + slack && basis_[i] < basis_[best])) {
                best = i;
                best_ratio = ratio;
            }
        }
        return best;
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        tableau_.row(r) /= tableau_(r, c);
        tableau_(r, c) = 1.0;
        for (Eigen::Index i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = tableau_(i, c);
            if (f == 0.0) continue;
            tableau_.row(i) -= f * tableau_.row(r);
            tableau_(i, c) = 0.0;
        }
        for (Eigen::Index i = 0; i < rows_; ++i) {
            double& b = tableau_(i, rhs_col());
            if (b < 0.0 && b > -kPivotTolerance) b = 0.0;
        }
        basis_[r] = c;
    }

    const LinearProgram& lp_;
    std::vector<ColumnMap> columns_;
    Tableau tableau_;
    std::vector<Eigen::Index> basis_;
    Eigen::Index rows_ = 0;
    Eigen::Index num_cols_ = 0;
    Eigen::Index slack_begin_ = 0;
    Eigen::Index artificial_begin_ = 0;
    double rhs_scale_ = 1.0;
    std::size_t bland_after_ = 0;
    std::size_t iteration_limit_ = 0;
};

}  // namespace

LpSolution solve(const LinearProgram& lp) {
    lp.validate();
    return TableauSimplex(lp).run();
}

LpSolution solve_lexicographic(const LinearProgram& lp, std::span<const double> secondary_objective) {
    lp.validate();
    if (secondary_objective.size() != lp.num_vars()) {
        throw MalformedProgram("secondary objective has length " + std::to_string(secondary_objective.size()) +
                               ", expected " + std::to_string(lp.num_vars()));
    }
    LpSolution first = solve(lp);
    if (!first.optimal()) return first;

    const double target = *first.objective_value;
    const double band = 1e-9 * (1.0 + std::abs(target));
    LinearProgram restricted = lp;
    if (lp.sense() == Sense::Maximize) {
        restricted.add_constraint(lp.objective(), Relation::GreaterEqual, target - band);
    } else {
        restricted.add_constraint(lp.objective(), Relation::LessEqual, target + band);
    }
    restricted.set_objective(lp.sense(), {secondary_objective.begin(), secondary_objective.end()});

    LpSolution second = solve(restricted);
    second.iterations += first.iterations;
    if (second.status == Status::Infeasible) {
        // Only reachable through round-off on the primary optimum.
        first.iterations = second.iterations;
        return first;
    }
    if (second.optimal()) second.objective_value = lp.evaluate(second.primal_values);
    return second;
}

}  // namespace fundbench::lp
