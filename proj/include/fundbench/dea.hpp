#pragma once

// CCR (constant returns to scale) and BCC (variable returns to scale) data
// envelopment analysis.
//
// For every decision-making unit j0 the engine builds two linear programs:
//
//   envelopment (authoritative score)
//     input:   min theta   s.t. sum_j l_j x_ij <= theta x_ij0,  sum_j l_j y_rj >= y_rj0
//     output:  max phi     s.t. sum_j l_j x_ij <= x_ij0,        sum_j l_j y_rj >= phi y_rj0
//     VRS adds sum_j l_j = 1.
//
//   multiplier (virtual weights; the linearised ratio program)
//     input:   max sum_r u_r y_rj0 (+ w)   s.t. sum_i v_i x_ij0 = 1
//     output:  min sum_i v_i x_ij0 (+ w)   s.t. sum_r u_r y_rj0 = 1
//     both:    sum_r u_r y_rj - sum_i v_i x_ij (+/- w) <= 0 for all j,
//              u_r >= eps, v_i >= eps, w free (VRS only).
//
// Scores are theta* (input) or 1/phi* (output), so they always lie in (0, 1].

#include "fundbench/lp_solver.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fundbench::dea {

enum class ReturnsToScale { Constant, Variable };
enum class Orientation { Input, Output };
enum class SlackStage { Off, Maximize };
enum class Positivity { Strict, Translate };

std::string_view to_string(ReturnsToScale rts);
std::string_view to_string(Orientation orientation);
std::string_view to_string(SlackStage stage);
std::string_view to_string(Positivity positivity);

struct DeaConfig {
    ReturnsToScale returns_to_scale = ReturnsToScale::Constant;
    Orientation orientation = Orientation::Input;
    double epsilon = 1e-6;  // lower bound on every multiplier weight
    SlackStage slack_stage = SlackStage::Off;
    Positivity positivity = Positivity::Strict;

    /// epsilon must lie in [0, 1e-3].
    void validate() const;
};

enum class DataErrorKind { Shape, NonFinite, NonPositive };

class DataError : public std::invalid_argument {
public:
    DataError(DataErrorKind kind, const std::string& what, std::string dmu_id = {}, std::string variable = {})
        : std::invalid_argument(what), kind_(kind), dmu_id_(std::move(dmu_id)), variable_(std::move(variable)) {}

    DataErrorKind kind() const { return kind_; }
    const std::string& dmu_id() const { return dmu_id_; }
    const std::string& variable() const { return variable_; }

private:
    DataErrorKind kind_;
    std::string dmu_id_;
    std::string variable_;
};

/// Inputs are m x n (row i = input variable, column j = DMU); outputs t x n.
struct DeaDataset {
    std::vector<std::string> dmu_ids;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;

    std::size_t num_dmus() const { return dmu_ids.size(); }
    std::size_t num_inputs() const { return static_cast<std::size_t>(inputs.rows()); }
    std::size_t num_outputs() const { return static_cast<std::size_t>(outputs.rows()); }

    /// Shape and finiteness checks; under Positivity::Strict every entry must
    /// also be > 0. Errors name the offending DMU and variable.
    void validate(Positivity positivity) const;

    /// Appends a DMU column.
    void append_dmu(std::string id, std::span<const double> input_values, std::span<const double> output_values);
};

/// A variable shifted by `shift` to make all of its values positive.
struct Translation {
    std::string variable;
    bool is_output = false;
    double shift = 0.0;
};

/// Adds |min| + 1 to every input or output variable that has a nonpositive
/// entry. Returns one record per shifted variable.
std::vector<Translation> translate_nonpositive(DeaDataset& data);

struct Peer {
    std::string dmu_id;
    std::size_t index = 0;
    double lambda = 0.0;
};

struct Projection {
    std::vector<double> inputs;
    std::vector<double> outputs;
};

struct EfficiencyResult {
    std::string dmu_id;
    std::string scenario_name;
    double score = 0.0;
    double envelopment_objective = 0.0;  // theta* or phi*
    std::optional<double> multiplier_objective;
    std::vector<double> input_weights;   // v, empty if the multiplier program failed
    std::vector<double> output_weights;  // u
    std::optional<double> intercept;     // free VRS multiplier
    std::vector<Peer> reference_set;
    Projection projection;
    std::vector<double> input_slacks;
    std::vector<double> output_slacks;
};

/// Intensities above this count a DMU into the reference set.
inline constexpr double kPeerThreshold = 1e-9;

class InfeasibleModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variables: u_1..u_t, v_1..v_m, then w under VRS.
lp::LinearProgram build_multiplier_lp(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg);

/// Variables: theta (or phi), l_1..l_n, then s-_1..s-_m, s+_1..s+_t when the
/// slack stage is on (rows become equalities).
lp::LinearProgram build_envelopment_lp(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg);

EfficiencyResult efficiency(std::size_t j0, const DeaDataset& data, const DeaConfig& cfg);

/// Per-DMU failures collected by run_scenario.
class ScenarioRunError : public std::runtime_error {
public:
    struct Failure {
        std::string dmu_id;
        std::string message;
    };
    explicit ScenarioRunError(std::vector<Failure> failures);
    const std::vector<Failure>& failures() const { return failures_; }

private:
    std::vector<Failure> failures_;
};

/// Scores every DMU. Solves fan out over hardware threads; the result order
/// always follows `data.dmu_ids`.
std::vector<EfficiencyResult> run_scenario(const DeaDataset& data, const DeaConfig& cfg,
                                           std::string_view scenario_name);

struct RankEntry {
    std::string dmu_id;
    int rank = 0;
    double score = 0.0;
};

/// Scores within this distance of the group leader are ties.
inline constexpr double kRankTieTolerance = 1e-9;

/// Competition ranking ("1,1,3") by descending score; ties ordered by dmu_id.
std::vector<RankEntry> rank(std::span<const EfficiencyResult> results);

}  // namespace fundbench::dea
