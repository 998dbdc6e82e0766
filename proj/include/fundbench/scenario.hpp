#pragma once

// Input/output scenario definitions and the translation of a metric table into
// a DEA dataset, including the information-ratio standardization X - IR.

#include "fundbench/dea.hpp"
#include "fundbench/metrics.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fundbench::scenario {

struct ScenarioSpec {
    std::string name;
    std::vector<std::string> input_fields;
    std::vector<std::string> output_fields{"expected_return"};
    bool ir_standardize = false;
    dea::DeaConfig dea;

    /// Throws ScenarioError(InvalidSpec) on empty/duplicate/unknown fields or
    /// ir_standardize without information_ratio among the inputs.
    void validate() const;
};

enum class ScenarioErrorKind { InvalidSpec, UnknownScenario, MissingField, PositivityViolation, NonFiniteInput };

std::string_view to_string(ScenarioErrorKind kind);

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(ScenarioErrorKind kind, const std::string& what, std::string dmu_id = {}, std::string field = {})
        : std::runtime_error(what), kind_(kind), dmu_id_(std::move(dmu_id)), field_(std::move(field)) {}

    ScenarioErrorKind kind() const { return kind_; }
    const std::string& dmu_id() const { return dmu_id_; }
    const std::string& field() const { return field_; }

private:
    ScenarioErrorKind kind_;
    std::string dmu_id_;
    std::string field_;
};

/// The five built-in scenarios: 3_inputs, 4_inputs, 5_inputs, ir_4_inputs,
/// ir_5_inputs. All use expected_return as the single output.
std::vector<ScenarioSpec> builtin_scenarios();

/// Throws ScenarioError(UnknownScenario).
ScenarioSpec builtin_scenario(std::string_view name);

struct StandardizationReport {
    double shift = 0.0;  // X
    double max_ir = 0.0;
    double transformed_min = 0.0;
};

struct StandardizedIr {
    std::vector<double> values;
    StandardizationReport report;
};

/// X = max(ir) + 1, values X - ir_i (all >= 1).
StandardizedIr standardize_ir(std::span<const double> ir_values);

struct MetricRow {
    std::string dmu_id;
    metrics::MetricSet metrics;
};

struct AssembledScenario {
    dea::DeaDataset dataset;
    std::optional<StandardizationReport> ir_report;
    std::vector<dea::Translation> translations;
};

/// Builds the dataset rows in the scenario's field order. Under strict positivity every
/// value must be > 0; under translate, nonpositive variables are shifted.
AssembledScenario assemble(std::span<const MetricRow> table, const ScenarioSpec& spec);

}  // namespace fundbench::scenario
