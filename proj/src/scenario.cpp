#include "fundbench/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fundbench::scenario {

namespace {

constexpr std::string_view kInformationRatio = "information_ratio";

void check_fields(const std::vector<std::string>& fields, const std::string& spec, std::string_view role) {
    std::set<std::string> seen;
    for (const auto& f : fields) {
        if (!metrics::MetricSet::is_field(f)) {
            throw ScenarioError(ScenarioErrorKind::InvalidSpec,
                                "scenario '" + spec + "' names unknown " + std::string(role) + " field '" + f + "'");
        }
        if (!seen.insert(f).second) {
            throw ScenarioError(ScenarioErrorKind::InvalidSpec,
                                "scenario '" + spec + "' repeats " + std::string(role) + " field '" + f + "'");
        }
    }
}

ScenarioSpec make(std::string name, std::vector<std::string> inputs, bool ir) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.input_fields = std::move(inputs);
    s.ir_standardize = ir;
    return s;
}

}  // namespace

std::string_view to_string(ScenarioErrorKind kind) {
    switch (kind) {
        case ScenarioErrorKind::InvalidSpec: return "InvalidSpec";
        case ScenarioErrorKind::UnknownScenario: return "UnknownScenario";
        case ScenarioErrorKind::MissingField: return "MissingField";
        case ScenarioErrorKind::PositivityViolation: return "PositivityViolation";
        case ScenarioErrorKind::NonFiniteInput: return "NonFiniteInput";
    }
    return "Unknown";
}

void ScenarioSpec::validate() const {
    if (name.empty()) throw ScenarioError(ScenarioErrorKind::InvalidSpec, "scenario name is empty");
    if (input_fields.empty()) {
        throw ScenarioError(ScenarioErrorKind::InvalidSpec, "scenario '" + name + "' has no inputs");
    }
    if (output_fields.empty()) {
        throw ScenarioError(ScenarioErrorKind::InvalidSpec, "scenario '" + name + "' has no outputs");
    }
    check_fields(input_fields, name, "input");
    check_fields(output_fields, name, "output");
    for (const auto& f : output_fields) {
        if (std::find(input_fields.begin(), input_fields.end(), f) != input_fields.end()) {
            throw ScenarioError(ScenarioErrorKind::InvalidSpec,
                                "scenario '" + name + "' uses '" + f + "' as both input and output");
        }
    }
    if (ir_standardize &&
        std::find(input_fields.begin(), input_fields.end(), kInformationRatio) == input_fields.end()) {
        throw ScenarioError(ScenarioErrorKind::InvalidSpec,
                            "scenario '" + name + "' standardizes IR but information_ratio is not an input");
    }
    try {
        dea.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(ScenarioErrorKind::InvalidSpec, "scenario '" + name + "': " + e.what());
    }
}

std::vector<ScenarioSpec> builtin_scenarios() {
    return {
        make("3_inputs", {"beta", "downside_probability", "expense_ratio"}, false),
        make("4_inputs", {"beta", "downside_probability", "expense_ratio", "std_dev"}, false),
        make("5_inputs", {"beta", "downside_probability", "expense_ratio", "std_dev", "var_pct_corpus"}, false),
        make("ir_4_inputs", {"information_ratio", "expense_ratio", "downside_probability", "std_dev"}, true),
        make("ir_5_inputs", {"information_ratio", "expense_ratio", "downside_probability", "std_dev", "var_pct_corpus"},
             true),
    };
}

ScenarioSpec builtin_scenario(std::string_view name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    throw ScenarioError(ScenarioErrorKind::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
}

StandardizedIr standardize_ir(std::span<const double> ir_values) {
    if (ir_values.empty()) {
        throw ScenarioError(ScenarioErrorKind::NonFiniteInput, "information ratio list is empty");
    }
    for (double v : ir_values) {
        if (!std::isfinite(v)) {
            throw ScenarioError(ScenarioErrorKind::NonFiniteInput, "information ratio list has a non-finite value");
        }
    }
    StandardizedIr out;
    out.report.max_ir = *std::max_element(ir_values.begin(), ir_values.end());
    out.report.shift = out.report.max_ir + 1.0;
    out.values.reserve(ir_values.size());
    for (double v : ir_values) out.values.push_back(out.report.shift - v);
    out.report.transformed_min = *std::min_element(out.values.begin(), out.values.end());
    return out;
}

AssembledScenario assemble(std::span<const MetricRow> table, const ScenarioSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(table.size());
    const auto m = static_cast<Eigen::Index>(spec.input_fields.size());
    const auto t = static_cast<Eigen::Index>(spec.output_fields.size());

    AssembledScenario out;
    auto& data = out.dataset;
    data.input_names = spec.input_fields;
    data.output_names = spec.output_fields;
    data.inputs.resize(m, n);
    data.outputs.resize(t, n);

    auto fetch = [&](const MetricRow& row, const std::string& field) {
        const auto v = row.metrics.get(field);
        if (!v) {
            throw ScenarioError(ScenarioErrorKind::MissingField,
                                "fund '" + row.dmu_id + "' is missing '" + field + "'", row.dmu_id, field);
        }
        if (!std::isfinite(*v)) {
            throw ScenarioError(ScenarioErrorKind::NonFiniteInput,
                                "fund '" + row.dmu_id + "' has a non-finite '" + field + "'", row.dmu_id, field);
        }
        return *v;
    };

    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& row = table[static_cast<std::size_t>(j)];
        data.dmu_ids.push_back(row.dmu_id);
        for (Eigen::Index i = 0; i < m; ++i) data.inputs(i, j) = fetch(row, spec.input_fields[static_cast<std::size_t>(i)]);
        for (Eigen::Index r = 0; r < t; ++r) {
            data.outputs(r, j) = fetch(row, spec.output_fields[static_cast<std::size_t>(r)]);
        }
    }

    if (spec.ir_standardize && n > 0) {
        const auto it = std::find(spec.input_fields.begin(), spec.input_fields.end(), kInformationRatio);
        const auto row = static_cast<Eigen::Index>(it - spec.input_fields.begin());
        std::vector<double> raw(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) raw[static_cast<std::size_t>(j)] = data.inputs(row, j);
        const StandardizedIr standardized = standardize_ir(raw);
        for (Eigen::Index j = 0; j < n; ++j) data.inputs(row, j) = standardized.values[static_cast<std::size_t>(j)];
        out.ir_report = standardized.report;
    }

    if (spec.dea.positivity == dea::Positivity::Strict) {
        auto check = [&](const Eigen::MatrixXd& mat, const std::vector<std::string>& names) {
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < mat.rows(); ++i) {
                    if (mat(i, j) > 0.0) continue;
                    const auto& id = data.dmu_ids[static_cast<std::size_t>(j)];
                    const auto& field = names[static_cast<std::size_t>(i)];
                    std::ostringstream msg;
                    msg << "fund '" << id << "' has nonpositive '" << field << "' (" << mat(i, j)
                        << ") under strict positivity";
                    throw ScenarioError(ScenarioErrorKind::PositivityViolation, msg.str(), id, field);
                }
            }
        };
        check(data.inputs, data.input_names);
        check(data.outputs, data.output_names);
    } else if (n > 0) {
        out.translations = dea::translate_nonpositive(data);
    }
    return out;
}

}  // namespace fundbench::scenario
