#pragma once

// Command-line orchestration: ingestion -> metrics -> scenarios -> DEA ->
// reports. Subcommands: metrics, dea, report, pipeline.

#include "fundbench/data_io.hpp"
#include "fundbench/dea.hpp"
#include "fundbench/report.hpp"
#include "fundbench/scenario.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fundbench::cli {

enum class Grouping { All, BySubCategory };

std::string_view to_string(Grouping grouping);

struct RunConfig {
    // Exactly one of metric_table or nav_panel (+ benchmark).
    std::optional<std::filesystem::path> metric_table;
    std::optional<std::filesystem::path> nav_panel;
    std::optional<std::filesystem::path> benchmark;
    std::optional<std::filesystem::path> fund_profiles;
    std::optional<std::filesystem::path> ranks;
    std::optional<std::filesystem::path> flags;

    Date as_of{std::chrono::year{2020}, std::chrono::June, std::chrono::day{29}};
    bool filters_enabled = true;
    io::FilterPolicy filter;

    double risk_free = 0.0;
    double mar = 0.0;
    double var_confidence = 0.95;

    std::vector<scenario::ScenarioSpec> scenarios;  // empty means all built-ins
    dea::DeaConfig dea;
    Grouping grouping = Grouping::All;
    report::EfficiencyRule efficiency_rule = report::EfficiencyRule::AnyScenario;
    report::Format format = report::Format::Csv;
    std::filesystem::path out_dir = "out";

    /// Scenario list with the run-wide DEA settings applied.
    std::vector<scenario::ScenarioSpec> active_scenarios() const;

    /// Throws ConfigError when input selection or scenarios are invalid.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads a JSON run configuration. Relative paths resolve against the
/// directory holding the file. Unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);

struct Diagnostic {
    enum class Level { Warning, Error } level;
    std::string message;
};

class Diagnostics {
public:
    void warn(std::string message);
    void error(std::string message);
    bool has_errors() const;
    const std::vector<Diagnostic>& entries() const { return entries_; }

private:
    std::vector<Diagnostic> entries_;
};

/// Writes metrics.csv from a NAV panel.
void cmd_metrics(const RunConfig& config, Diagnostics& diag);
/// Writes efficiency tables per scenario, a summary and efficiency_flags.csv.
void cmd_dea(const RunConfig& config, Diagnostics& diag);
/// Writes classification and (when ranks are available) crosstab tables.
void cmd_report(const RunConfig& config, Diagnostics& diag);
/// metrics (for NAV input), dea and report in sequence.
void cmd_pipeline(const RunConfig& config, Diagnostics& diag);

/// Entry point. Returns 0 iff no error-level diagnostics were emitted, 2 for
/// usage or configuration errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace fundbench::cli
