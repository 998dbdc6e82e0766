#pragma once

// Cross-scenario efficiency classification, the external-rank crosstab and
// table rendering to CSV, Markdown and JSON.

#include "fundbench/data_io.hpp"
#include "fundbench/dea.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace fundbench::report {

/// Scores at or above 1 - tolerance count as efficient.
inline constexpr double kEfficiencyTolerance = 1e-6;

enum class EfficiencyClassKind { EfficientAll, EfficientIrOnly, EfficientBaseOnly, Mixed, NeverEfficient };

std::string_view to_string(EfficiencyClassKind kind);

struct ScenarioFlag {
    std::string scenario;
    bool ir_scenario = false;
    bool efficient = false;

    bool operator==(const ScenarioFlag&) const = default;
};

struct EfficiencyClass {
    std::string dmu_id;
    EfficiencyClassKind kind = EfficiencyClassKind::NeverEfficient;
    std::vector<ScenarioFlag> per_scenario_flags;  // in scenario order
};

struct ScenarioResults {
    std::string name;
    bool ir_scenario = false;
    std::vector<dea::EfficiencyResult> results;
};

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// EfficientAll if every flag is set, NeverEfficient if none, EfficientIrOnly
/// if every IR flag and no base flag is set, EfficientBaseOnly symmetrically,
/// Mixed otherwise.
EfficiencyClassKind classify_flags(std::span<const ScenarioFlag> flags);

/// Throws ReportError when the scenarios do not cover the same DMU set.
/// Output follows the DMU order of the first scenario.
std::vector<EfficiencyClass> classify(std::span<const ScenarioResults> scenarios,
                                      double tolerance = kEfficiencyTolerance);

enum class EfficiencyRule { AnyScenario, AllScenarios };

std::string_view to_string(EfficiencyRule rule);

struct CrosstabRow {
    int rank = 0;  // 0 in the totals row
    int total = 0;
    int efficient = 0;
    int inefficient = 0;

    bool operator==(const CrosstabRow&) const = default;
};

struct RankCrosstab {
    std::vector<CrosstabRow> rows;  // ranks 1..5
    CrosstabRow totals;
    int unranked = 0;      // classified funds with no external rank
    int unclassified = 0;  // ranked funds with no efficiency class
};

class NoRankedFunds : public ReportError {
public:
    using ReportError::ReportError;
};

/// Matches records to classes by normalized name. Throws NoRankedFunds when no
/// classified fund carries an external rank.
RankCrosstab crosstab(std::span<const io::DmuRecord> records, std::span<const EfficiencyClass> classes,
                      EfficiencyRule rule = EfficiencyRule::AnyScenario);

// ---------------------------------------------------------------------------
// Rendering

enum class Format { Csv, Markdown, Json };

std::string_view to_string(Format format);
std::string_view extension(Format format);

/// A cell: empty, text, integer, or a real rendered to 4 decimals in text
/// formats (JSON keeps full precision).
using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    bool operator==(const Table&) const = default;
};

/// Ordered key/value lines describing the run that produced a table.
using RunHeader = std::vector<std::pair<std::string, std::string>>;

std::string format_decimal(double value);  // fixed, 4 places

/// CSV header lines start with "# "; Markdown wraps them in an HTML comment;
/// JSON stores them under "run".
std::string render(const Table& table, Format format, const RunHeader& header = {});

struct ParsedCsv {
    RunHeader header;
    Table table;  // every cell parsed back as text (or empty)
};

/// Inverse of render(..., Format::Csv) up to cell typing.
ParsedCsv parse_csv(std::string_view text);

struct ParsedJson {
    RunHeader header;
    Table table;
};

/// Inverse of render(..., Format::Json); integers and reals keep their type.
ParsedJson parse_json(std::string_view text);

struct RankedResult {
    std::string group;
    dea::EfficiencyResult result;
    int rank = 0;
};

Table efficiency_table(const std::string& scenario, std::span<const RankedResult> rows);
Table classification_table(std::span<const EfficiencyClass> classes);
Table crosstab_table(const RankCrosstab& crosstab);

}  // namespace fundbench::report
