#pragma once

// File ingestion, the fund-universe filters and the external rank join.
//
// Metric table (precomputed metrics, one fund per row):
//   name,category,sub_category,corpus_crore,inception_date,expected_return,beta,
//   std_dev,downside_prob,var_pct,expense_ratio,exit_load,sharpe,treynor,sortino,
//   jensen_alpha,information_ratio
// NAV panel:      name,date,nav        benchmark:  date,nav
// Fund profiles:  name,category,sub_category,corpus_crore,inception_date,expense_ratio,exit_load
// Ranks:          name,rank
//
// Dates are ISO-8601, decimals use '.', blank cells are missing values.

#include "fundbench/date.hpp"
#include "fundbench/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fundbench::io {

inline constexpr std::string_view kMetricTableHeader =
    "name,category,sub_category,corpus_crore,inception_date,expected_return,beta,std_dev,downside_prob,var_pct,"
    "expense_ratio,exit_load,sharpe,treynor,sortino,jensen_alpha,information_ratio";
inline constexpr std::string_view kNavHeader = "name,date,nav";
inline constexpr std::string_view kBenchmarkHeader = "date,nav";
inline constexpr std::string_view kProfileHeader =
    "name,category,sub_category,corpus_crore,inception_date,expense_ratio,exit_load";
inline constexpr std::string_view kRanksHeader = "name,rank";

enum class IoErrorKind { ParseError, DuplicateFund, NonMonotonicDates, RankOutOfRange };

std::string_view to_string(IoErrorKind kind);

class IoError : public std::runtime_error {
public:
    IoError(IoErrorKind kind, const std::string& what, std::size_t line = 0, std::size_t column = 0,
            std::string subject = {})
        : std::runtime_error(what), kind_(kind), line_(line), column_(column), subject_(std::move(subject)) {}

    IoErrorKind kind() const { return kind_; }
    std::size_t line() const { return line_; }      // 1-based, 0 if not applicable
    std::size_t column() const { return column_; }  // 1-based, 0 if not applicable
    const std::string& subject() const { return subject_; }  // fund name, when relevant

private:
    IoErrorKind kind_;
    std::size_t line_;
    std::size_t column_;
    std::string subject_;
};

struct DmuRecord {
    std::string name;
    std::string category;
    std::string sub_category;
    std::optional<double> corpus_crore;
    std::optional<Date> inception_date;
    metrics::MetricSet metrics;
    std::optional<int> external_rank;

    bool operator==(const DmuRecord&) const = default;
};

std::vector<DmuRecord> read_metric_table(std::istream& in);
std::vector<DmuRecord> load_metric_table(const std::filesystem::path& path);
void write_metric_table(std::ostream& out, std::span<const DmuRecord> records);

/// Non-return attributes of a fund, used alongside a NAV panel.
struct FundProfile {
    std::string name;
    std::string category;
    std::string sub_category;
    std::optional<double> corpus_crore;
    std::optional<Date> inception_date;
    std::optional<double> expense_ratio;
    std::optional<double> exit_load;
};

std::vector<FundProfile> read_fund_profiles(std::istream& in);
std::vector<FundProfile> load_fund_profiles(const std::filesystem::path& path);

struct ReturnPanel {
    std::vector<metrics::ReturnSeries> funds;  // in order of first appearance
    metrics::MarketContext context;            // benchmark set, defaults elsewhere
};

/// Converts NAVs to returns nav_t / nav_{t-1} - 1 dated at t.
ReturnPanel read_return_panel(std::istream& funds, std::istream& benchmark);
ReturnPanel load_return_panel(const std::filesystem::path& fund_path, const std::filesystem::path& benchmark_path);

struct FilterPolicy {
    double min_corpus = 500.0;  // crore
    Date inception_cutoff{std::chrono::year{2017}, std::chrono::June, std::chrono::day{29}};
    bool require_complete = true;
};

enum class DropReason { MinCorpus, InceptionCutoff, Incomplete };

std::string_view to_string(DropReason reason);

struct DroppedRecord {
    DmuRecord record;
    DropReason reason;
    std::string detail;
};

struct FilterOutcome {
    std::vector<DmuRecord> kept;
    std::vector<DroppedRecord> dropped;
};

/// Drops, in this order of precedence: corpus below the minimum, inception
/// after the cutoff (or after `as_of`), and, when completeness is required,
/// a missing corpus, inception date or any of `required_fields`.
FilterOutcome apply_filters(std::span<const DmuRecord> records, const FilterPolicy& policy, Date as_of,
                            std::span<const std::string> required_fields);

struct RankJoin {
    std::vector<DmuRecord> records;
    std::vector<std::string> unmatched_rank_names;
};

/// Case-folded, whitespace-collapsed fund name used for rank matching.
std::string normalize_name(std::string_view name);

RankJoin join_external_ranks(std::vector<DmuRecord> records, std::istream& ranks);
RankJoin join_external_ranks(std::vector<DmuRecord> records, const std::filesystem::path& ranks_path);

}  // namespace fundbench::io
