#pragma once

// Traditional fund performance measures computed from monthly return series.
//
// Every statistic uses the population (divide-by-n) convention. Measures that
// involve the benchmark operate on the inner join of fund and benchmark
// observations by period-end date.

#include "fundbench/date.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fundbench::metrics {

struct Observation {
    Date period_end;
    double value = 0.0;  // periodic return as a decimal fraction
};

struct ReturnSeries {
    std::string fund_id;
    std::vector<Observation> observations;

    std::size_t size() const { return observations.size(); }
    std::vector<double> values() const;

    /// Dates strictly increasing, every return finite and > -1.
    void validate() const;
};

struct MarketContext {
    ReturnSeries benchmark;
    double risk_free_rate = 0.0;             // per period
    double minimum_acceptable_return = 0.0;  // per period
    double var_confidence = 0.95;

    void validate() const;
};

enum class MetricErrorKind {
    InsufficientHistory,
    DegenerateBenchmark,
    ZeroVolatility,
    ZeroDownside,
    ZeroBeta,
    ZeroTrackingError,
    NoUpPeriods,
    NoDownPeriods,
    InvalidSeries,
};

std::string_view to_string(MetricErrorKind kind);

class MetricError : public std::runtime_error {
public:
    MetricError(MetricErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    MetricErrorKind kind() const { return kind_; }

private:
    MetricErrorKind kind_;
};

/// Fund and benchmark returns matched on period-end date.
struct AlignedReturns {
    std::vector<double> fund;
    std::vector<double> benchmark;
    std::size_t dropped = 0;  // observations present in only one series
};

AlignedReturns align(const ReturnSeries& fund, const ReturnSeries& benchmark);

/// Compounded trailing-window returns, one per month step.
std::vector<double> rolling_returns(const ReturnSeries& series, std::size_t window);

/// Mean of the 12-month rolling returns over the trailing 24 months.
double expected_return(const ReturnSeries& series);

double beta(const ReturnSeries& fund, const MarketContext& ctx);
double sharpe(const ReturnSeries& fund, const MarketContext& ctx);
double sortino(const ReturnSeries& fund, const MarketContext& ctx);
double treynor(const ReturnSeries& fund, const MarketContext& ctx);
double jensen_alpha(const ReturnSeries& fund, const MarketContext& ctx);
double tracking_error(const ReturnSeries& fund, const MarketContext& ctx);
double information_ratio(const ReturnSeries& fund, const MarketContext& ctx);
double downside_probability(const ReturnSeries& fund, const MarketContext& ctx);
double std_dev(const ReturnSeries& fund);

/// Historical VaR in percent: max(0, -q) * 100 where q is the lower order
/// statistic at index floor((1 - confidence) * (n - 1)). Needs >= 20 returns.
double historical_var_pct(const ReturnSeries& fund, const MarketContext& ctx);

struct CaptureRatios {
    double upside = 0.0;
    double downside = 0.0;
};

double upside_capture(const ReturnSeries& fund, const MarketContext& ctx);
double downside_capture(const ReturnSeries& fund, const MarketContext& ctx);
CaptureRatios capture_ratios(const ReturnSeries& fund, const MarketContext& ctx);

/// Named per-fund metric values. Every field is optional so that partially
/// populated tables (ingested or computed with failures) stay representable.
struct MetricSet {
    std::optional<double> expected_return;
    std::optional<double> sharpe;
    std::optional<double> treynor;
    std::optional<double> sortino;
    std::optional<double> jensen_alpha;
    std::optional<double> information_ratio;
    std::optional<double> beta;
    std::optional<double> std_dev;
    std::optional<double> downside_probability;
    std::optional<double> var_pct_corpus;
    std::optional<double> tracking_error;
    std::optional<double> upside_capture;
    std::optional<double> downside_capture;
    std::optional<double> expense_ratio;
    std::optional<double> exit_load;

    static std::span<const std::string_view> field_names();
    static bool is_field(std::string_view name);

    std::optional<double> get(std::string_view name) const;
    /// Throws std::invalid_argument for an unknown field name.
    void set(std::string_view name, std::optional<double> value);

    /// Sign and range invariants on whichever fields are present; returns the
    /// name of the first violating field.
    std::optional<std::string> first_violation() const;

    bool operator==(const MetricSet&) const = default;
};

struct MetricComputation {
    MetricSet metrics;
    std::vector<std::string> warnings;  // one per metric left empty
    std::size_t misaligned = 0;
};

/// Computes every return-derived field of MetricSet. A metric whose
/// precondition fails is left empty and recorded in `warnings`.
/// expense_ratio and exit_load are not return-derived and stay empty.
MetricComputation compute_metrics(const ReturnSeries& fund, const MarketContext& ctx);

}  // namespace fundbench::metrics
