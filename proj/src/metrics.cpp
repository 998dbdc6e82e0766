#include "fundbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fundbench::metrics {

namespace {

constexpr double kDegenerate = 1e-12;
constexpr std::size_t kExpectedReturnHistory = 24;
constexpr std::size_t kRollingWindow = 12;
constexpr std::size_t kVarMinHistory = 20;
constexpr std::size_t kBetaMinOverlap = 3;

double mean(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_variance(std::span<const double> xs) {
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size());
}

double population_covariance(std::span<const double> xs, std::span<const double> ys) {
    const double mx = mean(xs);
    const double my = mean(ys);
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += (xs[i] - mx) * (ys[i] - my);
    return acc / static_cast<double>(xs.size());
}

std::vector<double> nonempty_values(const ReturnSeries& series) {
    if (series.observations.empty()) {
        throw MetricError(MetricErrorKind::InsufficientHistory, "fund '" + series.fund_id + "' has no observations");
    }
    return series.values();
}

AlignedReturns aligned_overlap(const ReturnSeries& fund, const MarketContext& ctx, std::size_t min_size) {
    AlignedReturns pair = align(fund, ctx.benchmark);
    if (pair.fund.size() < min_size) {
        throw MetricError(MetricErrorKind::InsufficientHistory,
                          "fund '" + fund.fund_id + "' overlaps the benchmark on " +
                              std::to_string(pair.fund.size()) + " periods, need " + std::to_string(min_size));
    }
    return pair;
}

double beta_of(const AlignedReturns& pair) {
    const double var_m = population_variance(pair.benchmark);
    if (var_m < kDegenerate) {
        throw MetricError(MetricErrorKind::DegenerateBenchmark, "benchmark variance is zero over the overlap");
    }
    return population_covariance(pair.fund, pair.benchmark) / var_m;
}

double alpha_of(const AlignedReturns& pair, double beta, double risk_free) {
    return mean(pair.fund) - (risk_free + beta * (mean(pair.benchmark) - risk_free));
}

// sigma^2(r_p) - beta^2 sigma^2(r_M), evaluated as the mean squared residual of
// the centred regression so that exact linear fits give exactly zero.
double residual_sd_of(const AlignedReturns& pair, double beta) {
    const double mf = mean(pair.fund);
    const double mb = mean(pair.benchmark);
    double acc = 0.0;
    for (std::size_t i = 0; i < pair.fund.size(); ++i) {
        const double e = (pair.fund[i] - mf) - beta * (pair.benchmark[i] - mb);
        acc += e * e;
    }
    return std::sqrt(std::max(0.0, acc / static_cast<double>(pair.fund.size())));
}

double compounded(std::span<const double> xs) {
    double growth = 1.0;
    for (double x : xs) growth *= 1.0 + x;
    return growth - 1.0;
}

double capture(const ReturnSeries& fund, const MarketContext& ctx, bool up) {
    const AlignedReturns pair = aligned_overlap(fund, ctx, 1);
    std::vector<double> f;
    std::vector<double> b;
    for (std::size_t i = 0; i < pair.fund.size(); ++i) {
        if (up ? pair.benchmark[i] > 0.0 : pair.benchmark[i] < 0.0) {
            f.push_back(pair.fund[i]);
            b.push_back(pair.benchmark[i]);
        }
    }
    if (b.empty()) {
        throw MetricError(up ? MetricErrorKind::NoUpPeriods : MetricErrorKind::NoDownPeriods,
                          std::string("benchmark has no ") + (up ? "up" : "down") + " periods in the overlap");
    }
    return compounded(f) / compounded(b) * 100.0;
}

}  // namespace

std::vector<double> ReturnSeries::values() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) out.push_back(o.value);
    return out;
}

void ReturnSeries::validate() const {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!std::isfinite(o.value) || o.value <= -1.0) {
            throw MetricError(MetricErrorKind::InvalidSeries,
                              "fund '" + fund_id + "' has an invalid return on " + format_iso_date(o.period_end));
        }
        if (i > 0 && !(observations[i - 1].period_end < o.period_end)) {
            throw MetricError(MetricErrorKind::InvalidSeries,
                              "fund '" + fund_id + "' dates are not strictly increasing at " +
                                  format_iso_date(o.period_end));
        }
    }
}

void MarketContext::validate() const {
    benchmark.validate();
    if (!(var_confidence > 0.5 && var_confidence < 1.0)) {
        throw std::invalid_argument("var_confidence must lie in (0.5, 1)");
    }
    if (!std::isfinite(risk_free_rate) || !std::isfinite(minimum_acceptable_return)) {
        throw std::invalid_argument("risk-free rate and MAR must be finite");
    }
}

std::string_view to_string(MetricErrorKind kind) {
    switch (kind) {
        case MetricErrorKind::InsufficientHistory: return "InsufficientHistory";
        case MetricErrorKind::DegenerateBenchmark: return "DegenerateBenchmark";
        case MetricErrorKind::ZeroVolatility: return "ZeroVolatility";
        case MetricErrorKind::ZeroDownside: return "ZeroDownside";
        case MetricErrorKind::ZeroBeta: return "ZeroBeta";
        case MetricErrorKind::ZeroTrackingError: return "ZeroTrackingError";
        case MetricErrorKind::NoUpPeriods: return "NoUpPeriods";
        case MetricErrorKind::NoDownPeriods: return "NoDownPeriods";
        case MetricErrorKind::InvalidSeries: return "InvalidSeries";
    }
    return "Unknown";
}

AlignedReturns align(const ReturnSeries& fund, const ReturnSeries& benchmark) {
    AlignedReturns out;
    const auto& a = fund.observations;
    const auto& b = benchmark.observations;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].period_end < b[j].period_end) {
            ++i;
            ++out.dropped;
        } else if (b[j].period_end < a[i].period_end) {
            ++j;
            ++out.dropped;
        } else {
            out.fund.push_back(a[i++].value);
            out.benchmark.push_back(b[j++].value);
        }
    }
    out.dropped += (a.size() - i) + (b.size() - j);
    return out;
}

std::vector<double> rolling_returns(const ReturnSeries& series, std::size_t window) {
    if (window == 0 || series.size() < window) {
        throw MetricError(MetricErrorKind::InsufficientHistory,
                          "fund '" + series.fund_id + "' has " + std::to_string(series.size()) +
                              " periods, rolling window needs " + std::to_string(window));
    }
    const std::vector<double> r = series.values();
    std::vector<double> out;
    out.reserve(r.size() - window + 1);
    for (std::size_t end = window; end <= r.size(); ++end) {
        out.push_back(compounded(std::span<const double>(r).subspan(end - window, window)));
    }
    return out;
}

double expected_return(const ReturnSeries& series) {
    if (series.size() < kExpectedReturnHistory) {
        throw MetricError(MetricErrorKind::InsufficientHistory,
                          "fund '" + series.fund_id + "' has " + std::to_string(series.size()) +
                              " periods, expected return needs 24");
    }
    ReturnSeries trailing{series.fund_id,
                          {series.observations.end() - kExpectedReturnHistory, series.observations.end()}};
    const auto rolling = rolling_returns(trailing, kRollingWindow);
    return mean(rolling);
}

double beta(const ReturnSeries& fund, const MarketContext& ctx) {
    return beta_of(aligned_overlap(fund, ctx, kBetaMinOverlap));
}

double std_dev(const ReturnSeries& fund) {
    return std::sqrt(population_variance(nonempty_values(fund)));
}

double sharpe(const ReturnSeries& fund, const MarketContext& ctx) {
    const auto r = nonempty_values(fund);
    const double sigma = std::sqrt(population_variance(r));
    if (sigma < kDegenerate) {
        throw MetricError(MetricErrorKind::ZeroVolatility, "fund '" + fund.fund_id + "' has constant returns");
    }
    return (mean(r) - ctx.risk_free_rate) / sigma;
}

double sortino(const ReturnSeries& fund, const MarketContext& ctx) {
    const auto r = nonempty_values(fund);
    const double mar = ctx.minimum_acceptable_return;
    double shortfall = 0.0;
    bool any_below = false;
    for (double x : r) {
        if (x < mar) {
            shortfall += (x - mar) * (x - mar);
            any_below = true;
        }
    }
    if (!any_below) {
        throw MetricError(MetricErrorKind::ZeroDownside, "fund '" + fund.fund_id + "' never returns below MAR");
    }
    const double dd = std::sqrt(shortfall / static_cast<double>(r.size()));
    return (mean(r) - mar) / dd;
}

double treynor(const ReturnSeries& fund, const MarketContext& ctx) {
    const AlignedReturns pair = aligned_overlap(fund, ctx, kBetaMinOverlap);
    const double b = beta_of(pair);
    if (std::abs(b) < kDegenerate) {
        throw MetricError(MetricErrorKind::ZeroBeta, "fund '" + fund.fund_id + "' has zero beta");
    }
    return (mean(pair.fund) - ctx.risk_free_rate) / b;
}

double jensen_alpha(const ReturnSeries& fund, const MarketContext& ctx) {
    const AlignedReturns pair = aligned_overlap(fund, ctx, kBetaMinOverlap);
    return alpha_of(pair, beta_of(pair), ctx.risk_free_rate);
}

double tracking_error(const ReturnSeries& fund, const MarketContext& ctx) {
    const AlignedReturns pair = aligned_overlap(fund, ctx, kBetaMinOverlap);
    return residual_sd_of(pair, beta_of(pair));
}

double information_ratio(const ReturnSeries& fund, const MarketContext& ctx) {
    const AlignedReturns pair = aligned_overlap(fund, ctx, kBetaMinOverlap);
    const double b = beta_of(pair);
    const double te = residual_sd_of(pair, b);
    if (te <= kDegenerate) {
        throw MetricError(MetricErrorKind::ZeroTrackingError,
                          "fund '" + fund.fund_id + "' is an exact linear function of the benchmark");
    }
    return alpha_of(pair, b, ctx.risk_free_rate) / te;
}

double downside_probability(const ReturnSeries& fund, const MarketContext& ctx) {
    const auto r = nonempty_values(fund);
    const auto below = std::count_if(r.begin(), r.end(),
                                     [&](double x) { return x < ctx.minimum_acceptable_return; });
    return static_cast<double>(below) / static_cast<double>(r.size());
}

double historical_var_pct(const ReturnSeries& fund, const MarketContext& ctx) {
    if (fund.size() < kVarMinHistory) {
        throw MetricError(MetricErrorKind::InsufficientHistory,
                          "fund '" + fund.fund_id + "' has " + std::to_string(fund.size()) +
                              " periods, VaR needs 20");
    }
    auto r = fund.values();
    std::sort(r.begin(), r.end());
    const double position = (1.0 - ctx.var_confidence) * static_cast<double>(r.size() - 1);
    const auto index = static_cast<std::size_t>(std::floor(position + 1e-9));
    return std::max(0.0, -r[std::min(index, r.size() - 1)]) * 100.0;
}

double upside_capture(const ReturnSeries& fund, const MarketContext& ctx) { return capture(fund, ctx, true); }

double downside_capture(const ReturnSeries& fund, const MarketContext& ctx) { return capture(fund, ctx, false); }

CaptureRatios capture_ratios(const ReturnSeries& fund, const MarketContext& ctx) {
    return {upside_capture(fund, ctx), downside_capture(fund, ctx)};
}

// ---------------------------------------------------------------------------
// MetricSet

namespace {

using Member = std::optional<double> MetricSet::*;

struct FieldEntry {
    std::string_view name;
    Member member;
};

constexpr std::array<FieldEntry, 15> kFields{{
    {"expected_return", &MetricSet::expected_return},
    {"sharpe", &MetricSet::sharpe},
    {"treynor", &MetricSet::treynor},
    {"sortino", &MetricSet::sortino},
    {"jensen_alpha", &MetricSet::jensen_alpha},
    {"information_ratio", &MetricSet::information_ratio},
    {"beta", &MetricSet::beta},
    {"std_dev", &MetricSet::std_dev},
    {"downside_probability", &MetricSet::downside_probability},
    {"var_pct_corpus", &MetricSet::var_pct_corpus},
    {"tracking_error", &MetricSet::tracking_error},
    {"upside_capture", &MetricSet::upside_capture},
    {"downside_capture", &MetricSet::downside_capture},
    {"expense_ratio", &MetricSet::expense_ratio},
    {"exit_load", &MetricSet::exit_load},
}};

constexpr std::array<std::string_view, kFields.size()> kFieldNames = [] {
    std::array<std::string_view, kFields.size()> names{};
    for (std::size_t i = 0; i < kFields.size(); ++i) names[i] = kFields[i].name;
    return names;
}();

const FieldEntry* find_field(std::string_view name) {
    for (const auto& f : kFields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

}  // namespace

std::span<const std::string_view> MetricSet::field_names() { return kFieldNames; }

bool MetricSet::is_field(std::string_view name) { return find_field(name) != nullptr; }

std::optional<double> MetricSet::get(std::string_view name) const {
    const FieldEntry* f = find_field(name);
    if (!f) throw std::invalid_argument("unknown metric field '" + std::string(name) + "'");
    return this->*(f->member);
}

void MetricSet::set(std::string_view name, std::optional<double> value) {
    const FieldEntry* f = find_field(name);
    if (!f) throw std::invalid_argument("unknown metric field '" + std::string(name) + "'");
    this->*(f->member) = value;
}

std::optional<std::string> MetricSet::first_violation() const {
    auto negative = [](const std::optional<double>& v) { return v && *v < 0.0; };
    if (negative(std_dev)) return "std_dev";
    if (negative(tracking_error)) return "tracking_error";
    if (downside_probability && (*downside_probability < 0.0 || *downside_probability > 1.0)) {
        return "downside_probability";
    }
    if (negative(var_pct_corpus)) return "var_pct_corpus";
    if (negative(expense_ratio)) return "expense_ratio";
    if (negative(exit_load)) return "exit_load";
    return std::nullopt;
}

MetricComputation compute_metrics(const ReturnSeries& fund, const MarketContext& ctx) {
    MetricComputation out;
    out.misaligned = align(fund, ctx.benchmark).dropped;

    auto attempt = [&](std::string_view field, auto&& fn) {
        try {
            out.metrics.set(field, fn());
        } catch (const MetricError& e) {
            out.warnings.push_back(std::string(field) + ": " + std::string(to_string(e.kind())) + " (" + e.what() +
                                   ")");
        }
    };
    attempt("expected_return", [&] { return expected_return(fund); });
    attempt("sharpe", [&] { return sharpe(fund, ctx); });
    attempt("treynor", [&] { return treynor(fund, ctx); });
    attempt("sortino", [&] { return sortino(fund, ctx); });
    attempt("jensen_alpha", [&] { return jensen_alpha(fund, ctx); });
    attempt("information_ratio", [&] { return information_ratio(fund, ctx); });
    attempt("beta", [&] { return beta(fund, ctx); });
    attempt("std_dev", [&] { return std_dev(fund); });
    attempt("downside_probability", [&] { return downside_probability(fund, ctx); });
    attempt("var_pct_corpus", [&] { return historical_var_pct(fund, ctx); });
    attempt("tracking_error", [&] { return tracking_error(fund, ctx); });
    attempt("upside_capture", [&] { return upside_capture(fund, ctx); });
    attempt("downside_capture", [&] { return downside_capture(fund, ctx); });
    return out;
}

}  // namespace fundbench::metrics
