#include "fundbench/data_io.hpp"

#include "fundbench/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace fundbench::io {

namespace {

// Metric-table columns after the five identity columns, mapped to MetricSet.
constexpr std::array<std::pair<std::string_view, std::string_view>, 12> kMetricColumns{{
    {"expected_return", "expected_return"},
    {"beta", "beta"},
    {"std_dev", "std_dev"},
    {"downside_prob", "downside_probability"},
    {"var_pct", "var_pct_corpus"},
    {"expense_ratio", "expense_ratio"},
    {"exit_load", "exit_load"},
    {"sharpe", "sharpe"},
    {"treynor", "treynor"},
    {"sortino", "sortino"},
    {"jensen_alpha", "jensen_alpha"},
    {"information_ratio", "information_ratio"},
}};

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

class CsvReader {
public:
    CsvReader(std::istream& in, std::string_view expected_header, std::string source)
        : in_(in), source_(std::move(source)) {
        std::string header;
        if (!std::getline(in_, header)) {
            throw IoError(IoErrorKind::ParseError, source_ + ": missing header line", 1, 0);
        }
        line_ = 1;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
        if (header != expected_header) {
            throw IoError(IoErrorKind::ParseError,
                          source_ + ": header must be '" + std::string(expected_header) + "', got '" + header + "'", 1,
                          0);
        }
        width_ = std::count(expected_header.begin(), expected_header.end(), ',') + 1;
    }

    bool next(Row& row) {
        std::string text;
        while (std::getline(in_, text)) {
            ++line_;
            if (csv::trim(text).empty()) continue;
            auto fields = csv::split_line(text);
            if (!fields) fail(0, "malformed quoting");
            if (fields->size() != width_) {
                fail(0, "expected " + std::to_string(width_) + " fields, got " + std::to_string(fields->size()));
            }
            row.line = line_;
            row.fields = std::move(*fields);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(std::size_t column, const std::string& reason) const {
        std::string where = source_ + ":" + std::to_string(line_);
        if (column) where += ":" + std::to_string(column);
        throw IoError(IoErrorKind::ParseError, where + ": " + reason, line_, column);
    }

    std::optional<double> number(const Row& row, std::size_t col) const {
        const std::string_view cell = csv::trim(row.fields[col]);
        if (cell.empty()) return std::nullopt;
        auto v = csv::parse_number(cell);
        if (!v) fail(col + 1, "'" + std::string(cell) + "' is not a decimal number");
        return v;
    }

    std::optional<Date> date(const Row& row, std::size_t col) const {
        const std::string_view cell = csv::trim(row.fields[col]);
        if (cell.empty()) return std::nullopt;
        auto d = parse_iso_date(cell);
        if (!d) fail(col + 1, "'" + std::string(cell) + "' is not an ISO-8601 date");
        return d;
    }

    std::string text(const Row& row, std::size_t col, bool required = false) const {
        std::string value(csv::trim(row.fields[col]));
        if (required && value.empty()) fail(col + 1, "value is required");
        return value;
    }

    const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 0;
    std::size_t width_ = 0;
};

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorKind::ParseError, "cannot open '" + path.string() + "'");
    return in;
}

std::string cell(const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); }

}  // namespace

std::string_view to_string(IoErrorKind kind) {
    switch (kind) {
        case IoErrorKind::ParseError: return "ParseError";
        case IoErrorKind::DuplicateFund: return "DuplicateFund";
        case IoErrorKind::NonMonotonicDates: return "NonMonotonicDates";
        case IoErrorKind::RankOutOfRange: return "RankOutOfRange";
    }
    return "Unknown";
}

std::string_view to_string(DropReason reason) {
    switch (reason) {
        case DropReason::MinCorpus: return "MinCorpus";
        case DropReason::InceptionCutoff: return "InceptionCutoff";
        case DropReason::Incomplete: return "Incomplete";
    }
    return "Unknown";
}

std::vector<DmuRecord> read_metric_table(std::istream& in) {
    CsvReader reader(in, kMetricTableHeader, "metric table");
    std::vector<DmuRecord> out;
    std::set<std::string> names;
    Row row;
    while (reader.next(row)) {
        DmuRecord rec;
        rec.name = reader.text(row, 0, true);
        rec.category = reader.text(row, 1);
        rec.sub_category = reader.text(row, 2);
        rec.corpus_crore = reader.number(row, 3);
        rec.inception_date = reader.date(row, 4);
        for (std::size_t k = 0; k < kMetricColumns.size(); ++k) {
            rec.metrics.set(kMetricColumns[k].second, reader.number(row, 5 + k));
        }
        if (rec.corpus_crore && *rec.corpus_crore < 0.0) reader.fail(4, "corpus must be nonnegative");
        if (!names.insert(rec.name).second) {
            throw IoError(IoErrorKind::DuplicateFund, "duplicate fund '" + rec.name + "'", row.line, 1, rec.name);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<DmuRecord> load_metric_table(const std::filesystem::path& path) {
    auto in = open(path);
    return read_metric_table(in);
}

void write_metric_table(std::ostream& out, std::span<const DmuRecord> records) {
    out << kMetricTableHeader << '\n';
    for (const auto& rec : records) {
        std::vector<std::string> fields{rec.name, rec.category, rec.sub_category, cell(rec.corpus_crore),
                                        rec.inception_date ? format_iso_date(*rec.inception_date) : std::string()};
        for (const auto& [column, field] : kMetricColumns) fields.push_back(cell(rec.metrics.get(field)));
        out << csv::join(fields) << '\n';
    }
}

std::vector<FundProfile> read_fund_profiles(std::istream& in) {
    CsvReader reader(in, kProfileHeader, "fund profiles");
    std::vector<FundProfile> out;
    std::set<std::string> names;
    Row row;
    while (reader.next(row)) {
        FundProfile p;
        p.name = reader.text(row, 0, true);
        p.category = reader.text(row, 1);
        p.sub_category = reader.text(row, 2);
        p.corpus_crore = reader.number(row, 3);
        p.inception_date = reader.date(row, 4);
        p.expense_ratio = reader.number(row, 5);
        p.exit_load = reader.number(row, 6);
        if (!names.insert(p.name).second) {
            throw IoError(IoErrorKind::DuplicateFund, "duplicate fund '" + p.name + "'", row.line, 1, p.name);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<FundProfile> load_fund_profiles(const std::filesystem::path& path) {
    auto in = open(path);
    return read_fund_profiles(in);
}

namespace {

struct NavPoint {
    Date date;
    double nav;
};

metrics::ReturnSeries to_returns(const std::string& id, const std::vector<NavPoint>& navs) {
    metrics::ReturnSeries series{id, {}};
    for (std::size_t k = 1; k < navs.size(); ++k) {
        series.observations.push_back({navs[k].date, navs[k].nav / navs[k - 1].nav - 1.0});
    }
    return series;
}

double positive_nav(const CsvReader& reader, const Row& row, std::size_t col) {
    const auto v = reader.number(row, col);
    if (!v) reader.fail(col + 1, "NAV is required");
    if (*v <= 0.0) reader.fail(col + 1, "NAV must be positive");
    return *v;
}

}  // namespace

ReturnPanel read_return_panel(std::istream& funds, std::istream& benchmark) {
    ReturnPanel panel;

    CsvReader fund_reader(funds, kNavHeader, "NAV panel");
    std::vector<std::string> order;
    std::map<std::string, std::vector<NavPoint>> navs;
    Row row;
    while (fund_reader.next(row)) {
        const std::string name = fund_reader.text(row, 0, true);
        const auto date = fund_reader.date(row, 1);
        if (!date) fund_reader.fail(2, "date is required");
        const double nav = positive_nav(fund_reader, row, 2);
        auto [it, inserted] = navs.try_emplace(name);
        if (inserted) order.push_back(name);
        if (!it->second.empty() && !(it->second.back().date < *date)) {
            throw IoError(IoErrorKind::NonMonotonicDates,
                          "fund '" + name + "' dates are not strictly increasing at line " + std::to_string(row.line),
                          row.line, 2, name);
        }
        it->second.push_back({*date, nav});
    }
    for (const auto& name : order) panel.funds.push_back(to_returns(name, navs[name]));

    CsvReader bench_reader(benchmark, kBenchmarkHeader, "benchmark");
    std::vector<NavPoint> bench;
    while (bench_reader.next(row)) {
        const auto date = bench_reader.date(row, 0);
        if (!date) bench_reader.fail(1, "date is required");
        const double nav = positive_nav(bench_reader, row, 1);
        if (!bench.empty() && !(bench.back().date < *date)) {
            throw IoError(IoErrorKind::NonMonotonicDates,
                          "benchmark dates are not strictly increasing at line " + std::to_string(row.line), row.line,
                          1, "benchmark");
        }
        bench.push_back({*date, nav});
    }
    panel.context.benchmark = to_returns("benchmark", bench);
    return panel;
}

ReturnPanel load_return_panel(const std::filesystem::path& fund_path, const std::filesystem::path& benchmark_path) {
    auto funds = open(fund_path);
    auto bench = open(benchmark_path);
    return read_return_panel(funds, bench);
}

FilterOutcome apply_filters(std::span<const DmuRecord> records, const FilterPolicy& policy, Date as_of,
                            std::span<const std::string> required_fields) {
    FilterOutcome out;
    for (const auto& rec : records) {
        if (rec.corpus_crore && *rec.corpus_crore < policy.min_corpus) {
            out.dropped.push_back({rec, DropReason::MinCorpus,
                                   "corpus " + csv::format_number(*rec.corpus_crore) + " below " +
                                       csv::format_number(policy.min_corpus)});
            continue;
        }
        if (rec.inception_date && (*rec.inception_date > policy.inception_cutoff || *rec.inception_date > as_of)) {
            out.dropped.push_back({rec, DropReason::InceptionCutoff,
                                   "incepted " + format_iso_date(*rec.inception_date) + ", after " +
                                       format_iso_date(std::min(policy.inception_cutoff, as_of))});
            continue;
        }
        if (policy.require_complete) {
            std::string missing;
            if (!rec.corpus_crore) missing = "corpus_crore";
            if (missing.empty() && !rec.inception_date) missing = "inception_date";
            for (const auto& field : required_fields) {
                if (!missing.empty()) break;
                if (!rec.metrics.get(field)) missing = field;
            }
            if (!missing.empty()) {
                out.dropped.push_back({rec, DropReason::Incomplete, "missing " + missing});
                continue;
            }
        }
        out.kept.push_back(rec);
    }
    return out;
}

std::string normalize_name(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

RankJoin join_external_ranks(std::vector<DmuRecord> records, std::istream& ranks) {
    CsvReader reader(ranks, kRanksHeader, "ranks");
    std::vector<std::pair<std::string, int>> rows;
    std::set<std::string> seen;
    Row row;
    while (reader.next(row)) {
        const std::string name = reader.text(row, 0, true);
        const std::string text = reader.text(row, 1, true);
        int rank = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rank);
        if (ec != std::errc{} || ptr != text.data() + text.size()) reader.fail(2, "'" + text + "' is not an integer");
        if (rank < 1 || rank > 5) {
            throw IoError(IoErrorKind::RankOutOfRange,
                          "rank " + text + " for '" + name + "' is outside 1..5", row.line, 2, name);
        }
        if (!seen.insert(normalize_name(name)).second) {
            throw IoError(IoErrorKind::DuplicateFund, "duplicate rank row for '" + name + "'", row.line, 1, name);
        }
        rows.emplace_back(name, rank);
    }

    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < records.size(); ++k) index.emplace(normalize_name(records[k].name), k);

    RankJoin out;
    for (const auto& [name, rank] : rows) {
        const auto it = index.find(normalize_name(name));
        if (it == index.end()) {
            out.unmatched_rank_names.push_back(name);
            continue;
        }
        records[it->second].external_rank = rank;
    }
    out.records = std::move(records);
    return out;
}

RankJoin join_external_ranks(std::vector<DmuRecord> records, const std::filesystem::path& ranks_path) {
    auto in = open(ranks_path);
    return join_external_ranks(std::move(records), in);
}

}  // namespace fundbench::io
