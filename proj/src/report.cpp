#include "fundbench/report.hpp"

#include "fundbench/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace fundbench::report {

std::string_view to_string(EfficiencyClassKind kind) {
    switch (kind) {
        case EfficiencyClassKind::EfficientAll: return "EfficientAll";
        case EfficiencyClassKind::EfficientIrOnly: return "EfficientIrOnly";
        case EfficiencyClassKind::EfficientBaseOnly: return "EfficientBaseOnly";
        case EfficiencyClassKind::Mixed: return "Mixed";
        case EfficiencyClassKind::NeverEfficient: return "NeverEfficient";
    }
    return "Unknown";
}

std::string_view to_string(EfficiencyRule rule) {
    return rule == EfficiencyRule::AnyScenario ? "any_scenario" : "all_scenarios";
}

std::string_view to_string(Format format) {
    switch (format) {
        case Format::Csv: return "csv";
        case Format::Markdown: return "markdown";
        case Format::Json: return "json";
    }
    return "csv";
}

std::string_view extension(Format format) {
    switch (format) {
        case Format::Csv: return "csv";
        case Format::Markdown: return "md";
        case Format::Json: return "json";
    }
    return "csv";
}

EfficiencyClassKind classify_flags(std::span<const ScenarioFlag> flags) {
    bool all = true;
    bool none = true;
    bool all_ir = true;
    bool any_ir = false;
    bool all_base = true;
    bool any_base = false;
    for (const auto& f : flags) {
        all = all && f.efficient;
        none = none && !f.efficient;
        if (f.ir_scenario) {
            all_ir = all_ir && f.efficient;
            any_ir = any_ir || f.efficient;
        } else {
            all_base = all_base && f.efficient;
            any_base = any_base || f.efficient;
        }
    }
    if (all) return EfficiencyClassKind::EfficientAll;
    if (none) return EfficiencyClassKind::NeverEfficient;
    if (all_ir && !any_base) return EfficiencyClassKind::EfficientIrOnly;
    if (all_base && !any_ir) return EfficiencyClassKind::EfficientBaseOnly;
    return EfficiencyClassKind::Mixed;
}

std::vector<EfficiencyClass> classify(std::span<const ScenarioResults> scenarios, double tolerance) {
    std::vector<EfficiencyClass> out;
    if (scenarios.empty()) return out;

    std::vector<std::map<std::string, double>> scores(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        for (const auto& r : scenarios[s].results) {
            if (!scores[s].emplace(r.dmu_id, r.score).second) {
                throw ReportError("scenario '" + scenarios[s].name + "' lists DMU '" + r.dmu_id + "' twice");
            }
        }
        if (s > 0) {
            std::set<std::string> a, b;
            for (const auto& [id, v] : scores[0]) a.insert(id);
            for (const auto& [id, v] : scores[s]) b.insert(id);
            if (a != b) {
                throw ReportError("InconsistentDmuSets: scenario '" + scenarios[s].name +
                                  "' covers a different DMU set than '" + scenarios[0].name + "'");
            }
        }
    }

    for (const auto& r : scenarios.front().results) {
        EfficiencyClass c;
        c.dmu_id = r.dmu_id;
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            c.per_scenario_flags.push_back(
                {scenarios[s].name, scenarios[s].ir_scenario, scores[s].at(r.dmu_id) >= 1.0 - tolerance});
        }
        c.kind = classify_flags(c.per_scenario_flags);
        out.push_back(std::move(c));
    }
    return out;
}

RankCrosstab crosstab(std::span<const io::DmuRecord> records, std::span<const EfficiencyClass> classes,
                      EfficiencyRule rule) {
    std::map<std::string, const EfficiencyClass*> by_name;
    for (const auto& c : classes) by_name.emplace(io::normalize_name(c.dmu_id), &c);

    RankCrosstab out;
    for (int r = 1; r <= 5; ++r) out.rows.push_back({r, 0, 0, 0});
    std::set<std::string> ranked_names;
    for (const auto& rec : records) {
        const std::string key = io::normalize_name(rec.name);
        const auto it = by_name.find(key);
        if (!rec.external_rank) continue;
        if (it == by_name.end()) {
            ++out.unclassified;
            continue;
        }
        ranked_names.insert(key);
        const auto& flags = it->second->per_scenario_flags;
        const bool efficient =
            rule == EfficiencyRule::AnyScenario
                ? std::any_of(flags.begin(), flags.end(), [](const ScenarioFlag& f) { return f.efficient; })
                : !flags.empty() &&
                      std::all_of(flags.begin(), flags.end(), [](const ScenarioFlag& f) { return f.efficient; });
        auto& row = out.rows[static_cast<std::size_t>(*rec.external_rank - 1)];
        ++row.total;
        ++(efficient ? row.efficient : row.inefficient);
    }
    if (ranked_names.empty()) throw NoRankedFunds("no classified fund carries an external rank");
    for (const auto& c : classes) {
        if (!ranked_names.count(io::normalize_name(c.dmu_id))) ++out.unranked;
    }
    for (const auto& row : out.rows) {
        out.totals.total += row.total;
        out.totals.efficient += row.efficient;
        out.totals.inefficient += row.inefficient;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_decimal(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    std::string s = buf;
    if (s == "-0.0000") s = "0.0000";
    return s;
}

namespace {

using Json = nlohmann::ordered_json;

std::string cell_text(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_decimal(v); }
    };
    return std::visit(Visitor{}, cell);
}

std::string markdown_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r') out.push_back(' ');
        else out.push_back(c);
    }
    return out;
}

Json cell_json(const Cell& cell) {
    struct Visitor {
        Json operator()(std::monostate) const { return nullptr; }
        Json operator()(const std::string& s) const { return s; }
        Json operator()(std::int64_t v) const { return v; }
        Json operator()(double v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

std::string render_csv(const Table& table, const RunHeader& header) {
    std::ostringstream out;
    if (!table.title.empty()) out << "# table: " << table.title << '\n';
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << '\n';
    out << csv::join(table.columns) << '\n';
    for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row) fields.push_back(cell_text(c));
        out << csv::join(fields) << '\n';
    }
    return out.str();
}

std::string render_markdown(const Table& table, const RunHeader& header) {
    std::ostringstream out;
    if (!header.empty()) {
        out << "<!--\n";
        for (const auto& [k, v] : header) out << k << ": " << v << '\n';
        out << "-->\n\n";
    }
    if (!table.title.empty()) out << "### " << markdown_escape(table.title) << "\n\n";
    out << '|';
    for (const auto& c : table.columns) out << ' ' << markdown_escape(c) << " |";
    out << "\n|";
    for (std::size_t k = 0; k < table.columns.size(); ++k) out << " --- |";
    out << '\n';
    for (const auto& row : table.rows) {
        out << '|';
        for (const auto& c : row) out << ' ' << markdown_escape(cell_text(c)) << " |";
        out << '\n';
    }
    return out.str();
}

std::string render_json(const Table& table, const RunHeader& header) {
    Json doc;
    doc["title"] = table.title;
    Json run = Json::object();
    for (const auto& [k, v] : header) run[k] = v;
    doc["run"] = run;
    doc["columns"] = table.columns;
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json r = Json::array();
        for (const auto& c : row) r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

}  // namespace

std::string render(const Table& table, Format format, const RunHeader& header) {
    switch (format) {
        case Format::Csv: return render_csv(table, header);
        case Format::Markdown: return render_markdown(table, header);
        case Format::Json: return render_json(table, header);
    }
    return {};
}

ParsedCsv parse_csv(std::string_view text) {
    ParsedCsv out;
    bool have_columns = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!have_columns && line.starts_with("# ")) {
            line.remove_prefix(2);
            const auto sep = line.find(": ");
            if (sep == std::string_view::npos) throw ReportError("malformed CSV header line");
            std::string key(line.substr(0, sep));
            std::string value(line.substr(sep + 2));
            if (key == "table" && out.header.empty() && out.table.title.empty()) {
                out.table.title = value;
            } else {
                out.header.emplace_back(std::move(key), std::move(value));
            }
            continue;
        }
        auto fields = csv::split_line(line);
        if (!fields) throw ReportError("malformed CSV line");
        if (!have_columns) {
            out.table.columns = std::move(*fields);
            have_columns = true;
            continue;
        }
        std::vector<Cell> row;
        for (auto& f : *fields) {
            if (f.empty()) row.emplace_back(std::monostate{});
            else row.emplace_back(std::move(f));
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

ParsedJson parse_json(std::string_view text) {
    const Json doc = Json::parse(text);
    ParsedJson out;
    out.table.title = doc.at("title").get<std::string>();
    for (const auto& [k, v] : doc.at("run").items()) out.header.emplace_back(k, v.get<std::string>());
    out.table.columns = doc.at("columns").get<std::vector<std::string>>();
    for (const auto& r : doc.at("rows")) {
        std::vector<Cell> row;
        for (const auto& c : r) {
            if (c.is_null()) row.emplace_back(std::monostate{});
            else if (c.is_string()) row.emplace_back(c.get<std::string>());
            else if (c.is_number_integer()) row.emplace_back(c.get<std::int64_t>());
            else if (c.is_number_float()) row.emplace_back(c.get<double>());
            else throw ReportError("unexpected JSON cell type");
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

namespace {

std::string join_values(std::span<const double> values) {
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) out.push_back(';');
        out += format_decimal(values[k]);
    }
    return out;
}

}  // namespace

Table efficiency_table(const std::string& scenario, std::span<const RankedResult> rows) {
    Table t;
    t.title = "efficiency: " + scenario;
    t.columns = {"group",           "dmu",            "score",         "rank",          "peers",
                 "projected_inputs", "projected_outputs", "input_weights", "output_weights"};
    for (const auto& row : rows) {
        const auto& r = row.result;
        std::string peers;
        for (std::size_t k = 0; k < r.reference_set.size(); ++k) {
            if (k) peers.push_back(';');
            peers += r.reference_set[k].dmu_id + ":" + format_decimal(r.reference_set[k].lambda);
        }
        t.rows.push_back({row.group, r.dmu_id, r.score, static_cast<std::int64_t>(row.rank), peers,
                          join_values(r.projection.inputs), join_values(r.projection.outputs),
                          join_values(r.input_weights), join_values(r.output_weights)});
    }
    return t;
}

Table classification_table(std::span<const EfficiencyClass> classes) {
    Table t;
    t.title = "efficiency classification";
    t.columns = {"dmu", "class"};
    if (!classes.empty()) {
        for (const auto& f : classes.front().per_scenario_flags) t.columns.push_back(f.scenario);
    }
    for (const auto& c : classes) {
        std::vector<Cell> row{c.dmu_id, std::string(to_string(c.kind))};
        for (const auto& f : c.per_scenario_flags) row.emplace_back(static_cast<std::int64_t>(f.efficient ? 1 : 0));
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table crosstab_table(const RankCrosstab& crosstab) {
    Table t;
    t.title = "external rank crosstab";
    t.columns = {"external_rank", "funds", "efficient", "inefficient"};
    for (const auto& row : crosstab.rows) {
        t.rows.push_back({static_cast<std::int64_t>(row.rank), static_cast<std::int64_t>(row.total),
                          static_cast<std::int64_t>(row.efficient), static_cast<std::int64_t>(row.inefficient)});
    }
    t.rows.push_back({std::string("Total"), static_cast<std::int64_t>(crosstab.totals.total),
                      static_cast<std::int64_t>(crosstab.totals.efficient),
                      static_cast<std::int64_t>(crosstab.totals.inefficient)});
    return t;
}

}  // namespace fundbench::report
