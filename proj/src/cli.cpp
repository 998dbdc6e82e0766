#include "fundbench/cli.hpp"

#include "fundbench/csv.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fundbench::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string_view to_string(Grouping grouping) { return grouping == Grouping::All ? "all" : "sub-category"; }

void Diagnostics::warn(std::string message) {
    std::cerr << "warning: " << message << '\n';
    entries_.push_back({Diagnostic::Level::Warning, std::move(message)});
}

void Diagnostics::error(std::string message) {
    std::cerr << "error: " << message << '\n';
    entries_.push_back({Diagnostic::Level::Error, std::move(message)});
}

bool Diagnostics::has_errors() const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [](const Diagnostic& d) { return d.level == Diagnostic::Level::Error; });
}

std::vector<scenario::ScenarioSpec> RunConfig::active_scenarios() const {
    auto specs = scenarios.empty() ? scenario::builtin_scenarios() : scenarios;
    for (auto& s : specs) s.dea = dea;
    return specs;
}

void RunConfig::validate() const {
    if (metric_table && nav_panel) {
        throw ConfigError("give either a metric table or a NAV panel, not both");
    }
    if (nav_panel && !benchmark) throw ConfigError("a NAV panel needs a benchmark file");
    try {
        dea.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(var_confidence > 0.5 && var_confidence < 1.0)) throw ConfigError("var_confidence must lie in (0.5, 1)");
    if (filter.min_corpus < 0.0) throw ConfigError("min_corpus must be nonnegative");
    std::set<std::string> names;
    for (const auto& s : active_scenarios()) {
        try {
            s.validate();
        } catch (const scenario::ScenarioError& e) {
            throw ConfigError(e.what());
        }
        if (!names.insert(s.name).second) throw ConfigError("scenario '" + s.name + "' is listed twice");
    }
}

// ---------------------------------------------------------------------------
// Parsing helpers shared by the config file and the command line.

namespace {

dea::ReturnsToScale parse_rts(const std::string& s) {
    if (s == "crs") return dea::ReturnsToScale::Constant;
    if (s == "vrs") return dea::ReturnsToScale::Variable;
    throw ConfigError("rts must be crs or vrs, got '" + s + "'");
}

dea::Orientation parse_orientation(const std::string& s) {
    if (s == "input") return dea::Orientation::Input;
    if (s == "output") return dea::Orientation::Output;
    throw ConfigError("orientation must be input or output, got '" + s + "'");
}

dea::SlackStage parse_slack(const std::string& s) {
    if (s == "off") return dea::SlackStage::Off;
    if (s == "maximize") return dea::SlackStage::Maximize;
    throw ConfigError("slack_stage must be off or maximize, got '" + s + "'");
}

dea::Positivity parse_positivity(const std::string& s) {
    if (s == "strict") return dea::Positivity::Strict;
    if (s == "translate") return dea::Positivity::Translate;
    throw ConfigError("positivity must be strict or translate, got '" + s + "'");
}

Grouping parse_grouping(const std::string& s) {
    if (s == "all") return Grouping::All;
    if (s == "sub-category" || s == "sub_category") return Grouping::BySubCategory;
    throw ConfigError("group-by must be all or sub-category, got '" + s + "'");
}

report::Format parse_format(const std::string& s) {
    if (s == "csv") return report::Format::Csv;
    if (s == "markdown" || s == "md") return report::Format::Markdown;
    if (s == "json") return report::Format::Json;
    throw ConfigError("format must be csv, markdown or json, got '" + s + "'");
}

report::EfficiencyRule parse_rule(const std::string& s) {
    if (s == "any" || s == "any_scenario") return report::EfficiencyRule::AnyScenario;
    if (s == "all" || s == "all_scenarios") return report::EfficiencyRule::AllScenarios;
    throw ConfigError("efficiency rule must be any or all, got '" + s + "'");
}

Date parse_date_or_throw(const std::string& s, std::string_view what) {
    auto d = parse_iso_date(s);
    if (!d) throw ConfigError(std::string(what) + " must be an ISO-8601 date, got '" + s + "'");
    return *d;
}

scenario::ScenarioSpec resolve_builtin(const std::string& name) {
    try {
        return scenario::builtin_scenario(name);
    } catch (const scenario::ScenarioError& e) {
        throw ConfigError(e.what());
    }
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

}  // namespace

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");

    const fs::path base = path.parent_path();
    auto resolve = [&](const Json& v) {
        fs::path p = v.get<std::string>();
        return p.is_relative() ? base / p : p;
    };

    RunConfig cfg;
    try {
        reject_unknown_keys(doc,
                            {"metric_table", "nav_panel", "benchmark", "fund_profiles", "ranks", "flags", "as_of",
                             "filter", "market", "dea", "group_by", "scenarios", "efficiency_rule", "format", "out"},
                            "config");
        if (doc.contains("metric_table")) cfg.metric_table = resolve(doc["metric_table"]);
        if (doc.contains("nav_panel")) cfg.nav_panel = resolve(doc["nav_panel"]);
        if (doc.contains("benchmark")) cfg.benchmark = resolve(doc["benchmark"]);
        if (doc.contains("fund_profiles")) cfg.fund_profiles = resolve(doc["fund_profiles"]);
        if (doc.contains("ranks")) cfg.ranks = resolve(doc["ranks"]);
        if (doc.contains("flags")) cfg.flags = resolve(doc["flags"]);
        if (doc.contains("out")) cfg.out_dir = resolve(doc["out"]);
        if (doc.contains("as_of")) cfg.as_of = parse_date_or_throw(doc["as_of"].get<std::string>(), "as_of");
        if (doc.contains("group_by")) cfg.grouping = parse_grouping(doc["group_by"].get<std::string>());
        if (doc.contains("format")) cfg.format = parse_format(doc["format"].get<std::string>());
        if (doc.contains("efficiency_rule")) cfg.efficiency_rule = parse_rule(doc["efficiency_rule"].get<std::string>());

        if (doc.contains("filter")) {
            const Json& f = doc["filter"];
            reject_unknown_keys(f, {"enabled", "min_corpus", "inception_cutoff", "require_complete"}, "filter");
            cfg.filters_enabled = f.value("enabled", true);
            cfg.filter.min_corpus = f.value("min_corpus", cfg.filter.min_corpus);
            cfg.filter.require_complete = f.value("require_complete", cfg.filter.require_complete);
            if (f.contains("inception_cutoff")) {
                cfg.filter.inception_cutoff =
                    parse_date_or_throw(f["inception_cutoff"].get<std::string>(), "inception_cutoff");
            }
        }
        if (doc.contains("market")) {
            const Json& m = doc["market"];
            reject_unknown_keys(m, {"risk_free", "mar", "var_confidence"}, "market");
            cfg.risk_free = m.value("risk_free", cfg.risk_free);
            cfg.mar = m.value("mar", cfg.mar);
            cfg.var_confidence = m.value("var_confidence", cfg.var_confidence);
        }
        if (doc.contains("dea")) {
            const Json& d = doc["dea"];
            reject_unknown_keys(d, {"rts", "orientation", "epsilon", "slack_stage", "positivity"}, "dea");
            if (d.contains("rts")) cfg.dea.returns_to_scale = parse_rts(d["rts"].get<std::string>());
            if (d.contains("orientation")) cfg.dea.orientation = parse_orientation(d["orientation"].get<std::string>());
            if (d.contains("epsilon")) cfg.dea.epsilon = d["epsilon"].get<double>();
            if (d.contains("slack_stage")) cfg.dea.slack_stage = parse_slack(d["slack_stage"].get<std::string>());
            if (d.contains("positivity")) cfg.dea.positivity = parse_positivity(d["positivity"].get<std::string>());
        }
        if (doc.contains("scenarios")) {
            for (const Json& s : doc["scenarios"]) {
                if (s.is_string()) {
                    cfg.scenarios.push_back(resolve_builtin(s.get<std::string>()));
                    continue;
                }
                reject_unknown_keys(s, {"name", "inputs", "outputs", "ir_standardize"}, "scenario block");
                scenario::ScenarioSpec spec;
                spec.name = s.at("name").get<std::string>();
                spec.input_fields = s.at("inputs").get<std::vector<std::string>>();
                if (s.contains("outputs")) spec.output_fields = s["outputs"].get<std::vector<std::string>>();
                spec.ir_standardize = s.value("ir_standardize", false);
                cfg.scenarios.push_back(std::move(spec));
            }
            if (cfg.scenarios.empty()) throw ConfigError("scenario list is empty");
        }
    } catch (const Json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Pipeline stages

namespace {

constexpr std::string_view kAllGroup = "all";
constexpr std::string_view kNoSubCategory = "(none)";

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

std::string describe(const scenario::ScenarioSpec& s) {
    std::string out;
    for (std::size_t k = 0; k < s.input_fields.size(); ++k) {
        if (k) out += "+";
        out += s.input_fields[k];
        if (s.ir_standardize && s.input_fields[k] == "information_ratio") out += "*";
    }
    out += " -> ";
    for (std::size_t k = 0; k < s.output_fields.size(); ++k) {
        if (k) out += "+";
        out += s.output_fields[k];
    }
    return out;
}

report::RunHeader base_header(const RunConfig& cfg, std::string_view command) {
    report::RunHeader h;
    h.emplace_back("command", std::string(command));
    if (cfg.metric_table) h.emplace_back("metric_table", cfg.metric_table->generic_string());
    if (cfg.nav_panel) h.emplace_back("nav_panel", cfg.nav_panel->generic_string());
    if (cfg.benchmark) h.emplace_back("benchmark", cfg.benchmark->generic_string());
    if (cfg.fund_profiles) h.emplace_back("fund_profiles", cfg.fund_profiles->generic_string());
    if (cfg.ranks) h.emplace_back("ranks", cfg.ranks->generic_string());
    if (cfg.flags) h.emplace_back("flags", cfg.flags->generic_string());
    h.emplace_back("peer_set", cfg.grouping == Grouping::All ? "all funds benchmarked together"
                                                              : "each sub-category benchmarked separately");
    h.emplace_back("group_by", std::string(to_string(cfg.grouping)));
    h.emplace_back("rts", std::string(dea::to_string(cfg.dea.returns_to_scale)));
    h.emplace_back("orientation", std::string(dea::to_string(cfg.dea.orientation)));
    h.emplace_back("epsilon", csv::format_number(cfg.dea.epsilon));
    h.emplace_back("slack_stage", std::string(dea::to_string(cfg.dea.slack_stage)));
    h.emplace_back("positivity", std::string(dea::to_string(cfg.dea.positivity)));
    for (const auto& s : cfg.active_scenarios()) h.emplace_back("scenario " + s.name, describe(s));
    h.emplace_back("as_of", format_iso_date(cfg.as_of));
    if (cfg.filters_enabled) {
        h.emplace_back("filter", "min_corpus=" + csv::format_number(cfg.filter.min_corpus) +
                                     " inception_cutoff=" + format_iso_date(cfg.filter.inception_cutoff) +
                                     " require_complete=" + (cfg.filter.require_complete ? "true" : "false"));
    } else {
        h.emplace_back("filter", "disabled");
    }
    h.emplace_back("market", "risk_free=" + csv::format_number(cfg.risk_free) + " mar=" + csv::format_number(cfg.mar) +
                                 " var_confidence=" + csv::format_number(cfg.var_confidence));
    h.emplace_back("efficiency_tolerance", csv::format_number(report::kEfficiencyTolerance));
    return h;
}

fs::path output_path(const RunConfig& cfg, const std::string& stem) {
    return cfg.out_dir / (stem + "." + std::string(report::extension(cfg.format)));
}

std::vector<io::DmuRecord> records_from_panel(const RunConfig& cfg, Diagnostics& diag) {
    io::ReturnPanel panel = io::load_return_panel(*cfg.nav_panel, *cfg.benchmark);
    metrics::MarketContext ctx = panel.context;
    ctx.risk_free_rate = cfg.risk_free;
    ctx.minimum_acceptable_return = cfg.mar;
    ctx.var_confidence = cfg.var_confidence;
    ctx.validate();

    std::map<std::string, io::FundProfile> profiles;
    if (cfg.fund_profiles) {
        for (auto& p : io::load_fund_profiles(*cfg.fund_profiles)) profiles.emplace(io::normalize_name(p.name), p);
    }

    std::vector<io::DmuRecord> out;
    for (const auto& fund : panel.funds) {
        try {
            fund.validate();
        } catch (const metrics::MetricError& e) {
            diag.error(e.what());
            continue;
        }
        metrics::MetricComputation comp = metrics::compute_metrics(fund, ctx);
        for (const auto& w : comp.warnings) diag.warn("fund '" + fund.fund_id + "': " + w);
        if (comp.misaligned > 0) {
            diag.warn("fund '" + fund.fund_id + "': " + std::to_string(comp.misaligned) +
                      " observation(s) dropped aligning with the benchmark");
        }
        io::DmuRecord rec;
        rec.name = fund.fund_id;
        rec.metrics = comp.metrics;
        const auto it = profiles.find(io::normalize_name(fund.fund_id));
        if (it != profiles.end()) {
            const auto& p = it->second;
            rec.category = p.category;
            rec.sub_category = p.sub_category;
            rec.corpus_crore = p.corpus_crore;
            rec.inception_date = p.inception_date;
            rec.metrics.expense_ratio = p.expense_ratio;
            rec.metrics.exit_load = p.exit_load;
        } else if (cfg.fund_profiles) {
            diag.warn("fund '" + fund.fund_id + "' has no profile row");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<io::DmuRecord> load_records(const RunConfig& cfg, Diagnostics& diag) {
    if (cfg.metric_table) return io::load_metric_table(*cfg.metric_table);
    if (cfg.nav_panel) return records_from_panel(cfg, diag);
    throw ConfigError("no input given: pass --input (metric table) or --input with --benchmark (NAV panel)");
}

std::vector<std::string> required_fields(const RunConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& s : cfg.active_scenarios()) {
        for (const auto* list : {&s.input_fields, &s.output_fields}) {
            for (const auto& f : *list) {
                if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
            }
        }
    }
    return out;
}

struct Universe {
    std::vector<io::DmuRecord> records;
    std::vector<io::DroppedRecord> dropped;
};

Universe prepare_universe(const RunConfig& cfg, Diagnostics& diag) {
    Universe u;
    auto records = load_records(cfg, diag);
    if (cfg.filters_enabled) {
        const auto fields = required_fields(cfg);
        io::FilterOutcome f = io::apply_filters(records, cfg.filter, cfg.as_of, fields);
        u.records = std::move(f.kept);
        u.dropped = std::move(f.dropped);
    } else {
        u.records = std::move(records);
    }
    if (cfg.ranks) {
        io::RankJoin join = io::join_external_ranks(std::move(u.records), *cfg.ranks);
        for (const auto& name : join.unmatched_rank_names) diag.warn("rank row '" + name + "' matches no fund");
        u.records = std::move(join.records);
    }
    if (u.records.empty()) diag.warn("no funds remain after filtering");
    return u;
}

void write_filter_report(const RunConfig& cfg, const Universe& u, std::size_t kept) {
    report::Table t;
    t.title = "filter drops";
    t.columns = {"fund", "reason", "detail"};
    std::map<std::string, std::int64_t> counts;
    for (const auto& d : u.dropped) {
        t.rows.push_back({d.record.name, std::string(io::to_string(d.reason)), d.detail});
        ++counts[std::string(io::to_string(d.reason))];
    }
    auto header = base_header(cfg, "filter");
    header.emplace_back("kept", std::to_string(kept));
    for (auto reason : {io::DropReason::MinCorpus, io::DropReason::InceptionCutoff, io::DropReason::Incomplete}) {
        const std::string key(io::to_string(reason));
        header.emplace_back("dropped " + key, std::to_string(counts[key]));
    }
    write_file(output_path(cfg, "filter_drops"), report::render(t, cfg.format, header));
}

struct Group {
    std::string label;
    std::vector<const io::DmuRecord*> members;
};

std::vector<Group> make_groups(const RunConfig& cfg, const std::vector<io::DmuRecord>& records) {
    if (cfg.grouping == Grouping::All) {
        Group g{std::string(kAllGroup), {}};
        for (const auto& r : records) g.members.push_back(&r);
        return {g};
    }
    std::map<std::string, Group> by_label;
    for (const auto& r : records) {
        const std::string label = r.sub_category.empty() ? std::string(kNoSubCategory) : r.sub_category;
        auto& g = by_label[label];
        g.label = label;
        g.members.push_back(&r);
    }
    std::vector<Group> out;
    for (auto& [label, g] : by_label) out.push_back(std::move(g));
    return out;
}

struct ScenarioRun {
    scenario::ScenarioSpec spec;
    std::vector<report::RankedResult> rows;
    report::RunHeader notes;
};

struct DeaOutcome {
    std::vector<ScenarioRun> runs;
    std::vector<Group> groups;
};

DeaOutcome run_dea(const RunConfig& cfg, const Universe& u, Diagnostics& diag) {
    DeaOutcome out;
    out.groups = make_groups(cfg, u.records);
    for (const auto& g : out.groups) {
        if (g.members.size() == 1) {
            diag.warn("group '" + g.label + "' has a single fund; it forms its own frontier and scores 1");
        }
    }
    for (const auto& spec : cfg.active_scenarios()) {
        ScenarioRun run{spec, {}, {}};
        for (const auto& g : out.groups) {
            if (g.members.empty()) continue;
            std::vector<scenario::MetricRow> table;
            for (const auto* r : g.members) table.push_back({r->name, r->metrics});
            try {
                const scenario::AssembledScenario assembled = scenario::assemble(table, spec);
                if (assembled.ir_report) {
                    run.notes.emplace_back("ir_shift[" + g.label + "]",
                                           "X=" + csv::format_number(assembled.ir_report->shift) +
                                               " max_ir=" + csv::format_number(assembled.ir_report->max_ir));
                }
                for (const auto& tr : assembled.translations) {
                    run.notes.emplace_back("translated[" + g.label + "]",
                                           tr.variable + " +" + csv::format_number(tr.shift));
                    diag.warn("scenario '" + spec.name + "', group '" + g.label + "': " +
                              (tr.is_output ? "output '" : "input '") + tr.variable + "' translated by " +
                              csv::format_number(tr.shift) + " to restore positivity");
                }
                auto results = dea::run_scenario(assembled.dataset, spec.dea, spec.name);
                std::map<std::string, int> ranks;
                for (const auto& e : dea::rank(results)) ranks[e.dmu_id] = e.rank;
                for (auto& r : results) {
                    const int rk = ranks.at(r.dmu_id);
                    run.rows.push_back({g.label, std::move(r), rk});
                }
            } catch (const std::exception& e) {
                diag.error("scenario '" + spec.name + "', group '" + g.label + "': " + e.what());
            }
        }
        out.runs.push_back(std::move(run));
    }
    return out;
}

void write_dea_outputs(const RunConfig& cfg, const Universe& u, const DeaOutcome& outcome) {
    for (const auto& run : outcome.runs) {
        auto header = base_header(cfg, "dea");
        header.insert(header.end(), run.notes.begin(), run.notes.end());
        write_file(output_path(cfg, "efficiency_" + run.spec.name),
                   report::render(report::efficiency_table(run.spec.name, run.rows), cfg.format, header));
    }

    // One row per fund with score and rank under every scenario.
    std::vector<std::map<std::string, const report::RankedResult*>> index(outcome.runs.size());
    for (std::size_t s = 0; s < outcome.runs.size(); ++s) {
        for (const auto& row : outcome.runs[s].rows) index[s][row.result.dmu_id] = &row;
    }
    report::Table summary;
    summary.title = "efficiency summary";
    summary.columns = {"group", "dmu"};
    for (const auto& run : outcome.runs) {
        summary.columns.push_back(run.spec.name + " rank");
        summary.columns.push_back(run.spec.name + " efficiency");
    }
    summary.columns.push_back("external_rank");

    std::ostringstream flags;
    std::vector<std::string> flag_header{"name"};
    for (const auto& run : outcome.runs) flag_header.push_back(run.spec.name);
    flags << csv::join(flag_header) << '\n';

    for (const auto& g : outcome.groups) {
        for (const auto* rec : g.members) {
            std::vector<report::Cell> row{g.label, rec->name};
            std::vector<std::string> flag_row{rec->name};
            for (std::size_t s = 0; s < outcome.runs.size(); ++s) {
                const auto it = index[s].find(rec->name);
                if (it == index[s].end()) {
                    row.emplace_back(std::monostate{});
                    row.emplace_back(std::monostate{});
                    flag_row.emplace_back();
                } else {
                    row.emplace_back(static_cast<std::int64_t>(it->second->rank));
                    row.emplace_back(it->second->result.score);
                    flag_row.emplace_back(it->second->result.score >= 1.0 - report::kEfficiencyTolerance ? "1" : "0");
                }
            }
            if (rec->external_rank) row.emplace_back(static_cast<std::int64_t>(*rec->external_rank));
            else row.emplace_back(std::monostate{});
            summary.rows.push_back(std::move(row));
            flags << csv::join(flag_row) << '\n';
        }
    }
    write_file(output_path(cfg, "efficiency_summary"), report::render(summary, cfg.format, base_header(cfg, "dea")));
    write_file(cfg.out_dir / "efficiency_flags.csv", flags.str());
    write_filter_report(cfg, u, u.records.size());
}

bool is_ir_scenario(const RunConfig& cfg, const std::string& name) {
    for (const auto& s : cfg.active_scenarios()) {
        if (s.name == name) return s.ir_standardize;
    }
    return resolve_builtin(name).ir_standardize;
}

std::vector<report::EfficiencyClass> classes_from_flags(const RunConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw io::IoError(io::IoErrorKind::ParseError, "cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw io::IoError(io::IoErrorKind::ParseError, "flags file is empty", 1);
    auto header = csv::split_line(line);
    if (!header || header->size() < 2 || (*header)[0] != "name") {
        throw io::IoError(io::IoErrorKind::ParseError, "flags header must be name,<scenario>...", 1);
    }
    std::vector<bool> ir;
    for (std::size_t k = 1; k < header->size(); ++k) ir.push_back(is_ir_scenario(cfg, (*header)[k]));

    std::vector<report::EfficiencyClass> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (!fields || fields->size() != header->size()) {
            throw io::IoError(io::IoErrorKind::ParseError, "flags line " + std::to_string(line_no) + " is malformed",
                              line_no);
        }
        report::EfficiencyClass c;
        c.dmu_id = (*fields)[0];
        bool complete = true;
        for (std::size_t k = 1; k < fields->size(); ++k) {
            const std::string v((*fields)[k]);
            if (v.empty()) {
                complete = false;
                continue;
            }
            if (v != "0" && v != "1") {
                throw io::IoError(io::IoErrorKind::ParseError,
                                  "flags line " + std::to_string(line_no) + ": expected 0 or 1, got '" + v + "'",
                                  line_no, k + 1);
            }
            c.per_scenario_flags.push_back({(*header)[k], ir[k - 1], v == "1"});
        }
        if (!complete) continue;
        c.kind = report::classify_flags(c.per_scenario_flags);
        out.push_back(std::move(c));
    }
    return out;
}

void write_report_outputs(const RunConfig& cfg, const std::vector<report::EfficiencyClass>& classes,
                          const std::vector<io::DmuRecord>& records, Diagnostics& diag) {
    auto header = base_header(cfg, "report");
    header.emplace_back("efficiency_rule", std::string(report::to_string(cfg.efficiency_rule)));
    std::map<std::string, int> counts;
    for (const auto& c : classes) ++counts[std::string(report::to_string(c.kind))];
    for (const auto& [kind, n] : counts) header.emplace_back("count " + kind, std::to_string(n));
    write_file(output_path(cfg, "classification"),
               report::render(report::classification_table(classes), cfg.format, header));

    if (!cfg.ranks) return;
    try {
        const report::RankCrosstab table = report::crosstab(records, classes, cfg.efficiency_rule);
        auto ct_header = header;
        ct_header.emplace_back("unranked_funds", std::to_string(table.unranked));
        ct_header.emplace_back("ranked_without_class", std::to_string(table.unclassified));
        write_file(output_path(cfg, "crosstab"), report::render(report::crosstab_table(table), cfg.format, ct_header));
    } catch (const report::NoRankedFunds& e) {
        diag.warn(std::string("crosstab skipped: ") + e.what());
    }
}

std::vector<report::EfficiencyClass> classes_from_outcome(const DeaOutcome& outcome, Diagnostics& diag) {
    // Only funds scored in every scenario can be classified.
    std::map<std::string, std::size_t> seen;
    for (const auto& run : outcome.runs) {
        for (const auto& row : run.rows) ++seen[row.result.dmu_id];
    }
    std::set<std::string> complete;
    for (const auto& [id, n] : seen) {
        if (n == outcome.runs.size()) complete.insert(id);
        else diag.warn("fund '" + id + "' is missing from some scenarios and is not classified");
    }
    std::vector<report::ScenarioResults> scenarios;
    for (const auto& run : outcome.runs) {
        report::ScenarioResults s{run.spec.name, run.spec.ir_standardize, {}};
        for (const auto& row : run.rows) {
            if (complete.count(row.result.dmu_id)) s.results.push_back(row.result);
        }
        scenarios.push_back(std::move(s));
    }
    return report::classify(scenarios);
}

void run_dea_and_report(const RunConfig& cfg, Diagnostics& diag, bool write_dea, bool write_report) {
    const Universe u = prepare_universe(cfg, diag);
    const DeaOutcome outcome = run_dea(cfg, u, diag);
    if (write_dea) write_dea_outputs(cfg, u, outcome);
    if (write_report) write_report_outputs(cfg, classes_from_outcome(outcome, diag), u.records, diag);
}

}  // namespace

void cmd_metrics(const RunConfig& cfg, Diagnostics& diag) {
    if (!cfg.nav_panel) throw ConfigError("metrics needs a NAV panel (--input with --benchmark)");
    const auto records = records_from_panel(cfg, diag);
    std::ostringstream out;
    io::write_metric_table(out, records);
    write_file(cfg.out_dir / "metrics.csv", out.str());
}

void cmd_dea(const RunConfig& cfg, Diagnostics& diag) { run_dea_and_report(cfg, diag, true, false); }

void cmd_report(const RunConfig& cfg, Diagnostics& diag) {
    if (!cfg.flags) {
        run_dea_and_report(cfg, diag, false, true);
        return;
    }
    const auto classes = classes_from_flags(cfg, *cfg.flags);
    std::vector<io::DmuRecord> records;
    for (const auto& c : classes) {
        io::DmuRecord rec;
        rec.name = c.dmu_id;
        records.push_back(std::move(rec));
    }
    if (cfg.ranks) {
        io::RankJoin join = io::join_external_ranks(std::move(records), *cfg.ranks);
        for (const auto& name : join.unmatched_rank_names) diag.warn("rank row '" + name + "' matches no fund");
        records = std::move(join.records);
    }
    write_report_outputs(cfg, classes, records, diag);
}

void cmd_pipeline(const RunConfig& cfg, Diagnostics& diag) {
    if (cfg.nav_panel) {
        cmd_metrics(cfg, diag);
        // The metric table written above takes precedence in load_records;
        // the panel paths stay in the config so run headers still name them.
        RunConfig next = cfg;
        next.metric_table = cfg.out_dir / "metrics.csv";
        run_dea_and_report(next, diag, true, true);
        return;
    }
    run_dea_and_report(cfg, diag, true, true);
}

// ---------------------------------------------------------------------------
// Command line

int run(int argc, char** argv) {
    CLI::App app{"fundbench: data envelopment analysis benchmarking of mutual funds"};
    app.require_subcommand(1);

    struct Options {
        std::string config, input, benchmark, profiles, ranks, flags, group_by, rts, orientation, slack, positivity,
            format, out, rule, as_of;
        double epsilon = 0, min_corpus = 0, risk_free = 0, mar = 0, var_confidence = 0;
        std::vector<std::string> scenarios;
        bool no_filter = false;
    } o;
    std::map<std::string, CLI::Option*> opts;

    auto add_common = [&](CLI::App* sub) {
        opts["config"] = sub->add_option("--config", o.config, "JSON run configuration");
        opts["input"] = sub->add_option("--input", o.input, "metric table, or NAV panel when --benchmark is given");
        opts["benchmark"] = sub->add_option("--benchmark", o.benchmark, "benchmark NAV file (date,nav)");
        opts["profiles"] = sub->add_option("--profiles", o.profiles, "fund profile CSV for NAV panels");
        opts["ranks"] = sub->add_option("--ranks", o.ranks, "external ranks CSV (name,rank)");
        opts["flags"] = sub->add_option("--flags", o.flags, "efficiency flags CSV used instead of solving");
        opts["group_by"] = sub->add_option("--group-by", o.group_by, "all | sub-category")
                               ->check(CLI::IsMember({"all", "sub-category"}));
        opts["rts"] = sub->add_option("--rts", o.rts, "crs | vrs")->check(CLI::IsMember({"crs", "vrs"}));
        opts["orientation"] = sub->add_option("--orientation", o.orientation, "input | output")
                                  ->check(CLI::IsMember({"input", "output"}));
        opts["epsilon"] = sub->add_option("--epsilon", o.epsilon, "lower bound on multiplier weights");
        opts["slack"] = sub->add_option("--slack-stage", o.slack, "off | maximize")
                            ->check(CLI::IsMember({"off", "maximize"}));
        opts["positivity"] = sub->add_option("--positivity", o.positivity, "strict | translate")
                                 ->check(CLI::IsMember({"strict", "translate"}));
        opts["format"] = sub->add_option("--format", o.format, "csv | markdown | json")
                             ->check(CLI::IsMember({"csv", "markdown", "json"}));
        opts["out"] = sub->add_option("--out", o.out, "output directory");
        opts["scenario"] = sub->add_option("--scenario", o.scenarios, "built-in scenario name (repeatable)");
        opts["rule"] = sub->add_option("--efficiency-rule", o.rule, "any | all")->check(CLI::IsMember({"any", "all"}));
        opts["as_of"] = sub->add_option("--as-of", o.as_of, "evaluation date (YYYY-MM-DD)");
        opts["min_corpus"] = sub->add_option("--min-corpus", o.min_corpus, "minimum corpus in crore");
        opts["no_filter"] = sub->add_flag("--no-filter", o.no_filter, "skip the fund-universe filters");
        opts["risk_free"] = sub->add_option("--risk-free", o.risk_free, "per-period risk-free rate");
        opts["mar"] = sub->add_option("--mar", o.mar, "per-period minimum acceptable return");
        opts["var_confidence"] = sub->add_option("--var-confidence", o.var_confidence, "VaR confidence level");
    };
    std::vector<CLI::App*> subs{app.add_subcommand("metrics", "compute the metric table from a NAV panel"),
                                app.add_subcommand("dea", "score every fund under each scenario"),
                                app.add_subcommand("report", "classify funds and crosstab against external ranks"),
                                app.add_subcommand("pipeline", "metrics, dea and report in sequence")};
    for (auto* sub : subs) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    // Options were registered once per subcommand; look them up on the one used.
    CLI::App* used = app.get_subcommands().front();
    auto given = [&](const std::string& flag) { return used->get_option(flag)->count() > 0; };

    Diagnostics diag;
    RunConfig cfg;
    try {
        if (given("--config")) cfg = load_config(o.config);
        if (given("--benchmark")) cfg.benchmark = o.benchmark;
        if (given("--input")) {
            if (cfg.benchmark) {
                cfg.nav_panel = o.input;
                cfg.metric_table.reset();
            } else {
                cfg.metric_table = o.input;
                cfg.nav_panel.reset();
            }
        }
        if (given("--profiles")) cfg.fund_profiles = o.profiles;
        if (given("--ranks")) cfg.ranks = o.ranks;
        if (given("--flags")) cfg.flags = o.flags;
        if (given("--group-by")) cfg.grouping = parse_grouping(o.group_by);
        if (given("--rts")) cfg.dea.returns_to_scale = parse_rts(o.rts);
        if (given("--orientation")) cfg.dea.orientation = parse_orientation(o.orientation);
        if (given("--epsilon")) cfg.dea.epsilon = o.epsilon;
        if (given("--slack-stage")) cfg.dea.slack_stage = parse_slack(o.slack);
        if (given("--positivity")) cfg.dea.positivity = parse_positivity(o.positivity);
        if (given("--format")) cfg.format = parse_format(o.format);
        if (given("--out")) cfg.out_dir = o.out;
        if (given("--efficiency-rule")) cfg.efficiency_rule = parse_rule(o.rule);
        if (given("--as-of")) cfg.as_of = parse_date_or_throw(o.as_of, "--as-of");
        if (given("--min-corpus")) cfg.filter.min_corpus = o.min_corpus;
        if (o.no_filter) cfg.filters_enabled = false;
        if (given("--risk-free")) cfg.risk_free = o.risk_free;
        if (given("--mar")) cfg.mar = o.mar;
        if (given("--var-confidence")) cfg.var_confidence = o.var_confidence;
        if (given("--scenario")) {
            cfg.scenarios.clear();
            for (const auto& name : o.scenarios) cfg.scenarios.push_back(resolve_builtin(name));
        }
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }

    const std::string command = used->get_name();
    try {
        if (command == "metrics") cmd_metrics(cfg, diag);
        else if (command == "dea") cmd_dea(cfg, diag);
        else if (command == "report") cmd_report(cfg, diag);
        else cmd_pipeline(cfg, diag);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const io::IoError& e) {
        diag.error(std::string(io::to_string(e.kind())) + ": " + e.what());
    } catch (const std::exception& e) {
        diag.error(e.what());
    }

    if (!diag.entries().empty()) {
        std::ostringstream log;
        for (const auto& d : diag.entries()) {
            log << (d.level == Diagnostic::Level::Error ? "error: " : "warning: ") << d.message << '\n';
        }
        try {
            write_file(cfg.out_dir / "diagnostics.txt", log.str());
        } catch (const std::exception&) {
            // The messages already went to stderr.
        }
    }
    return diag.has_errors() ? 1 : 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> storage{"fundbench"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fundbench::cli
