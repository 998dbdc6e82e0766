#include "fundbench/cli.hpp"
#include "fundbench/csv.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <map>

namespace fs = std::filesystem;
using namespace fundbench;
using testsupport::fresh_dir;
using testsupport::slurp;
using testsupport::spit;

namespace {

const fs::path kFixtures = FUNDBENCH_FIXTURE_DIR;
const fs::path kSynthetic = kFixtures / "synthetic";

std::vector<std::string> panel_args(const fs::path& out) {
    return {"--input",    (kSynthetic / "funds.csv").string(),    "--benchmark", (kSynthetic / "benchmark.csv").string(),
            "--profiles", (kSynthetic / "profiles.csv").string(), "--out",       out.string()};
}

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

// Writes a metric table with the columns every built-in scenario needs.
void write_metric_table(const fs::path& path, const std::vector<std::vector<std::string>>& rows) {
    std::string text(io::kMetricTableHeader);
    text += "\n";
    for (const auto& r : rows) {
        // name, sub_category, expected_return, beta, std_dev, downside_prob, var_pct, expense_ratio, ir
        text += r[0] + ",equity," + r[1] + ",1000,2010-01-01," + r[2] + "," + r[3] + "," + r[4] + "," + r[5] + "," +
                r[6] + "," + r[7] + ",1,0.1,0.1,0.1,0.01," + r[8] + "\n";
    }
    spit(path, text);
}

}  // namespace

TEST_CASE("pipeline on the synthetic panel writes every artifact") {
    const auto out = fresh_dir("cli_pipeline");
    const int rc = cli::run(with({"pipeline"}, with(panel_args(out), {"--ranks", (kSynthetic / "ranks.csv").string()})));
    CHECK(rc == 0);
    for (const char* name : {"metrics.csv", "efficiency_3_inputs.csv", "efficiency_4_inputs.csv",
                             "efficiency_5_inputs.csv", "efficiency_ir_4_inputs.csv", "efficiency_ir_5_inputs.csv",
                             "efficiency_summary.csv", "efficiency_flags.csv", "classification.csv", "crosstab.csv",
                             "filter_drops.csv"}) {
        CHECK_MESSAGE(fs::exists(out / name), name);
    }
    // metrics.csv is a valid Schema A table with one row per fund.
    const auto records = io::load_metric_table(out / "metrics.csv");
    CHECK(records.size() == 30);
    CHECK(records[0].metrics.expense_ratio.has_value());
    CHECK(records[0].sub_category == "Large Cap");
    const auto header = slurp(out / "efficiency_ir_4_inputs.csv");
    CHECK(header.find("# ir_shift[all]: X=") != std::string::npos);
    CHECK(header.find("# peer_set: all funds benchmarked together") != std::string::npos);
}

TEST_CASE("pipeline output is byte-identical across runs") {
    const auto a = fresh_dir("cli_det");
    for (const char* format : {"csv", "json"}) {
        std::map<std::string, std::string> first;
        for (int run = 0; run < 2; ++run) {
            fs::remove_all(a);
            REQUIRE(cli::run(with({"pipeline", "--group-by", "sub-category", "--format", format},
                                  with(panel_args(a), {"--ranks", (kSynthetic / "ranks.csv").string()}))) == 0);
            for (const auto& entry : fs::directory_iterator(a)) {
                const auto name = entry.path().filename().string();
                if (run == 0) first[name] = slurp(entry.path());
                else CHECK_MESSAGE(first[name] == slurp(entry.path()), name);
            }
        }
        CHECK(first.size() >= 10);
    }
}

TEST_CASE("grouping by sub-category scores within each group") {
    const auto out = fresh_dir("cli_group");
    REQUIRE(cli::run(with({"pipeline", "--group-by", "sub-category"}, panel_args(out))) == 0);
    const auto parsed = report::parse_csv(slurp(out / "efficiency_3_inputs.csv"));
    std::map<std::string, int> per_group;
    std::map<std::string, bool> has_leader;
    for (const auto& row : parsed.table.rows) {
        const auto group = std::get<std::string>(row[0]);
        ++per_group[group];
        if (std::get<std::string>(row[3]) == "1") has_leader[group] = true;
    }
    CHECK(per_group.size() == 5);
    for (const auto& [g, n] : per_group) {
        CHECK(n == 6);
        CHECK(has_leader[g]);
    }
    CHECK(slurp(out / "efficiency_3_inputs.csv").find("each sub-category benchmarked separately") !=
          std::string::npos);
    // Without ranks only the classification is produced.
    CHECK(fs::exists(out / "classification.csv"));
    CHECK_FALSE(fs::exists(out / "crosstab.csv"));
}

TEST_CASE("unknown scenario is a configuration error before any solve") {
    const auto out = fresh_dir("cli_unknown");
    fs::remove_all(out);
    CHECK(cli::run(with({"dea", "--scenario", "6_inputs"}, panel_args(out))) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("usage errors") {
    CHECK(cli::run(std::vector<std::string>{}) == 2);
    CHECK(cli::run(std::vector<std::string>{"dea", "--rts", "xyz"}) == 2);
    CHECK(cli::run(std::vector<std::string>{"dea", "--epsilon", "0.5", "--input", "x.csv"}) == 2);
    CHECK(cli::run(std::vector<std::string>{"dea"}) == 2);
}

TEST_CASE("missing benchmark file exits with a parse error") {
    const auto out = fresh_dir("cli_nobench");
    const int rc = cli::run({"metrics", "--input", (kSynthetic / "funds.csv").string(), "--benchmark",
                             (out / "missing.csv").string(), "--out", out.string()});
    CHECK(rc == 1);
    CHECK(slurp(out / "diagnostics.txt").find("ParseError") != std::string::npos);
}

TEST_CASE("fund identical to its benchmark leaves information ratio empty") {
    const auto dir = fresh_dir("cli_twin");
    std::string funds = "name,date,nav\n";
    std::string bench = "date,nav\n";
    double nav = 100, other = 50;
    testsupport::Rng rng(2);
    for (int k = 0; k < 30; ++k) {
        const auto d = format_iso_date(testsupport::month_end(k));
        funds += "Twin," + d + "," + csv::format_number(nav) + "\n";
        funds += "Other," + d + "," + csv::format_number(other) + "\n";
        bench += d + "," + csv::format_number(nav) + "\n";
        nav *= 1 + rng.normal(0.01, 0.04);
        other *= 1 + rng.normal(0.01, 0.04);
    }
    spit(dir / "funds.csv", funds);
    spit(dir / "bench.csv", bench);
    const int rc = cli::run({"metrics", "--input", (dir / "funds.csv").string(), "--benchmark",
                             (dir / "bench.csv").string(), "--out", (dir / "out").string()});
    CHECK(rc == 0);
    const auto records = io::load_metric_table(dir / "out" / "metrics.csv");
    REQUIRE(records.size() == 2);
    CHECK(records[0].name == "Twin");
    CHECK_FALSE(records[0].metrics.information_ratio.has_value());
    CHECK(records[0].metrics.beta == doctest::Approx(1.0));
    CHECK(records[1].metrics.information_ratio.has_value());
    CHECK(slurp(dir / "out" / "diagnostics.txt").find("ZeroTrackingError") != std::string::npos);
}

TEST_CASE("single-fund group and failing group") {
    const auto dir = fresh_dir("cli_groups");
    write_metric_table(dir / "m.csv", {
                                          {"A1", "Alpha", "0.12", "0.9", "4", "0.3", "5", "1.0", "0.5"},
                                          {"A2", "Alpha", "0.10", "1.0", "5", "0.4", "6", "1.5", "0.2"},
                                          {"Solo", "Beta", "0.08", "0.8", "3", "0.2", "4", "0.9", "0.1"},
                                          {"C1", "Gamma", "-0.05", "0.8", "3", "0.2", "4", "0.9", "0.1"},
                                          {"C2", "Gamma", "0.07", "0.8", "3", "0.2", "4", "0.9", "0.1"},
                                      });
    const auto out = dir / "out";
    const int rc = cli::run({"dea", "--input", (dir / "m.csv").string(), "--group-by", "sub-category", "--scenario",
                             "3_inputs", "--no-filter", "--out", out.string()});
    CHECK(rc == 1);
    const auto diag = slurp(out / "diagnostics.txt");
    CHECK(diag.find("warning: group 'Beta' has a single fund") != std::string::npos);
    CHECK(diag.find("error: scenario '3_inputs', group 'Gamma'") != std::string::npos);
    CHECK(diag.find("C1") != std::string::npos);
    const auto parsed = report::parse_csv(slurp(out / "efficiency_3_inputs.csv"));
    REQUIRE(parsed.table.rows.size() == 3);
    for (const auto& row : parsed.table.rows) {
        if (std::get<std::string>(row[1]) == "Solo") CHECK(std::get<std::string>(row[2]) == "1.0000");
    }

    // Translating positivity lets the failing group through.
    const auto out2 = dir / "out2";
    CHECK(cli::run({"dea", "--input", (dir / "m.csv").string(), "--group-by", "sub-category", "--scenario", "3_inputs",
                    "--no-filter", "--positivity", "translate", "--out", out2.string()}) == 0);
    CHECK(slurp(out2 / "efficiency_3_inputs.csv").find("translated[Gamma]") != std::string::npos);
}

TEST_CASE("filters apply to metric tables") {
    const auto dir = fresh_dir("cli_filter");
    // Table 2 carries no corpus or inception date, so every row is incomplete.
    const int rc = cli::run({"dea", "--input", (kFixtures / "table2_metrics.csv").string(), "--out",
                             (dir / "out").string()});
    CHECK(rc == 0);
    const auto drops = report::parse_csv(slurp(dir / "out" / "filter_drops.csv"));
    CHECK(drops.table.rows.size() == 16);
    CHECK(std::get<std::string>(drops.table.rows[0][1]) == "Incomplete");
}

TEST_CASE("report from supplied flags and ranks") {
    const auto out = fresh_dir("cli_report");
    const int rc = cli::run({"report", "--flags", (kFixtures / "table5_flags.csv").string(), "--ranks",
                             (kFixtures / "table5_ranks.csv").string(), "--format", "json", "--out", out.string()});
    CHECK(rc == 0);
    const auto ct = report::parse_json(slurp(out / "crosstab.json"));
    REQUIRE(ct.table.rows.size() == 6);
    CHECK(std::get<std::int64_t>(ct.table.rows[0][1]) == 10);
    CHECK(std::get<std::int64_t>(ct.table.rows[0][2]) == 9);

    // No ranked fund matches: crosstab skipped with a warning.
    const auto dir = fresh_dir("cli_noranks");
    spit(dir / "ranks.csv", "name,rank\nNobody,2\n");
    CHECK(cli::run({"report", "--flags", (kFixtures / "table5_flags.csv").string(), "--ranks",
                    (dir / "ranks.csv").string(), "--out", (dir / "out").string()}) == 0);
    CHECK(fs::exists(dir / "out" / "classification.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "crosstab.csv"));
    CHECK(slurp(dir / "out" / "diagnostics.txt").find("crosstab skipped") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
    const auto dir = fresh_dir("cli_config");
    fs::copy(kSynthetic, dir / "data");
    spit(dir / "run.json", R"({
  "nav_panel": "data/funds.csv",
  "benchmark": "data/benchmark.csv",
  "fund_profiles": "data/profiles.csv",
  "out": "results",
  "group_by": "sub-category",
  "dea": {"rts": "vrs", "epsilon": 0},
  "market": {"var_confidence": 0.9},
  "scenarios": ["3_inputs", {"name": "lean", "inputs": ["beta", "expense_ratio"]}]
})");
    const auto cfg = cli::load_config(dir / "run.json");
    CHECK(cfg.dea.returns_to_scale == dea::ReturnsToScale::Variable);
    CHECK(cfg.grouping == cli::Grouping::BySubCategory);
    CHECK(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[1].output_fields == std::vector<std::string>{"expected_return"});
    CHECK(*cfg.nav_panel == dir / "data" / "funds.csv");

    CHECK(cli::run({"pipeline", "--config", (dir / "run.json").string(), "--group-by", "all"}) == 0);
    CHECK(fs::exists(dir / "results" / "efficiency_lean.csv"));
    const auto text = slurp(dir / "results" / "efficiency_lean.csv");
    CHECK(text.find("# group_by: all") != std::string::npos);
    CHECK(text.find("# rts: vrs") != std::string::npos);
    CHECK(text.find("var_confidence=0.9") != std::string::npos);

    spit(dir / "bad.json", R"({"nav_panel": "x", "colour": "blue"})");
    CHECK_THROWS_AS(cli::load_config(dir / "bad.json"), cli::ConfigError);
    CHECK(cli::run({"dea", "--config", (dir / "bad.json").string()}) == 2);
    spit(dir / "broken.json", "{");
    CHECK(cli::run({"dea", "--config", (dir / "broken.json").string()}) == 2);
}
