#include "collapse/error.hpp"
#include "collapse/pipeline.hpp"
#include "collapse/report.hpp"
#include "collapse/simulator.hpp"

#include "fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace collapse;
namespace fs = std::filesystem;

namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("CSV fields") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("News & Media") == "News & Media");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_field("") == "");
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0.0000");
    CHECK(format_number(-0.0) == "0.0000");
    CHECK(format_number(-0.00001) == "0.0000");
    CHECK(format_number(2.0 / 3.0) == "0.6667");
    CHECK(format_number(1234.5) == "1234.5000");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("frozen headers") {
    std::ostringstream between, within, coverage, anova;
    write_collapse_csv(between, {}, Scope::between);
    write_collapse_csv(within, {}, Scope::within);
    CHECK(between.str() ==
          "First Context,Average unique third-parties,Average number of cookies,Average of Persistent Identifiers,"
          "Percentage of Persistent Identifiers,Participating Websites in Context Collapse\n");
    CHECK(within.str() ==
          "Context,Average unique third-parties,Average number of cookies,Average of Persistent Identifiers,"
          "Percentage of Persistent Identifiers,Participating Websites in Context Collapse\n");

    std::ostringstream seven, two;
    write_diffusion_csv(seven, {}, 7);
    CHECK(seven.str() ==
          "First Context,Average Number of Persistent Identifiers,One Context Diffusion,Two Contexts Diffusion,"
          "Three Contexts Diffusion,Four Contexts Diffusion,Five Contexts Diffusion,Diffusion across all contexts\n");
    write_diffusion_csv(two, {}, 2);
    CHECK(two.str() == "First Context,Average Number of Persistent Identifiers,Diffusion across all contexts\n");

    CrawlRecordSet empty;
    auto analysis = analyze(empty, {});
    write_coverage_csv(coverage, analysis, Scope::between);
    CHECK(coverage.str() == "First Context,Tracker,Percentage of Websites,Websites\n");
    write_anova_csv(anova, {});
    CHECK(anova.str() == "metric,source,SS,df,MS,F,p\n");
}

TEST_CASE("diffusion rows") {
    DiffusionHistogram h{ContextLabel("News & Media, Inc"), {25.0, 0.0, 75.0}, 2.5, 2};
    std::ostringstream out;
    write_diffusion_csv(out, {h}, 4);
    CHECK(out.str().substr(out.str().find('\n') + 1) == "\"News & Media, Inc\",2.5000,25.0000,0.0000,75.0000\n");
}

TEST_CASE("container table") {
    ContainerPlan plan;
    plan.origin_context = ContextLabel("lgbtq");
    plan.coloring.color_of = {{"a.com", 0}, {"b.com", 1}, {"c.com", 0}};
    plan.coloring.num_colors = 2;
    std::ostringstream out;
    write_container_table(out, {plan, plan});
    CHECK(out.str() ==
          "First Context: lgbtq\nColor\tFirst-party websites\n1\t[a.com, c.com]\n2\t[b.com]\n\n"
          "First Context: lgbtq\nColor\tFirst-party websites\n1\t[a.com, c.com]\n2\t[b.com]\n");
    std::ostringstream none;
    write_container_table(none, {});
    CHECK(none.str().empty());
}

TEST_CASE("SHA-256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    TempDir dir("collapse_report_sha");
    write_file_atomic(dir.path / "abc.txt", "abc");
    CHECK(sha256_file(dir.path / "abc.txt") == sha256_hex("abc"));
    CHECK_THROWS_AS(sha256_file(dir.path / "missing"), IoError);
}

TEST_CASE("atomic writes leave no temporary file") {
    TempDir dir("collapse_report_atomic");
    write_file_atomic(dir.path / "f.txt", "one");
    write_file_atomic(dir.path / "f.txt", "two");
    CHECK(slurp(dir.path / "f.txt") == "two");
    CHECK_FALSE(fs::exists(dir.path / "f.txt.tmp"));
    CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator()) == 1);
}

TEST_CASE("manifest") {
    RunManifest m;
    m.subcommand = "analyze";
    m.inputs = {"corpus.jsonl"};
    m.output_dir = "out";
    m.tool_version = tool_version();
    m.corpus_digest = sha256_hex("x");
    m.outputs = {"between.csv"};
    auto node = m.to_json();
    CHECK(node.at("subcommand") == "analyze");
    CHECK(node.at("tool_version") == "1.0.0");
    CHECK(node.at("inputs") == nlohmann::json::array({"corpus.jsonl"}));
    CHECK(node.contains("created_at"));
}

TEST_CASE("analysis artifacts on a simulated corpus") {
    auto sim = generate(SimPlan::default_plan());
    auto result = run_pipeline(sim.corpus, {});
    TempDir dir("collapse_report_artifacts");
    auto written = write_analysis(result, sim.corpus, dir.path);
    CHECK(std::is_sorted(written.begin(), written.end()));
    for (const char* name : {"between.csv", "within.csv", "diffusion.csv", "coverage_between.csv",
                             "coverage_within.csv", "anova.csv", "overlap.json", "containers_between.json",
                             "containers_within.json", "containers_between.txt", "containers_within.txt",
                             "findings.json", "report.json", "graph_between_health.dot"}) {
        CHECK_MESSAGE(std::find(written.begin(), written.end(), name) != written.end(), name);
        CHECK(fs::exists(dir.path / name));
    }
    auto between = slurp(dir.path / "between.csv");
    CHECK(line_count(between) == 8);
    auto diffusion = slurp(dir.path / "diffusion.csv");
    CHECK(line_count(diffusion) == 8);
    auto containers = nlohmann::json::parse(slurp(dir.path / "containers_between.json"));
    CHECK(containers.at("schema_version") == 1);
    CHECK(containers.at("contexts").size() == 7);
    auto report = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(report.at("schema_version") == 1);
    CHECK(first_line(slurp(dir.path / "coverage_within.csv")) == "First Context,Tracker,Percentage of Websites,Websites");
}

TEST_CASE("empty corpus gives header-only tables") {
    CrawlRecordSet empty;
    auto result = run_pipeline(empty, {});
    TempDir dir("collapse_report_empty");
    write_analysis(result, empty, dir.path);
    for (const char* name : {"between.csv", "within.csv", "diffusion.csv", "coverage_between.csv", "anova.csv"})
        CHECK(line_count(slurp(dir.path / name)) == 1);
}

TEST_CASE("analysis config") {
    TempDir dir("collapse_report_config");
    std::ofstream(dir.path / "kw.txt") << "Navigator.plugins\n";
    std::ofstream(dir.path / "ok.json") << R"({"min_lifetime_days": 30, "min_sites": 5, "keywords_file": "kw.txt",
                                              "exact_node_limit": 12, "participation_min_degree": 2})";
    std::ofstream(dir.path / "unknown.json") << R"({"min_site": 5})";
    std::ofstream(dir.path / "both.json") << R"({"keywords": ["a"], "keywords_file": "kw.txt"})";
    std::ofstream(dir.path / "negative.json") << R"({"exact_time_budget_ms": -1})";
    std::ofstream(dir.path / "broken.json") << "{";

    auto config = AnalysisConfig::load(dir.path / "ok.json");
    CHECK(config.classifier.min_lifetime_days == 30.0);
    CHECK(config.thresholds.min_sites == 5);
    CHECK(config.keywords_file == dir.path / "kw.txt");
    CHECK(config.coloring.exact_node_limit == 12);
    CHECK(config.analysis.participation_min_degree == 2);
    CHECK(resolve_keywords(CrawlRecordSet{}, config) == KeywordSet{"Navigator.plugins"});
    CHECK(AnalysisConfig::from_json(config.to_json()).to_json() == config.to_json());

    for (const char* bad : {"unknown.json", "both.json", "negative.json", "broken.json"})
        CHECK_THROWS_AS(AnalysisConfig::load(dir.path / bad), ConfigError);
    CHECK_THROWS_AS(AnalysisConfig::load(dir.path / "missing.json"), IoError);

    AnalysisConfig inline_list;
    inline_list.keywords = {"b", "a"};
    CHECK(resolve_keywords(CrawlRecordSet{}, inline_list) == KeywordSet{"a", "b"});
    CHECK(resolve_keywords(CrawlRecordSet{}, AnalysisConfig{}) == default_keywords());
}

TEST_CASE("ANOVA by context on a multi-day corpus") {
    auto plan = random_plan(3, 5, 3, 4);
    auto sim = generate(plan);
    auto result = run_pipeline(sim.corpus, {});
    REQUIRE_FALSE(result.anova.empty());
    for (const auto& row : result.anova) {
        CHECK(row.result.df_between == plan.contexts.size() - 1);
        CHECK(row.result.df_within == plan.contexts.size() * (plan.days - 1));
    }
    // One day per context leaves no within-group degrees of freedom.
    plan.days = 1;
    auto one_day = generate(plan);
    CHECK(run_pipeline(one_day.corpus, {}).anova.empty());
}
