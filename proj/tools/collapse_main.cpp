// collapse: command-line front end.
//
//   collapse analyze    --corpus FILE [--context-map FILE] [--config FILE] --out DIR
//   collapse simulate   [--plan FILE] [--seed N] --out DIR
//   collapse containers --corpus FILE --origin CTX --scope between|within --out FILE
//                       (also writes the text table next to FILE, extension .txt)
//   collapse keywords   --corpus FILE --labeled FILE --out FILE
//
// Failures print one JSON object on stderr and exit nonzero.

#include "collapse/corpus_io.hpp"
#include "collapse/error.hpp"
#include "collapse/fingerprint.hpp"
#include "collapse/pipeline.hpp"
#include "collapse/report.hpp"
#include "collapse/simulator.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace collapse;

namespace {

struct CommonOptions {
    std::string corpus;
    std::string context_map;
    std::string config;
    std::string suffix_table;
    std::string out;
    std::optional<std::size_t> exact_limit;
    std::uint64_t seed = 0;
    bool debug = false;
};

void report_error(const std::string& kind, const std::string& message) {
    nlohmann::json line = {{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << line.dump() << '\n';
}

struct LoadedInput {
    CrawlRecordSet corpus;
    AnalysisConfig config;
    std::vector<fs::path> inputs;
    std::vector<fs::path> configs;
};

LoadedInput load_input(const CommonOptions& options) {
    LoadedInput in;
    std::optional<SuffixTable> table;
    LoadStats stats;
    LoadOptions load_options;
    if (!options.suffix_table.empty()) {
        table = SuffixTable::load(options.suffix_table);
        load_options.suffix_table = &*table;
    }
    if (options.debug) load_options.stats = &stats;
    std::optional<fs::path> map_path;
    if (!options.context_map.empty()) {
        map_path = options.context_map;
        if (!fs::exists(*map_path)) throw IoError("context map not found: " + map_path->string());
    }
    in.corpus = load_corpus(options.corpus, map_path, load_options);
    in.inputs.push_back(options.corpus);
    if (map_path) in.inputs.push_back(*map_path);
    if (!options.config.empty()) {
        in.config = AnalysisConfig::load(options.config);
        in.configs.push_back(options.config);
    }
    if (options.exact_limit) in.config.coloring.exact_node_limit = *options.exact_limit;
    if (options.debug) {
        std::cerr << "visit lines: " << stats.visit_lines << '\n';
        for (const auto& [domain, hosts] : stats.host_variants) {
            for (const auto& [host, count] : hosts) std::cerr << domain << '\t' << host << '\t' << count << '\n';
        }
    }
    return in;
}

std::string digest_of(const std::vector<fs::path>& paths) {
    std::string joined;
    for (const auto& p : paths) joined += sha256_file(p) + "\n";
    return sha256_hex(joined);
}

void write_manifest(const fs::path& dir, RunManifest manifest) {
    manifest.tool_version = tool_version();
    write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

int cmd_analyze(const CommonOptions& options) {
    auto input = load_input(options);
    auto result = run_pipeline(input.corpus, input.config);
    auto written = write_analysis(result, input.corpus, options.out);
    RunManifest manifest;
    manifest.subcommand = "analyze";
    manifest.inputs = input.inputs;
    manifest.configs = input.configs;
    manifest.output_dir = options.out;
    manifest.corpus_digest = digest_of(input.inputs);
    manifest.outputs = written;
    write_manifest(options.out, manifest);
    std::cout << "wrote " << written.size() + 1 << " files to " << options.out << '\n';
    return 0;
}

int cmd_simulate(const std::string& plan_path, std::optional<std::uint64_t> seed, const std::string& out) {
    SimPlan plan = plan_path.empty() ? SimPlan::default_plan() : SimPlan::load(plan_path);
    if (seed) plan.seed = *seed;
    auto sim = generate(plan);
    fs::create_directories(out);
    std::ostringstream corpus_text, map_text;
    write_corpus(sim.corpus, corpus_text);
    write_context_map(sim.corpus, map_text);
    write_file_atomic(fs::path(out) / "corpus.jsonl", corpus_text.str());
    write_file_atomic(fs::path(out) / "context_map.tsv", map_text.str());
    write_file_atomic(fs::path(out) / "ground_truth.json", sim.truth.to_json().dump(2) + "\n");
    write_file_atomic(fs::path(out) / "plan.json", plan.to_json().dump(2) + "\n");
    RunManifest manifest;
    manifest.subcommand = "simulate";
    if (!plan_path.empty()) manifest.configs.push_back(plan_path);
    manifest.output_dir = out;
    manifest.corpus_digest = sha256_hex(corpus_text.str());
    manifest.outputs = {"context_map.tsv", "corpus.jsonl", "ground_truth.json", "plan.json"};
    write_manifest(out, manifest);
    std::cout << "runs=" << sim.corpus.runs.size() << " planted=" << sim.truth.planted_trackers.size()
              << " expected_findings=" << sim.truth.findings.size() << '\n';
    return 0;
}

int cmd_containers(const CommonOptions& options, const std::string& origin, const std::string& scope_text) {
    auto input = load_input(options);
    const ContextLabel context(origin);
    if (std::find(input.corpus.contexts.begin(), input.corpus.contexts.end(), context) == input.corpus.contexts.end())
        throw InputError("unknown context '" + origin + "'");
    const Scope scope = scope_from_string(scope_text);
    auto ids = build_identifiers(input.corpus, input.config);
    auto analysis = analyze(input.corpus, ids, input.config.analysis);
    auto plan = plan_containers(analysis, context, scope, input.config.coloring);
    auto node = containers_json({plan}, scope);
    fs::path out(options.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file_atomic(out, node.dump(2) + "\n");
    std::ostringstream table;
    write_container_table(table, {plan});
    auto table_path = fs::path(out).replace_extension(".txt");
    if (table_path == out) table_path += ".txt";
    write_file_atomic(table_path, table.str());
    std::cout << "num_colors=" << plan.coloring.num_colors << " exact=" << (plan.coloring.exact ? "true" : "false")
              << '\n';
    return 0;
}

int cmd_keywords(const CommonOptions& options, const std::string& labeled_path) {
    auto input = load_input(options);
    auto labeled = load_labeled_scripts(labeled_path, SuffixTable::bundled());
    auto stats = compute_keyword_stats(labeled, input.corpus);
    auto flagged = flag_keywords(stats, input.config.thresholds.min_sites, input.config.thresholds.min_ratio);
    std::ostringstream out;
    out << "keyword,site_count,fp_rate,non_fp_rate,likelihood_ratio,flagged\n";
    for (const auto& k : stats) {
        out << csv_field(k.keyword) << ',' << k.site_count << ',' << format_number(k.fp_rate) << ','
            << format_number(k.non_fp_rate) << ',' << format_number(k.likelihood_ratio) << ','
            << (flagged.contains(k.keyword) ? "yes" : "no") << '\n';
    }
    write_file_atomic(options.out, out.str());
    std::cout << "flagged " << flagged.size() << " of " << stats.size() << " keywords\n";
    return 0;
}

void add_input_flags(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--corpus", options.corpus, "Corpus file (JSON Lines)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--context-map", options.context_map, "Site-to-context map (TSV)");
    cmd->add_option("--config", options.config, "Analysis config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--suffix-table", options.suffix_table, "Public suffix list replacing the bundled snapshot")
        ->check(CLI::ExistingFile);
    cmd->add_option("--exact-limit", options.exact_limit, "Largest graph coloured exactly");
    cmd->add_option("--seed", options.seed, "Seed (recorded; analysis is deterministic)");
    cmd->add_flag("--debug", options.debug, "Print per-subdomain counts to stderr");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-collapse analysis of multi-context crawl data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    CommonOptions analyze_options;
    auto* analyze_cmd = app.add_subcommand("analyze", "Run the full pipeline and write every report");
    add_input_flags(analyze_cmd, analyze_options);
    analyze_cmd->add_option("--out", analyze_options.out, "Output directory")->required();

    std::string plan_path, sim_out;
    std::optional<std::uint64_t> sim_seed;
    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic corpus with ground truth");
    simulate_cmd->add_option("--plan", plan_path, "Simulation plan (JSON); default plan when omitted")
        ->check(CLI::ExistingFile);
    simulate_cmd->add_option("--seed", sim_seed, "Override the plan seed");
    simulate_cmd->add_option("--out", sim_out, "Output directory")->required();

    CommonOptions containers_options;
    std::string origin, scope = "between";
    auto* containers_cmd = app.add_subcommand("containers", "Colour one context's site graph into containers");
    add_input_flags(containers_cmd, containers_options);
    containers_cmd->add_option("--origin", origin, "Context to analyse")->required();
    containers_cmd->add_option("--scope", scope, "between or within")
        ->check(CLI::IsMember({"between", "within"}));
    containers_cmd->add_option("--out", containers_options.out, "Output JSON file")->required();

    CommonOptions keywords_options;
    std::string labeled_path;
    auto* keywords_cmd = app.add_subcommand("keywords", "Keyword statistics from labeled scripts");
    add_input_flags(keywords_cmd, keywords_options);
    keywords_cmd->add_option("--labeled", labeled_path, "Labeled scripts (JSON Lines)")
        ->required()
        ->check(CLI::ExistingFile);
    keywords_cmd->add_option("--out", keywords_options.out, "Output CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_options);
        if (simulate_cmd->parsed()) return cmd_simulate(plan_path, sim_seed, sim_out);
        if (containers_cmd->parsed()) return cmd_containers(containers_options, origin, scope);
        if (keywords_cmd->parsed()) return cmd_keywords(keywords_options, labeled_path);
    } catch (const Error& e) {
        report_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 1;
}
