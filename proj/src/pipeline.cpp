#include "collapse/pipeline.hpp"

#include "collapse/error.hpp"
#include "collapse/json_fields.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>

namespace collapse {

using nlohmann::json;

namespace {

const std::vector<std::string>& pipeline_keys() {
    static const std::vector<std::string> keys = {
        "min_sites",      "min_ratio",        "keywords", "keywords_file", "labeled_scripts", "overrides_file",
        "participation_min_degree", "exact_node_limit", "exact_time_budget_ms"};
    return keys;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& path) {
    std::filesystem::path p(path);
    return p.is_absolute() || base.empty() ? p : base / p;
}

struct MetricSpec {
    const char* name;
    Scope scope;
    std::function<double(const DayMetrics&)> value;
};

const std::vector<MetricSpec>& anova_metrics() {
    static const std::vector<MetricSpec> specs = {
        {"unique_third_parties", Scope::between,
         [](const DayMetrics& m) { return static_cast<double>(m.unique_third_parties); }},
        {"cookie_count", Scope::between, [](const DayMetrics& m) { return static_cast<double>(m.cookie_count); }},
        {"between_persistent_identifiers", Scope::between,
         [](const DayMetrics& m) { return static_cast<double>(m.persistent_identifiers); }},
        {"between_pct_persistent", Scope::between, [](const DayMetrics& m) { return m.pct_persistent; }},
        {"between_participating_pct", Scope::between, [](const DayMetrics& m) { return m.participating_sites_pct; }},
        {"within_persistent_identifiers", Scope::within,
         [](const DayMetrics& m) { return static_cast<double>(m.persistent_identifiers); }},
        {"within_pct_persistent", Scope::within, [](const DayMetrics& m) { return m.pct_persistent; }},
        {"within_participating_pct", Scope::within, [](const DayMetrics& m) { return m.participating_sites_pct; }},
    };
    return specs;
}

}  // namespace

AnalysisConfig AnalysisConfig::from_json(const json& node, const std::filesystem::path& base_dir) {
    require_object(node, "analysis config");
    const auto& classifier_keys = classifier_config_keys();
    const auto& own_keys = pipeline_keys();
    json classifier_node = json::object();
    for (const auto& item : node.items()) {
        if (std::find(classifier_keys.begin(), classifier_keys.end(), item.key()) != classifier_keys.end()) {
            classifier_node[item.key()] = item.value();
        } else if (std::find(own_keys.begin(), own_keys.end(), item.key()) == own_keys.end()) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }
    AnalysisConfig config;
    config.classifier = ClassifierConfig::from_json(classifier_node);
    config.thresholds.min_sites = field_or<std::size_t>(node, "min_sites", config.thresholds.min_sites);
    config.thresholds.min_ratio = field_or<double>(node, "min_ratio", config.thresholds.min_ratio);
    if (config.thresholds.min_ratio < 0.0) throw ConfigError("min_ratio must be non-negative");
    if (node.contains("keywords")) {
        const auto& list = node.at("keywords");
        if (!list.is_array()) throw ConfigError("'keywords' must be an array of strings");
        for (const auto& k : list) {
            if (!k.is_string()) throw ConfigError("'keywords' must be an array of strings");
            config.keywords.push_back(k.get<std::string>());
        }
    }
    if (node.contains("keywords_file"))
        config.keywords_file = resolve(base_dir, field<std::string>(node, "keywords_file"));
    if (node.contains("labeled_scripts"))
        config.labeled_scripts = resolve(base_dir, field<std::string>(node, "labeled_scripts"));
    if (node.contains("overrides_file"))
        config.overrides_file = resolve(base_dir, field<std::string>(node, "overrides_file"));
    if (!config.keywords.empty() + config.keywords_file.has_value() + config.labeled_scripts.has_value() > 1)
        throw ConfigError("use only one of 'keywords', 'keywords_file' and 'labeled_scripts'");
    config.analysis.participation_min_degree =
        field_or<std::size_t>(node, "participation_min_degree", config.analysis.participation_min_degree);
    config.coloring.exact_node_limit = field_or<std::size_t>(node, "exact_node_limit", config.coloring.exact_node_limit);
    auto budget = field_or<std::int64_t>(node, "exact_time_budget_ms", config.coloring.time_budget.count());
    if (budget < 0) throw ConfigError("exact_time_budget_ms must be non-negative");
    config.coloring.time_budget = std::chrono::milliseconds(budget);
    return config;
}

AnalysisConfig AnalysisConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    try {
        return from_json(json::parse(in), path.parent_path());
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json AnalysisConfig::to_json() const {
    json out = classifier.to_json();
    out["min_sites"] = thresholds.min_sites;
    out["min_ratio"] = thresholds.min_ratio;
    if (!keywords.empty()) out["keywords"] = keywords;
    if (keywords_file) out["keywords_file"] = keywords_file->generic_string();
    if (labeled_scripts) out["labeled_scripts"] = labeled_scripts->generic_string();
    if (overrides_file) out["overrides_file"] = overrides_file->generic_string();
    out["participation_min_degree"] = analysis.participation_min_degree;
    out["exact_node_limit"] = coloring.exact_node_limit;
    out["exact_time_budget_ms"] = coloring.time_budget.count();
    return out;
}

KeywordSet resolve_keywords(const CrawlRecordSet& corpus, const AnalysisConfig& config,
                            std::vector<KeywordStats>* stats) {
    if (config.labeled_scripts) {
        auto labeled = load_labeled_scripts(*config.labeled_scripts, SuffixTable::bundled());
        auto computed = compute_keyword_stats(labeled, corpus);
        auto flagged = flag_keywords(computed, config.thresholds.min_sites, config.thresholds.min_ratio);
        if (stats) *stats = std::move(computed);
        return flagged;
    }
    if (!config.keywords.empty()) return {config.keywords.begin(), config.keywords.end()};
    if (config.keywords_file) return load_keyword_list(*config.keywords_file);
    return default_keywords();
}

Identifiers build_identifiers(const CrawlRecordSet& corpus, const AnalysisConfig& config,
                              std::vector<KeywordStats>* stats) {
    IdCookieOverrides overrides;
    if (config.overrides_file) overrides = IdCookieOverrides::load(*config.overrides_file);
    Identifiers ids;
    ids.id_cookies = id_cookies_per_tracker(corpus, config.classifier, overrides);
    ids.flagged = resolve_keywords(corpus, config, stats);
    ids.fingerprinters = fingerprinting_trackers(corpus, ids.flagged);
    return ids;
}

ContainerPlan plan_containers(const CorpusAnalysis& analysis, const ContextLabel& origin, Scope scope,
                              const ColoringOptions& options) {
    ContainerPlan plan;
    plan.origin_context = origin;
    plan.scope = scope;
    for (const auto* run : analysis.runs_from(origin)) {
        auto day_graph = build_site_graph(run->findings(scope), *run->run, scope);
        plan.per_day[run->run->day_index] = chromatic_number(day_graph, options);
        merge_into(plan.graph, day_graph);
    }
    plan.coloring = chromatic_number(plan.graph, options);
    return plan;
}

std::vector<AnovaRow> anova_by_context(const CorpusAnalysis& analysis) {
    std::vector<AnovaRow> rows;
    for (const auto& metric : anova_metrics()) {
        std::map<ContextLabel, std::vector<double>> groups;
        for (const auto& origin : analysis.origins()) {
            std::vector<double> series;
            for (const auto* run : analysis.runs_from(origin)) series.push_back(metric.value(run->metrics(metric.scope)));
            if (series.size() >= 2) groups[origin] = std::move(series);
        }
        if (groups.size() < 2) continue;
        rows.push_back({metric.name, one_way_anova(groups)});
    }
    return rows;
}

PipelineResult run_pipeline(const CrawlRecordSet& corpus, const AnalysisConfig& config) {
    PipelineResult result;
    result.ids = build_identifiers(corpus, config, &result.keyword_stats);
    result.analysis = analyze(corpus, result.ids, config.analysis);
    result.between = collapse_report(result.analysis, Scope::between);
    result.within = collapse_report(result.analysis, Scope::within);
    result.diffusion = diffusion_histograms(result.analysis);
    for (const auto& origin : result.analysis.origins()) {
        result.containers_between.push_back(plan_containers(result.analysis, origin, Scope::between, config.coloring));
        result.containers_within.push_back(plan_containers(result.analysis, origin, Scope::within, config.coloring));
    }
    result.anova = anova_by_context(result.analysis);
    return result;
}

}  // namespace collapse
