#pragma once

// End-to-end analysis: identifiers, findings, reports, containers, ANOVA.

#include "collapse/analytics.hpp"
#include "collapse/cookies.hpp"
#include "collapse/fingerprint.hpp"
#include "collapse/graph.hpp"
#include "collapse/model.hpp"
#include "collapse/stats.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collapse {

/// Analysis configuration file (JSON). Recognised keys:
///   classifier keys (min_lifetime_days, min_len_exclusive, ...)
///   min_sites, min_ratio          keyword flagging thresholds
///   keywords                      inline flagged-keyword list
///   keywords_file                 flagged-keyword list file
///   labeled_scripts               labeled scripts; keywords are derived
///   overrides_file                ID-cookie allow/deny rules
///   participation_min_degree
///   exact_node_limit, exact_time_budget_ms
/// Relative paths resolve against the config file's directory. Unknown keys
/// are rejected.
struct AnalysisConfig {
    ClassifierConfig classifier;
    FingerprintThresholds thresholds;
    std::vector<std::string> keywords;
    std::optional<std::filesystem::path> keywords_file;
    std::optional<std::filesystem::path> labeled_scripts;
    std::optional<std::filesystem::path> overrides_file;
    AnalysisOptions analysis;
    ColoringOptions coloring;

    static AnalysisConfig from_json(const nlohmann::json& node, const std::filesystem::path& base_dir = {});
    static AnalysisConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Flagged keywords: derived from labeled scripts when configured, else the
/// configured list, else the bundled default list.
KeywordSet resolve_keywords(const CrawlRecordSet& corpus, const AnalysisConfig& config,
                            std::vector<KeywordStats>* stats = nullptr);

Identifiers build_identifiers(const CrawlRecordSet& corpus, const AnalysisConfig& config,
                              std::vector<KeywordStats>* stats = nullptr);

/// Site graph of one origin context merged over all days, its colouring, and
/// the colouring of each day's graph.
struct ContainerPlan {
    ContextLabel origin_context;
    Scope scope = Scope::between;
    SiteGraph graph;
    Coloring coloring;
    std::map<std::int64_t, Coloring> per_day;
};

ContainerPlan plan_containers(const CorpusAnalysis& analysis, const ContextLabel& origin, Scope scope,
                              const ColoringOptions& options = {});

struct AnovaRow {
    std::string metric;
    AnovaResult result;
};

/// One test per daily metric, groups = origin contexts. Skipped (empty)
/// when fewer than two contexts have at least two days.
std::vector<AnovaRow> anova_by_context(const CorpusAnalysis& analysis);

struct PipelineResult {
    Identifiers ids;
    std::vector<KeywordStats> keyword_stats;
    CorpusAnalysis analysis;
    std::vector<CollapseReport> between;
    std::vector<CollapseReport> within;
    std::vector<DiffusionHistogram> diffusion;
    std::vector<ContainerPlan> containers_between;
    std::vector<ContainerPlan> containers_within;
    std::vector<AnovaRow> anova;

    const std::vector<ContainerPlan>& containers(Scope scope) const {
        return scope == Scope::between ? containers_between : containers_within;
    }
};

/// `corpus` must outlive the result.
PipelineResult run_pipeline(const CrawlRecordSet& corpus, const AnalysisConfig& config);

}  // namespace collapse
