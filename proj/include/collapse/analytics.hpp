#pragma once

// Persistent-identifier findings and the per-context collapse metrics built
// from them.
//
// A finding records one information flow that breaks a context's norms: the
// browser (sender) hands the tracker (recipient) the same user identifier
// (attribute) on several first parties. Between-scope findings connect the
// run's origin context with later contexts of the same crawl run;
// within-scope findings connect at least two first parties of one context.
// Evidence is either an ID-cookie value seen verbatim or a flagged
// fingerprinting script from the tracker.

#include "collapse/cookies.hpp"
#include "collapse/fingerprint.hpp"
#include "collapse/model.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

enum class Scope { between, within };
enum class Mechanism { cookie, fingerprint, both };
enum class EvidenceKind { cookie, script };

std::string_view to_string(Scope scope);
std::string_view to_string(Mechanism mechanism);
Scope scope_from_string(std::string_view text);
Mechanism mechanism_from_string(std::string_view text);

struct Evidence {
    std::string first_party;
    ContextLabel context;
    std::int64_t day_index = 0;
    EvidenceKind kind = EvidenceKind::cookie;
    std::string token;  // cookie value or flagged script URL

    friend auto operator<=>(const Evidence&, const Evidence&) = default;
    friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct PersistentIdentifierFinding {
    std::string tracker;
    Scope scope = Scope::between;
    ContextLabel origin_context;  // for within scope: the context analysed
    Mechanism mechanism = Mechanism::cookie;
    std::vector<Evidence> evidence;             // in visit order
    std::vector<ContextLabel> contexts_reached;  // in crawl order, origin first

    /// Distinct first parties named by the evidence.
    std::set<std::string> sites() const;
    std::set<std::string> sites(EvidenceKind kind) const;
};

/// Everything a run-level analysis needs to recognise identifiers.
struct Identifiers {
    IdCookieMap id_cookies;
    FingerprintMap fingerprinters;
    KeywordSet flagged;
};

/// Findings linking the run's origin context to later contexts, one per
/// tracker, sorted by tracker. Rows where the tracker is the first party
/// itself are never evidence.
std::vector<PersistentIdentifierFinding> between_context_findings(const CrawlRun& run,
                                                                  const Identifiers& ids);

/// Findings linking two or more first parties of `context` within one run.
std::vector<PersistentIdentifierFinding> within_context_findings(const CrawlRun& run,
                                                                 const ContextLabel& context,
                                                                 const Identifiers& ids);

/// Position (origin = 0) of the farthest context in the run's crawl order
/// holding evidence. Throws IntegrityError when evidence names a context
/// the run never visited, InputError for a within-scope finding.
std::size_t diffusion_distance(const PersistentIdentifierFinding& finding, const CrawlRun& run);

struct AnalysisOptions {
    /// A site participates in within-context collapse once it links to at
    /// least this many other sites.
    std::size_t participation_min_degree = 1;
};

struct DayMetrics {
    std::int64_t day_index = 0;
    std::size_t unique_third_parties = 0;
    std::size_t cookie_count = 0;
    std::size_t persistent_identifiers = 0;
    std::size_t participating_sites = 0;
    std::size_t crawled_sites = 0;
    double pct_persistent = 0.0;
    double participating_sites_pct = 0.0;
};

struct RunAnalysis {
    const CrawlRun* run = nullptr;
    std::vector<PersistentIdentifierFinding> between;
    std::vector<PersistentIdentifierFinding> within;  // inside the origin context
    DayMetrics between_metrics;
    DayMetrics within_metrics;

    const std::vector<PersistentIdentifierFinding>& findings(Scope scope) const {
        return scope == Scope::between ? between : within;
    }
    const DayMetrics& metrics(Scope scope) const {
        return scope == Scope::between ? between_metrics : within_metrics;
    }
};

/// Per-run results for a corpus. Holds pointers into `corpus`, which must
/// outlive it.
struct CorpusAnalysis {
    const CrawlRecordSet* corpus = nullptr;
    std::vector<RunAnalysis> runs;  // same order as corpus->runs

    /// Origin contexts that have at least one run, in declared order.
    std::vector<ContextLabel> origins() const;
    std::vector<const RunAnalysis*> runs_from(const ContextLabel& origin) const;
};

CorpusAnalysis analyze(const CrawlRecordSet& corpus, const Identifiers& ids,
                       const AnalysisOptions& options = {});

struct CollapseReport {
    ContextLabel origin_context;
    double unique_third_parties = 0.0;
    double cookie_count = 0.0;
    double persistent_identifiers = 0.0;
    double pct_persistent = 0.0;
    double participating_sites_pct = 0.0;
    std::vector<DayMetrics> per_day;
};

/// One report per origin context. Counts are day means; pct_persistent is
/// mean identifiers over mean third parties; participation is the day mean
/// of the daily percentage.
std::vector<CollapseReport> collapse_report(const CorpusAnalysis& analysis, Scope scope);

struct DiffusionHistogram {
    ContextLabel origin_context;
    /// Index d-1 holds the percentage of identifiers whose farthest context
    /// is d contexts past the origin; the last slot is "all contexts".
    std::vector<double> buckets;
    double mean_identifiers = 0.0;
    std::size_t days_with_findings = 0;
};

/// Day-averaged distance histogram for every origin context. Days without
/// findings contribute to mean_identifiers but not to the percentages.
std::vector<DiffusionHistogram> diffusion_histograms(const CorpusAnalysis& analysis);

struct TrackerCoverage {
    std::string tracker;
    double percent = 0.0;
    std::size_t sites = 0;

    friend bool operator==(const TrackerCoverage&, const TrackerCoverage&) = default;
};

/// 100 * |sites tracker connects| / |sites connected by any finding|,
/// highest first (ties by tracker name).
std::vector<TrackerCoverage> coverage_distribution(const std::vector<PersistentIdentifierFinding>& findings);

struct MechanismOverlap {
    std::set<std::string> cookie_only;
    std::set<std::string> fp_only;
    std::set<std::string> both;
    /// Sites reached only through fingerprinting evidence.
    std::set<std::string> new_participating_sites;
};

/// Partitions the trackers of every finding in `scope` by the union of
/// mechanisms they were seen with across runs.
MechanismOverlap mechanism_overlap(const CorpusAnalysis& analysis, Scope scope);
MechanismOverlap mechanism_overlap(const std::vector<PersistentIdentifierFinding>& findings);

}  // namespace collapse
