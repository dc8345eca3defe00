#include "collapse/analytics.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

namespace collapse {

namespace {

struct Row {
    std::size_t visit = 0;  // index into run.visits
    std::string token;
};

/// Candidate evidence for one tracker and one mechanism, grouped by token
/// for cookies (the identifier value) or pooled for scripts.
using RowsByToken = std::map<std::string, std::vector<Row>>;

RowsByToken cookie_rows(const CrawlRun& run, const std::string& tracker, const std::string& name,
                        const ContextLabel* only_context) {
    RowsByToken rows;
    for (std::size_t i = 0; i < run.visits.size(); ++i) {
        const auto& visit = run.visits[i];
        if (visit.first_party == tracker) continue;
        if (only_context && visit.context != *only_context) continue;
        for (const auto& cookie : visit.cookies) {
            if (cookie.setter_domain == tracker && cookie.name == name) rows[cookie.value].push_back({i, cookie.value});
        }
    }
    return rows;
}

std::vector<Row> script_rows(const CrawlRun& run, const std::string& tracker, const std::set<std::string>& sites,
                             const KeywordSet& flagged, const ContextLabel* only_context) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < run.visits.size(); ++i) {
        const auto& visit = run.visits[i];
        if (visit.first_party == tracker || !sites.contains(visit.first_party)) continue;
        if (only_context && visit.context != *only_context) continue;
        for (const auto& script : visit.scripts) {
            if (script.script_origin == tracker && classify_script(script, flagged).is_fingerprinting)
                rows.push_back({i, script.script_url});
        }
    }
    return rows;
}

struct Reach {
    std::size_t contexts = 0;
    std::size_t sites = 0;
    bool touches_origin = false;
};

Reach reach_of(const CrawlRun& run, const std::vector<Row>& rows) {
    std::set<ContextLabel> contexts;
    std::set<std::string> sites;
    for (const auto& row : rows) {
        contexts.insert(run.visits[row.visit].context);
        sites.insert(run.visits[row.visit].first_party);
    }
    return {contexts.size(), sites.size(), contexts.contains(run.origin_context)};
}

bool qualifies(const Reach& reach, Scope scope) {
    if (scope == Scope::between) return reach.touches_origin && reach.contexts >= 2;
    return reach.sites >= 2;
}

/// Picks the qualifying cookie value with the widest reach (contexts, then
/// sites, then rows); ties go to the smallest value.
std::optional<std::vector<Row>> best_cookie_rows(const CrawlRun& run, const RowsByToken& by_value, Scope scope) {
    std::optional<std::vector<Row>> best;
    std::tuple<std::size_t, std::size_t, std::size_t> best_key{0, 0, 0};
    for (const auto& [value, rows] : by_value) {
        auto reach = reach_of(run, rows);
        if (!qualifies(reach, scope)) continue;
        std::tuple key{reach.contexts, reach.sites, rows.size()};
        if (!best || key > best_key) {
            best = rows;
            best_key = key;
        }
    }
    return best;
}

void append_evidence(PersistentIdentifierFinding& finding, const CrawlRun& run, const std::vector<Row>& rows,
                     EvidenceKind kind) {
    for (const auto& row : rows) {
        const auto& visit = run.visits[row.visit];
        finding.evidence.push_back({visit.first_party, visit.context, run.day_index, kind, row.token});
    }
}

std::vector<PersistentIdentifierFinding> findings_for(const CrawlRun& run, const Identifiers& ids, Scope scope,
                                                      const ContextLabel* only_context) {
    std::set<std::string> trackers;
    for (const auto& [tracker, name] : ids.id_cookies) trackers.insert(tracker);
    for (const auto& [tracker, sites] : ids.fingerprinters) {
        if (sites.size() >= 2) trackers.insert(tracker);
    }

    std::map<std::string, std::int64_t> order_of_site;
    for (const auto& visit : run.visits) order_of_site.try_emplace(visit.first_party, visit.visit_order);

    std::vector<PersistentIdentifierFinding> out;
    for (const auto& tracker : trackers) {
        std::optional<std::vector<Row>> cookie;
        if (auto it = ids.id_cookies.find(tracker); it != ids.id_cookies.end())
            cookie = best_cookie_rows(run, cookie_rows(run, tracker, it->second, only_context), scope);

        std::optional<std::vector<Row>> scripts;
        if (auto it = ids.fingerprinters.find(tracker); it != ids.fingerprinters.end() && it->second.size() >= 2) {
            auto rows = script_rows(run, tracker, it->second, ids.flagged, only_context);
            if (!rows.empty() && qualifies(reach_of(run, rows), scope)) scripts = std::move(rows);
        }
        if (!cookie && !scripts) continue;

        PersistentIdentifierFinding finding;
        finding.tracker = tracker;
        finding.scope = scope;
        finding.origin_context = only_context ? *only_context : run.origin_context;
        finding.mechanism = cookie && scripts ? Mechanism::both : cookie ? Mechanism::cookie : Mechanism::fingerprint;
        if (cookie) append_evidence(finding, run, *cookie, EvidenceKind::cookie);
        if (scripts) append_evidence(finding, run, *scripts, EvidenceKind::script);
        std::sort(finding.evidence.begin(), finding.evidence.end(), [&](const Evidence& a, const Evidence& b) {
            return std::tie(order_of_site[a.first_party], a.kind, a.token) <
                   std::tie(order_of_site[b.first_party], b.kind, b.token);
        });
        finding.evidence.erase(std::unique(finding.evidence.begin(), finding.evidence.end()), finding.evidence.end());

        std::set<ContextLabel> reached;
        for (const auto& row : finding.evidence) reached.insert(row.context);
        for (const auto& context : run.context_order) {
            if (reached.contains(context)) finding.contexts_reached.push_back(context);
        }
        out.push_back(std::move(finding));
    }
    return out;
}

DayMetrics base_metrics(const CrawlRun& run) {
    DayMetrics metrics;
    metrics.day_index = run.day_index;
    std::set<std::string> third_parties;
    std::set<std::tuple<std::string, std::string, std::string>> cookies;
    std::set<std::string> sites;
    for (const auto& visit : run.visits) {
        if (visit.context != run.origin_context) continue;
        sites.insert(visit.first_party);
        for (const auto& cookie : visit.cookies) {
            cookies.insert({visit.first_party, cookie.setter_domain, cookie.name});
            if (cookie.setter_domain != visit.first_party) third_parties.insert(cookie.setter_domain);
        }
        for (const auto& script : visit.scripts) {
            if (script.script_origin != visit.first_party) third_parties.insert(script.script_origin);
        }
    }
    metrics.unique_third_parties = third_parties.size();
    metrics.cookie_count = cookies.size();
    metrics.crawled_sites = sites.size();
    return metrics;
}

void finish_metrics(DayMetrics& metrics, std::size_t findings, std::size_t participating) {
    metrics.persistent_identifiers = findings;
    metrics.participating_sites = participating;
    metrics.pct_persistent = metrics.unique_third_parties == 0
                                 ? 0.0
                                 : 100.0 * static_cast<double>(findings) /
                                       static_cast<double>(metrics.unique_third_parties);
    metrics.participating_sites_pct = metrics.crawled_sites == 0
                                          ? 0.0
                                          : 100.0 * static_cast<double>(participating) /
                                                static_cast<double>(metrics.crawled_sites);
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

std::string_view to_string(Scope scope) { return scope == Scope::between ? "between" : "within"; }

std::string_view to_string(Mechanism mechanism) {
    switch (mechanism) {
        case Mechanism::cookie: return "cookie";
        case Mechanism::fingerprint: return "fingerprint";
        case Mechanism::both: return "both";
    }
    return "unknown";
}

Scope scope_from_string(std::string_view text) {
    if (text == "between") return Scope::between;
    if (text == "within") return Scope::within;
    throw InputError("unknown scope '" + std::string(text) + "' (expected between or within)");
}

Mechanism mechanism_from_string(std::string_view text) {
    if (text == "cookie") return Mechanism::cookie;
    if (text == "fingerprint") return Mechanism::fingerprint;
    if (text == "both") return Mechanism::both;
    throw ParseError("unknown mechanism '" + std::string(text) + "'");
}

std::set<std::string> PersistentIdentifierFinding::sites() const {
    std::set<std::string> out;
    for (const auto& row : evidence) out.insert(row.first_party);
    return out;
}

std::set<std::string> PersistentIdentifierFinding::sites(EvidenceKind kind) const {
    std::set<std::string> out;
    for (const auto& row : evidence) {
        if (row.kind == kind) out.insert(row.first_party);
    }
    return out;
}

std::vector<PersistentIdentifierFinding> between_context_findings(const CrawlRun& run, const Identifiers& ids) {
    return findings_for(run, ids, Scope::between, nullptr);
}

std::vector<PersistentIdentifierFinding> within_context_findings(const CrawlRun& run, const ContextLabel& context,
                                                                 const Identifiers& ids) {
    return findings_for(run, ids, Scope::within, &context);
}

std::size_t diffusion_distance(const PersistentIdentifierFinding& finding, const CrawlRun& run) {
    if (finding.scope != Scope::between) throw InputError("diffusion distance needs a between-scope finding");
    std::size_t farthest = 0;
    for (const auto& row : finding.evidence) {
        auto position = run.position_of(row.context);
        if (!position)
            throw IntegrityError("evidence context '" + row.context.str() + "' not in crawl order of " +
                                 describe_run(run));
        farthest = std::max(farthest, *position);
    }
    return farthest;
}

std::vector<ContextLabel> CorpusAnalysis::origins() const {
    std::set<ContextLabel> present;
    for (const auto& run : runs) present.insert(run.run->origin_context);
    std::vector<ContextLabel> out;
    for (const auto& context : corpus->contexts) {
        if (present.contains(context)) out.push_back(context);
    }
    return out;
}

std::vector<const RunAnalysis*> CorpusAnalysis::runs_from(const ContextLabel& origin) const {
    std::vector<const RunAnalysis*> out;
    for (const auto& run : runs) {
        if (run.run->origin_context == origin) out.push_back(&run);
    }
    return out;
}

CorpusAnalysis analyze(const CrawlRecordSet& corpus, const Identifiers& ids, const AnalysisOptions& options) {
    CorpusAnalysis analysis;
    analysis.corpus = &corpus;
    analysis.runs.reserve(corpus.runs.size());
    for (const auto& run : corpus.runs) {
        RunAnalysis result;
        result.run = &run;
        result.between = between_context_findings(run, ids);
        result.within = within_context_findings(run, run.origin_context, ids);

        result.between_metrics = base_metrics(run);
        std::set<std::string> participating;
        for (const auto& finding : result.between) {
            for (const auto& row : finding.evidence) {
                if (row.context == run.origin_context) participating.insert(row.first_party);
            }
        }
        finish_metrics(result.between_metrics, result.between.size(), participating.size());

        result.within_metrics = base_metrics(run);
        std::map<std::string, std::set<std::string>> neighbours;
        for (const auto& finding : result.within) {
            auto sites = finding.sites();
            for (const auto& a : sites) {
                for (const auto& b : sites) {
                    if (a != b) neighbours[a].insert(b);
                }
            }
        }
        std::size_t linked = 0;
        for (const auto& [site, adjacent] : neighbours) {
            if (adjacent.size() >= options.participation_min_degree && adjacent.size() > 0) ++linked;
        }
        finish_metrics(result.within_metrics, result.within.size(), linked);
        analysis.runs.push_back(std::move(result));
    }
    return analysis;
}

std::vector<CollapseReport> collapse_report(const CorpusAnalysis& analysis, Scope scope) {
    std::vector<CollapseReport> out;
    for (const auto& origin : analysis.origins()) {
        CollapseReport report;
        report.origin_context = origin;
        std::vector<double> third, cookies, found, participating;
        for (const auto* run : analysis.runs_from(origin)) {
            const auto& metrics = run->metrics(scope);
            report.per_day.push_back(metrics);
            third.push_back(static_cast<double>(metrics.unique_third_parties));
            cookies.push_back(static_cast<double>(metrics.cookie_count));
            found.push_back(static_cast<double>(metrics.persistent_identifiers));
            participating.push_back(metrics.participating_sites_pct);
        }
        report.unique_third_parties = mean(third);
        report.cookie_count = mean(cookies);
        report.persistent_identifiers = mean(found);
        report.pct_persistent =
            report.unique_third_parties == 0.0 ? 0.0 : 100.0 * report.persistent_identifiers / report.unique_third_parties;
        report.participating_sites_pct = mean(participating);
        out.push_back(std::move(report));
    }
    return out;
}

std::vector<DiffusionHistogram> diffusion_histograms(const CorpusAnalysis& analysis) {
    std::vector<DiffusionHistogram> out;
    for (const auto& origin : analysis.origins()) {
        auto runs = analysis.runs_from(origin);
        std::size_t width = 0;
        for (const auto* run : runs) width = std::max(width, run->run->context_order.size());
        DiffusionHistogram histogram;
        histogram.origin_context = origin;
        histogram.buckets.assign(width > 1 ? width - 1 : 0, 0.0);

        std::vector<double> counts;
        for (const auto* run : runs) {
            counts.push_back(static_cast<double>(run->between.size()));
            if (run->between.empty() || histogram.buckets.empty()) continue;
            std::vector<double> day(histogram.buckets.size(), 0.0);
            const std::size_t last = run->run->context_order.size() - 1;
            for (const auto& finding : run->between) {
                auto distance = diffusion_distance(finding, *run->run);
                std::size_t slot = distance == last ? day.size() - 1 : distance - 1;
                day[slot] += 1.0;
            }
            for (std::size_t i = 0; i < day.size(); ++i) {
                histogram.buckets[i] += 100.0 * day[i] / static_cast<double>(run->between.size());
            }
            ++histogram.days_with_findings;
        }
        if (histogram.days_with_findings > 0) {
            for (auto& bucket : histogram.buckets) bucket /= static_cast<double>(histogram.days_with_findings);
        }
        histogram.mean_identifiers = mean(counts);
        out.push_back(std::move(histogram));
    }
    return out;
}

std::vector<TrackerCoverage> coverage_distribution(const std::vector<PersistentIdentifierFinding>& findings) {
    std::map<std::string, std::set<std::string>> per_tracker;
    std::set<std::string> all;
    for (const auto& finding : findings) {
        for (const auto& site : finding.sites()) {
            per_tracker[finding.tracker].insert(site);
            all.insert(site);
        }
    }
    std::vector<TrackerCoverage> out;
    for (const auto& [tracker, sites] : per_tracker) {
        out.push_back({tracker, 100.0 * static_cast<double>(sites.size()) / static_cast<double>(all.size()),
                       sites.size()});
    }
    std::sort(out.begin(), out.end(), [](const TrackerCoverage& a, const TrackerCoverage& b) {
        if (a.sites != b.sites) return a.sites > b.sites;
        return a.tracker < b.tracker;
    });
    return out;
}

MechanismOverlap mechanism_overlap(const std::vector<PersistentIdentifierFinding>& findings) {
    std::map<std::string, std::pair<bool, bool>> seen;  // tracker -> (cookie, fingerprint)
    std::set<std::string> cookie_sites;
    std::set<std::string> script_sites;
    for (const auto& finding : findings) {
        auto& [cookie, fp] = seen[finding.tracker];
        cookie = cookie || finding.mechanism != Mechanism::fingerprint;
        fp = fp || finding.mechanism != Mechanism::cookie;
        for (const auto& row : finding.evidence) {
            (row.kind == EvidenceKind::cookie ? cookie_sites : script_sites).insert(row.first_party);
        }
    }
    MechanismOverlap out;
    for (const auto& [tracker, flags] : seen) {
        if (flags.first && flags.second) {
            out.both.insert(tracker);
        } else if (flags.first) {
            out.cookie_only.insert(tracker);
        } else {
            out.fp_only.insert(tracker);
        }
    }
    for (const auto& site : script_sites) {
        if (!cookie_sites.contains(site)) out.new_participating_sites.insert(site);
    }
    return out;
}

MechanismOverlap mechanism_overlap(const CorpusAnalysis& analysis, Scope scope) {
    std::vector<PersistentIdentifierFinding> all;
    for (const auto& run : analysis.runs) {
        const auto& findings = run.findings(scope);
        all.insert(all.end(), findings.begin(), findings.end());
    }
    return mechanism_overlap(all);
}

}  // namespace collapse
