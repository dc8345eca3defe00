#pragma once

// Corpus data model: what a crawl looked like, visit by visit.
//
// A corpus is a set of crawl runs. Each run is identified by the day it ran
// on and the context that was crawled first (the origin context); it then
// visited every other context in `context_order`. Domains stored here are
// registrable domains (eTLD+1) once a corpus has gone through ingestion.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

/// Name of a website category ("health", "news_media", or any user label).
class ContextLabel {
public:
    ContextLabel() = default;
    explicit ContextLabel(std::string name) : name_(std::move(name)) {}

    const std::string& str() const noexcept { return name_; }
    bool empty() const noexcept { return name_.empty(); }

    friend auto operator<=>(const ContextLabel&, const ContextLabel&) = default;
    friend bool operator==(const ContextLabel&, const ContextLabel&) = default;

private:
    std::string name_;
};

/// The seven categories the default simulator plan uses.
const std::vector<ContextLabel>& standard_contexts();

enum class CookieChannel { http, js };

std::string_view to_string(CookieChannel channel);
CookieChannel cookie_channel_from_string(std::string_view text);

struct CookieObservation {
    std::string setter_domain;
    std::string name;
    std::string value;
    std::optional<std::int64_t> expiry;  // epoch seconds; nullopt = session cookie
    CookieChannel mechanism = CookieChannel::http;
    std::int64_t observed_at = 0;

    friend bool operator==(const CookieObservation&, const CookieObservation&) = default;
};

struct ScriptObservation {
    std::string script_origin;
    std::string script_url;
    std::map<std::string, std::int64_t> api_calls;  // keyword -> call count

    friend bool operator==(const ScriptObservation&, const ScriptObservation&) = default;
};

struct SiteVisit {
    std::string first_party;
    ContextLabel context;
    std::int64_t visit_order = 0;
    std::vector<CookieObservation> cookies;
    std::vector<ScriptObservation> scripts;

    friend bool operator==(const SiteVisit&, const SiteVisit&) = default;
};

struct CrawlRun {
    std::int64_t day_index = 0;
    ContextLabel origin_context;
    std::vector<ContextLabel> context_order;  // origin first
    std::vector<SiteVisit> visits;            // ascending visit_order

    /// 0-based position of `context` in `context_order`, or nullopt.
    std::optional<std::size_t> position_of(const ContextLabel& context) const;

    friend bool operator==(const CrawlRun&, const CrawlRun&) = default;
};

struct CrawlRecordSet {
    std::vector<CrawlRun> runs;
    std::vector<ContextLabel> contexts;  // declared order; must be unique
    std::map<std::string, ContextLabel> site_context_map;
    std::map<std::int64_t, std::string> day_labels;  // optional original dates

    /// Distinct day indices present in `runs`, ascending.
    std::vector<std::int64_t> days() const;

    friend bool operator==(const CrawlRecordSet&, const CrawlRecordSet&) = default;
};

/// One broken invariant. `run` is "day=<d> origin=<ctx>" or empty for
/// corpus-level problems; `visit` is the index into the run's visits.
struct Violation {
    std::string run;
    std::optional<std::size_t> visit;
    std::string invariant;
    std::string detail;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::string describe_run(const CrawlRun& run);

/// Checks every structural invariant of the data model. Pure; the result is
/// empty iff the corpus is well formed. Domains are checked for being fixed
/// points of registrable-domain normalization under the bundled suffix list.
std::vector<Violation> validate_corpus(const CrawlRecordSet& corpus);

}  // namespace collapse

template <>
struct std::hash<collapse::ContextLabel> {
    std::size_t operator()(const collapse::ContextLabel& label) const noexcept {
        return std::hash<std::string>{}(label.str());
    }
};
