#pragma once

// Synthetic crawl corpora with planted ground truth.
//
// Every day the simulated browser starts from a fresh profile and crawls all
// sites once per origin context: the origin context first, then the other
// contexts in seeded-random order. Planted trackers set ID cookies and/or
// run fingerprinting scripts on their target sites; decoy trackers set
// cookies that each fail exactly one ID-cookie criterion; background
// trackers add session cookies and benign scripts.

#include "collapse/analytics.hpp"
#include "collapse/cookies.hpp"
#include "collapse/model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace collapse {

/// Deterministic across platforms: only raw mt19937_64 output is used.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    bool chance(std::uint64_t numerator, std::uint64_t denominator) { return below(denominator) < numerator; }
    std::string token(std::size_t length, std::string_view alphabet);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

enum class ValuePolicy {
    fresh_per_day,      // new value each day, stable across a day's runs
    stable_within_day,  // one value reused on every day
};

struct SiteRef {
    std::string site;
    ContextLabel context;

    friend auto operator<=>(const SiteRef&, const SiteRef&) = default;
    friend bool operator==(const SiteRef&, const SiteRef&) = default;
};

struct PlantedTracker {
    std::string tracker;
    Mechanism mechanism = Mechanism::cookie;
    std::vector<SiteRef> target_sites;
    ValuePolicy value_policy = ValuePolicy::fresh_per_day;
    int lifetime_days = 365;
    std::string cookie_name = "uid";

    /// Whether its cookie satisfies every ID-cookie criterion by construction.
    bool cookie_qualifies() const;
};

struct SimPlan {
    std::vector<ContextLabel> contexts;
    std::size_t sites_per_context = 20;
    std::size_t days = 3;
    std::vector<PlantedTracker> planted;
    std::uint64_t seed = 0;
    std::size_t background_trackers = 8;
    std::size_t decoys_per_family = 1;
    std::size_t lone_fingerprinters = 1;
    std::int64_t start_epoch = 1729900800;  // 2024-10-26T00:00:00Z
    std::vector<std::string> fingerprint_keywords;  // empty = first two default keywords

    static SimPlan from_json(const nlohmann::json& node);
    static SimPlan load(const std::filesystem::path& path);
    static SimPlan default_plan();
    nlohmann::json to_json() const;
};

/// "<context>-<NN>.com" (at least two digits) with the context lowercased and non-alphanumerics
/// turned into '-'.
std::string simulated_site_name(const ContextLabel& context, std::size_t index);

struct ExpectedFinding {
    std::int64_t day_index = 0;
    ContextLabel origin_context;
    Scope scope = Scope::between;
    std::string tracker;
    Mechanism mechanism = Mechanism::cookie;
    std::set<std::string> sites;
    std::vector<ContextLabel> contexts_reached;
    std::size_t distance = 0;  // between scope only

    friend bool operator==(const ExpectedFinding&, const ExpectedFinding&) = default;
};

struct DecoyCookie {
    std::string tracker;
    std::string cookie_name;
    std::vector<std::string> sites;
    Criterion fails = Criterion::lifetime;
};

using EdgeSet = std::set<std::pair<std::string, std::string>>;

struct GroundTruth {
    std::vector<ExpectedFinding> findings;  // sorted by (day, origin, scope, tracker)
    /// (day, origin, scope) -> directed edges of that run's site graph.
    std::map<std::tuple<std::int64_t, ContextLabel, Scope>, EdgeSet> edges;
    std::vector<DecoyCookie> decoys;
    std::set<std::string> planted_trackers;
    std::set<std::string> expected_trackers;  // planted trackers with >= 1 finding

    nlohmann::json to_json() const;
};

struct Simulation {
    CrawlRecordSet corpus;
    GroundTruth truth;
};

/// Throws ConfigError for an invalid plan (unknown context, unknown site,
/// tracker colliding with a site, ...).
Simulation generate(const SimPlan& plan);

/// Random plan with the given shape and up to `max_planted` planted trackers.
SimPlan random_plan(std::uint64_t seed, std::size_t sites_per_context, std::size_t days, std::size_t max_planted);

/// A labelled cookie history for classifier checks; `fails` is empty for a
/// qualifying history.
struct SuiteHistory {
    CookieHistory history;
    std::optional<Criterion> fails;
};

/// `qualifying` ID-cookie histories plus `decoys` histories cycling through
/// the four criteria, each decoy failing exactly one. Values on different
/// days are drawn from disjoint alphabets so their similarity is zero.
std::vector<SuiteHistory> generate_history_suite(std::size_t qualifying, std::size_t decoys, std::size_t days,
                                                 std::size_t runs_per_day, std::uint64_t seed);

}  // namespace collapse
