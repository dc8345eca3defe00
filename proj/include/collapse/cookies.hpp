#pragma once

// ID-cookie detection.
//
// A cookie is an ID cookie when, for one (setter, name, first party) key:
//   lifetime          its longest lifetime exceeds min_lifetime_days;
//   length            every value is strictly between the two length bounds;
//   intra_stability   within each crawl day the value never changes;
//   inter_variability the day representatives are dissimilar (Ratcliff/
//                     Obershelp below inter_similarity_max) for at least one
//                     pair of days, or for every pair under `forall`.

#include "collapse/model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace collapse {

enum class Criterion { lifetime, length, intra_stability, inter_variability };

std::string_view to_string(Criterion criterion);

enum class PairQuantifier { exists, forall };
enum class LengthUnit { bytes, codepoints };

struct ClassifierConfig {
    double min_lifetime_days = 90.0;
    std::size_t min_len_exclusive = 7;
    std::size_t max_len_exclusive = 101;
    double inter_similarity_max = 0.66;
    PairQuantifier pair_quantifier = PairQuantifier::exists;
    LengthUnit length_unit = LengthUnit::bytes;

    /// Reads the recognised keys of `node`; missing keys keep defaults.
    static ClassifierConfig from_json(const nlohmann::json& node);
    static ClassifierConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// Keys a classifier config file may contain.
const std::vector<std::string>& classifier_config_keys();

struct CookieKey {
    std::string setter_domain;
    std::string cookie_name;
    std::string first_party;

    friend auto operator<=>(const CookieKey&, const CookieKey&) = default;
    friend bool operator==(const CookieKey&, const CookieKey&) = default;
};

struct CookieHistory {
    CookieKey key;
    std::map<std::int64_t, std::vector<std::string>> values;  // day -> values in run order
    std::map<std::int64_t, std::int64_t> lifetimes;           // day -> longest lifetime (s); session-only days absent
};

struct IdCookieVerdict {
    CookieKey key;
    bool is_id = false;
    std::set<Criterion> failed_criteria;
    std::map<std::int64_t, std::string> representative_value;
};

/// Groups every cookie sighting of the corpus by (setter, name, first party).
std::vector<CookieHistory> build_histories(const CrawlRecordSet& corpus);

/// Most frequent value of a day; ties go to the lexicographically smallest,
/// so the choice does not depend on run order.
std::string representative(const std::vector<std::string>& day_values);

IdCookieVerdict classify_cookie(const CookieHistory& history, const ClassifierConfig& config);

/// Manual-review outcome layered on top of the classifier. File format, one
/// rule per line, tab separated, '#' comments:
///   allow <tracker> <cookie_name>    accept even if the classifier rejects
///   deny  <tracker> [<cookie_name>]  reject one cookie or a whole tracker
struct IdCookieOverrides {
    std::set<std::pair<std::string, std::string>> allow;
    std::set<std::pair<std::string, std::string>> deny;
    std::set<std::string> deny_trackers;

    static IdCookieOverrides read(std::istream& in);
    static IdCookieOverrides load(const std::filesystem::path& path);
};

/// tracker -> its ID cookie name. Among qualifying names the one observed on
/// the most first parties wins, then the lexicographically smallest.
using IdCookieMap = std::map<std::string, std::string>;

IdCookieMap id_cookies_per_tracker(const CrawlRecordSet& corpus, const ClassifierConfig& config,
                                   const IdCookieOverrides& overrides = {});

/// Same selection over precomputed histories.
IdCookieMap select_id_cookies(const std::vector<CookieHistory>& histories,
                              const ClassifierConfig& config, const IdCookieOverrides& overrides = {});

}  // namespace collapse
