#include "collapse/cookies.hpp"

#include "collapse/error.hpp"
#include "collapse/json_fields.hpp"
#include "collapse/similarity.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace collapse {

namespace {

constexpr double kSecondsPerDay = 86400.0;

std::size_t value_length(std::string_view value, LengthUnit unit) {
    if (unit == LengthUnit::bytes) return value.size();
    return static_cast<std::size_t>(std::count_if(value.begin(), value.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    std::string part;
    while (std::getline(in, part, '\t')) out.push_back(part);
    return out;
}

}  // namespace

std::string_view to_string(Criterion criterion) {
    switch (criterion) {
        case Criterion::lifetime: return "lifetime";
        case Criterion::length: return "length";
        case Criterion::intra_stability: return "intra_stability";
        case Criterion::inter_variability: return "inter_variability";
    }
    return "unknown";
}

const std::vector<std::string>& classifier_config_keys() {
    static const std::vector<std::string> keys = {"min_lifetime_days", "min_len_exclusive",
                                                  "max_len_exclusive", "inter_similarity_max",
                                                  "pair_quantifier",   "length_unit"};
    return keys;
}

ClassifierConfig ClassifierConfig::from_json(const nlohmann::json& node) {
    require_object(node, "classifier config");
    ClassifierConfig config;
    config.min_lifetime_days = field_or<double>(node, "min_lifetime_days", config.min_lifetime_days);
    config.min_len_exclusive = field_or<std::size_t>(node, "min_len_exclusive", config.min_len_exclusive);
    config.max_len_exclusive = field_or<std::size_t>(node, "max_len_exclusive", config.max_len_exclusive);
    config.inter_similarity_max =
        field_or<double>(node, "inter_similarity_max", config.inter_similarity_max);
    auto quantifier = field_or<std::string>(node, "pair_quantifier", "exists");
    if (quantifier == "exists") {
        config.pair_quantifier = PairQuantifier::exists;
    } else if (quantifier == "forall") {
        config.pair_quantifier = PairQuantifier::forall;
    } else {
        throw ConfigError("pair_quantifier must be \"exists\" or \"forall\"");
    }
    auto unit = field_or<std::string>(node, "length_unit", "bytes");
    if (unit == "bytes") {
        config.length_unit = LengthUnit::bytes;
    } else if (unit == "codepoints") {
        config.length_unit = LengthUnit::codepoints;
    } else {
        throw ConfigError("length_unit must be \"bytes\" or \"codepoints\"");
    }
    if (config.min_len_exclusive >= config.max_len_exclusive)
        throw ConfigError("min_len_exclusive must be below max_len_exclusive");
    if (config.inter_similarity_max < 0.0 || config.inter_similarity_max > 1.0)
        throw ConfigError("inter_similarity_max must lie in [0, 1]");
    return config;
}

ClassifierConfig ClassifierConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open classifier config: " + path.string());
    try {
        auto node = nlohmann::json::parse(in);
        for (const auto& item : node.items()) {
            const auto& keys = classifier_config_keys();
            if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
                throw ConfigError("unknown classifier key '" + item.key() + "'");
        }
        return from_json(node);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

nlohmann::json ClassifierConfig::to_json() const {
    return {{"min_lifetime_days", min_lifetime_days},
            {"min_len_exclusive", min_len_exclusive},
            {"max_len_exclusive", max_len_exclusive},
            {"inter_similarity_max", inter_similarity_max},
            {"pair_quantifier", pair_quantifier == PairQuantifier::exists ? "exists" : "forall"},
            {"length_unit", length_unit == LengthUnit::bytes ? "bytes" : "codepoints"}};
}

std::vector<CookieHistory> build_histories(const CrawlRecordSet& corpus) {
    std::map<CookieKey, CookieHistory> by_key;
    for (const auto& run : corpus.runs) {
        for (const auto& visit : run.visits) {
            for (const auto& cookie : visit.cookies) {
                CookieKey key{cookie.setter_domain, cookie.name, visit.first_party};
                auto [it, inserted] = by_key.try_emplace(key);
                auto& history = it->second;
                if (inserted) history.key = key;
                history.values[run.day_index].push_back(cookie.value);
                if (cookie.expiry) {
                    auto lifetime = std::max<std::int64_t>(0, *cookie.expiry - cookie.observed_at);
                    auto [slot, fresh] = history.lifetimes.try_emplace(run.day_index, lifetime);
                    if (!fresh) slot->second = std::max(slot->second, lifetime);
                }
            }
        }
    }
    std::vector<CookieHistory> out;
    out.reserve(by_key.size());
    for (auto& [key, history] : by_key) out.push_back(std::move(history));
    return out;
}

std::string representative(const std::vector<std::string>& day_values) {
    std::map<std::string, std::size_t> counts;
    for (const auto& value : day_values) ++counts[value];
    const std::string* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = &value;
            best_count = count;
        }
    }
    return best ? *best : std::string{};
}

IdCookieVerdict classify_cookie(const CookieHistory& history, const ClassifierConfig& config) {
    IdCookieVerdict verdict;
    verdict.key = history.key;

    std::int64_t longest = -1;
    for (const auto& [day, lifetime] : history.lifetimes) longest = std::max(longest, lifetime);
    if (longest < 0 || static_cast<double>(longest) <= config.min_lifetime_days * kSecondsPerDay)
        verdict.failed_criteria.insert(Criterion::lifetime);

    bool lengths_ok = true;
    bool stable = true;
    for (const auto& [day, values] : history.values) {
        for (const auto& value : values) {
            auto length = value_length(value, config.length_unit);
            if (length <= config.min_len_exclusive || length >= config.max_len_exclusive) lengths_ok = false;
            if (value != values.front()) stable = false;
        }
        verdict.representative_value[day] = representative(values);
    }
    if (!lengths_ok) verdict.failed_criteria.insert(Criterion::length);
    if (!stable) verdict.failed_criteria.insert(Criterion::intra_stability);

    std::size_t pairs = 0;
    std::size_t dissimilar = 0;
    for (auto first = verdict.representative_value.begin(); first != verdict.representative_value.end();
         ++first) {
        for (auto second = std::next(first); second != verdict.representative_value.end(); ++second) {
            ++pairs;
            if (ratcliff_obershelp(first->second, second->second) < config.inter_similarity_max) ++dissimilar;
        }
    }
    bool varies = config.pair_quantifier == PairQuantifier::exists ? dissimilar > 0
                                                                   : pairs > 0 && dissimilar == pairs;
    if (!varies) verdict.failed_criteria.insert(Criterion::inter_variability);

    verdict.is_id = verdict.failed_criteria.empty();
    return verdict;
}

IdCookieOverrides IdCookieOverrides::read(std::istream& in) {
    IdCookieOverrides overrides;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto parts = split_tabs(line);
        auto bad = [&] {
            return ConfigError("override line " + std::to_string(line_no) +
                               ": expected 'allow<TAB>tracker<TAB>cookie' or 'deny<TAB>tracker[<TAB>cookie]'");
        };
        if (parts.size() < 2 || parts[1].empty()) throw bad();
        if (parts[0] == "allow" && parts.size() == 3 && !parts[2].empty()) {
            overrides.allow.insert({parts[1], parts[2]});
        } else if (parts[0] == "deny" && parts.size() == 2) {
            overrides.deny_trackers.insert(parts[1]);
        } else if (parts[0] == "deny" && parts.size() == 3 && !parts[2].empty()) {
            overrides.deny.insert({parts[1], parts[2]});
        } else {
            throw bad();
        }
    }
    return overrides;
}

IdCookieOverrides IdCookieOverrides::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open override list: " + path.string());
    return read(in);
}

IdCookieMap select_id_cookies(const std::vector<CookieHistory>& histories, const ClassifierConfig& config,
                              const IdCookieOverrides& overrides) {
    // (tracker, name) -> first parties the name was observed on
    std::map<std::pair<std::string, std::string>, std::set<std::string>> observed;
    std::set<std::pair<std::string, std::string>> qualifying;
    for (const auto& history : histories) {
        std::pair<std::string, std::string> name{history.key.setter_domain, history.key.cookie_name};
        observed[name].insert(history.key.first_party);
        if (!qualifying.contains(name) && classify_cookie(history, config).is_id) qualifying.insert(name);
    }
    for (const auto& allowed : overrides.allow) qualifying.insert(allowed);

    IdCookieMap out;
    std::map<std::string, std::size_t> best_sites;
    for (const auto& candidate : qualifying) {  // ordered: tracker, then name ascending
        const auto& [tracker, name] = candidate;
        if (overrides.deny_trackers.contains(tracker) || overrides.deny.contains(candidate)) continue;
        auto sites = observed.contains(candidate) ? observed[candidate].size() : 0;
        auto it = best_sites.find(tracker);
        if (it == best_sites.end() || sites > it->second) {
            best_sites[tracker] = sites;
            out[tracker] = name;
        }
    }
    return out;
}

IdCookieMap id_cookies_per_tracker(const CrawlRecordSet& corpus, const ClassifierConfig& config,
                                   const IdCookieOverrides& overrides) {
    return select_id_cookies(build_histories(corpus), config, overrides);
}

}  // namespace collapse
