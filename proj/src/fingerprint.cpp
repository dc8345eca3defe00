#include "collapse/fingerprint.hpp"

#include "collapse/embedded_data.hpp"
#include "collapse/error.hpp"
#include "collapse/json_fields.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>
#include <sstream>

namespace collapse {

std::vector<KeywordStats> compute_keyword_stats(const std::vector<LabeledScript>& labeled,
                                                const CrawlRecordSet& corpus) {
    std::size_t fp_total = 0;
    std::size_t non_fp_total = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> usage;  // keyword -> (fp, non_fp)
    for (const auto& item : labeled) {
        bool fp = item.label == ScriptLabel::fp;
        ++(fp ? fp_total : non_fp_total);
        for (const auto& [keyword, count] : item.script.api_calls) {
            if (count <= 0) continue;
            auto& [in_fp, in_non_fp] = usage[keyword];
            ++(fp ? in_fp : in_non_fp);
        }
    }
    if (fp_total == 0 || non_fp_total == 0)
        throw ConfigError("labeled scripts must include at least one fp and one non_fp script");

    std::map<std::string, std::set<std::string>> sites;
    for (const auto& run : corpus.runs) {
        for (const auto& visit : run.visits) {
            for (const auto& script : visit.scripts) {
                for (const auto& [keyword, count] : script.api_calls) {
                    if (count > 0 && usage.contains(keyword)) sites[keyword].insert(visit.first_party);
                }
            }
        }
    }

    std::vector<KeywordStats> out;
    out.reserve(usage.size());
    for (const auto& [keyword, counts] : usage) {
        KeywordStats stats;
        stats.keyword = keyword;
        stats.site_count = sites.contains(keyword) ? sites[keyword].size() : 0;
        stats.fp_rate = static_cast<double>(counts.first + 1) / static_cast<double>(fp_total + 1);
        stats.non_fp_rate = static_cast<double>(counts.second + 1) / static_cast<double>(non_fp_total + 1);
        stats.likelihood_ratio = stats.fp_rate / stats.non_fp_rate;
        out.push_back(std::move(stats));
    }
    return out;
}

KeywordSet flag_keywords(const std::vector<KeywordStats>& stats, std::size_t min_sites, double min_ratio) {
    KeywordSet flagged;
    for (const auto& entry : stats) {
        if (entry.site_count >= min_sites && entry.likelihood_ratio >= min_ratio) flagged.insert(entry.keyword);
    }
    return flagged;
}

FingerprintVerdict classify_script(const ScriptObservation& script, const KeywordSet& flagged) {
    FingerprintVerdict verdict{script.script_origin, script.script_url, {}, false};
    for (const auto& [keyword, count] : script.api_calls) {
        if (count > 0 && flagged.contains(keyword)) verdict.matched_keywords.insert(keyword);
    }
    verdict.is_fingerprinting = !verdict.matched_keywords.empty();
    return verdict;
}

FingerprintMap fingerprinting_trackers(const CrawlRecordSet& corpus, const KeywordSet& flagged) {
    FingerprintMap out;
    if (flagged.empty()) return out;
    for (const auto& run : corpus.runs) {
        for (const auto& visit : run.visits) {
            for (const auto& script : visit.scripts) {
                if (classify_script(script, flagged).is_fingerprinting)
                    out[script.script_origin].insert(visit.first_party);
            }
        }
    }
    return out;
}

KeywordSet read_keyword_list(std::istream& in) {
    KeywordSet keywords;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        keywords.insert(line.substr(begin, end - begin + 1));
    }
    return keywords;
}

KeywordSet load_keyword_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keyword list: " + path.string());
    return read_keyword_list(in);
}

const KeywordSet& default_keywords() {
    static const KeywordSet keywords = [] {
        std::istringstream in{std::string(embedded::fingerprint_keywords())};
        return read_keyword_list(in);
    }();
    return keywords;
}

std::vector<LabeledScript> read_labeled_scripts(std::istream& in, const SuffixTable& table) {
    std::vector<LabeledScript> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto record = nlohmann::json::parse(line);
            require_object(record, "record");
            if (record.value("record", std::string("visit")) == "meta") continue;
            auto first_party = normalize_domain(field<std::string>(record, "first_party"), table);
            const auto& scripts = field_node(record, "scripts");
            if (!scripts.is_array()) throw ParseError("field 'scripts' must be an array");
            for (const auto& node : scripts) {
                require_object(node, "script");
                if (!node.contains("label")) continue;
                auto label = field<std::string>(node, "label");
                LabeledScript item;
                item.first_party = first_party;
                if (label == "fp") {
                    item.label = ScriptLabel::fp;
                } else if (label == "non_fp") {
                    item.label = ScriptLabel::non_fp;
                } else {
                    throw ParseError("script label must be \"fp\" or \"non_fp\"");
                }
                item.script.script_origin = normalize_domain(field<std::string>(node, "script_origin"), table);
                item.script.script_url = field<std::string>(node, "script_url");
                const auto& calls = field_node(node, "api_calls");
                require_object(calls, "api_calls");
                for (const auto& call : calls.items()) {
                    if (!call.value().is_number_integer() || call.value().get<std::int64_t>() <= 0)
                        throw ParseError("api_calls counts must be positive integers");
                    item.script.api_calls[call.key()] = call.value().get<std::int64_t>();
                }
                out.push_back(std::move(item));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<LabeledScript> load_labeled_scripts(const std::filesystem::path& path, const SuffixTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labeled scripts: " + path.string());
    return read_labeled_scripts(in, table);
}

}  // namespace collapse
