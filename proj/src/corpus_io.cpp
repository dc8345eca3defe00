#include "collapse/corpus_io.hpp"

#include "collapse/error.hpp"
#include "collapse/json_fields.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

namespace collapse {

using nlohmann::json;

namespace {

std::string normalize_tracked(std::string_view host, const SuffixTable& table, LoadStats* stats) {
    auto domain = normalize_domain(host, table);
    if (stats) ++stats->host_variants[domain][std::string(host)];
    return domain;
}

CookieObservation parse_cookie(const json& node, const SuffixTable& table, LoadStats* stats) {
    require_object(node, "cookie");
    CookieObservation cookie;
    cookie.setter_domain = normalize_tracked(field<std::string>(node, "setter_domain"), table, stats);
    cookie.name = field<std::string>(node, "name");
    cookie.value = field<std::string>(node, "value");
    const auto& expiry = node.find("expiry");
    if (expiry != node.end() && !expiry->is_null()) {
        if (!expiry->is_number_integer()) throw ParseError("field 'expiry' must be an integer or null");
        cookie.expiry = expiry->get<std::int64_t>();
    }
    cookie.mechanism = cookie_channel_from_string(field<std::string>(node, "mechanism"));
    cookie.observed_at = field<std::int64_t>(node, "observed_at");
    return cookie;
}

ScriptObservation parse_script(const json& node, const SuffixTable& table, LoadStats* stats) {
    require_object(node, "script");
    ScriptObservation script;
    script.script_origin = normalize_tracked(field<std::string>(node, "script_origin"), table, stats);
    script.script_url = field<std::string>(node, "script_url");
    const auto& calls = field_node(node, "api_calls");
    require_object(calls, "api_calls");
    for (const auto& [keyword, count] : calls.items()) {
        if (!count.is_number_integer())
            throw ParseError("api_calls['" + keyword + "'] must be an integer");
        script.api_calls[keyword] = count.get<std::int64_t>();
    }
    return script;
}

std::vector<ContextLabel> parse_labels(const json& node, const char* name) {
    if (!node.is_array()) throw ParseError(std::string("field '") + name + "' must be an array");
    std::vector<ContextLabel> labels;
    for (const auto& item : node) {
        if (!item.is_string()) throw ParseError(std::string("field '") + name + "' must hold strings");
        labels.emplace_back(item.get<std::string>());
    }
    return labels;
}

struct RunKey {
    std::int64_t day;
    ContextLabel origin;
    auto operator<=>(const RunKey&) const = default;
};

json cookie_to_json(const CookieObservation& cookie) {
    return json{{"setter_domain", cookie.setter_domain},
                {"name", cookie.name},
                {"value", cookie.value},
                {"expiry", cookie.expiry ? json(*cookie.expiry) : json(nullptr)},
                {"mechanism", std::string(to_string(cookie.mechanism))},
                {"observed_at", cookie.observed_at}};
}

json script_to_json(const ScriptObservation& script) {
    json calls = json::object();
    for (const auto& [keyword, count] : script.api_calls) calls[keyword] = count;
    return json{{"script_origin", script.script_origin},
                {"script_url", script.script_url},
                {"api_calls", calls}};
}

json labels_to_json(const std::vector<ContextLabel>& labels) {
    json out = json::array();
    for (const auto& label : labels) out.push_back(label.str());
    return out;
}

}  // namespace

std::map<std::string, ContextLabel> read_context_map(std::istream& in, const SuffixTable& table) {
    std::map<std::string, ContextLabel> map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw ParseError("context map line " + std::to_string(line_no) +
                             ": expected 'first_party<TAB>context_label'");
        }
        try {
            map[normalize_domain(line.substr(0, tab), table)] = ContextLabel(line.substr(tab + 1));
        } catch (const ParseError& e) {
            throw ParseError("context map line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return map;
}

std::map<std::string, ContextLabel> load_context_map(const std::filesystem::path& path,
                                                     const SuffixTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open context map: " + path.string());
    return read_context_map(in, table);
}

void canonicalize(CrawlRecordSet& corpus) {
    for (auto& run : corpus.runs) {
        std::stable_sort(run.visits.begin(), run.visits.end(),
                         [](const SiteVisit& a, const SiteVisit& b) { return a.visit_order < b.visit_order; });
    }
    std::stable_sort(corpus.runs.begin(), corpus.runs.end(), [](const CrawlRun& a, const CrawlRun& b) {
        return std::tie(a.day_index, a.origin_context) < std::tie(b.day_index, b.origin_context);
    });
}

CrawlRecordSet read_corpus(std::istream& in,
                           const std::optional<std::map<std::string, ContextLabel>>& context_map,
                           const LoadOptions& options) {
    const SuffixTable& table = options.suffix_table ? *options.suffix_table : SuffixTable::bundled();
    CrawlRecordSet corpus;
    std::set<ContextLabel> declared;
    std::map<RunKey, CrawlRun> runs;
    bool have_meta = false;

    auto declare = [&](const ContextLabel& label) {
        if (declared.insert(label).second) corpus.contexts.push_back(label);
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
        try {
            json record = json::parse(line);
            require_object(record, "record");
            std::string kind = "visit";
            if (auto it = record.find("record"); it != record.end()) {
                if (!it->is_string()) throw ParseError("field 'record' must be a string");
                kind = it->get<std::string>();
            }
            if (kind == "meta") {
                if (have_meta) throw ParseError("duplicate meta record");
                have_meta = true;
                if (auto it = record.find("schema_version"); it != record.end()) {
                    if (!it->is_number_integer() || it->get<int>() != kCorpusSchemaVersion)
                        throw ParseError("unsupported schema_version");
                }
                for (const auto& label : parse_labels(field_node(record, "contexts"), "contexts")) {
                    if (label.empty()) throw ParseError("empty context label");
                    if (declared.contains(label))
                        throw ParseError("duplicate context '" + label.str() + "'");
                    declare(label);
                }
                if (auto it = record.find("site_context_map"); it != record.end()) {
                    require_object(*it, "site_context_map");
                    for (const auto& [site, context] : it->items()) {
                        if (!context.is_string())
                            throw ParseError("site_context_map values must be strings");
                        corpus.site_context_map[normalize_domain(site, table)] =
                            ContextLabel(context.get<std::string>());
                    }
                }
                if (auto it = record.find("day_labels"); it != record.end()) {
                    require_object(*it, "day_labels");
                    for (const auto& [day, label] : it->items()) {
                        if (!label.is_string()) throw ParseError("day_labels values must be strings");
                        std::size_t used = 0;
                        std::int64_t index = std::stoll(day, &used);
                        if (used != day.size()) throw ParseError("day_labels key '" + day + "' is not an integer");
                        corpus.day_labels[index] = label.get<std::string>();
                    }
                }
                if (context_map) {
                    corpus.site_context_map = *context_map;
                }
                for (const auto& [site, context] : corpus.site_context_map) declare(context);
                continue;
            }
            if (kind != "visit") throw ParseError("unknown record kind '" + kind + "'");
            if (!have_meta) throw ParseError("visit record before the meta header");
            if (options.stats) ++options.stats->visit_lines;

            RunKey key{field<std::int64_t>(record, "day_index"),
                       ContextLabel(field<std::string>(record, "origin_context"))};
            auto order = parse_labels(field_node(record, "context_order"), "context_order");
            SiteVisit visit;
            visit.visit_order = field<std::int64_t>(record, "visit_order");
            visit.first_party = normalize_tracked(field<std::string>(record, "first_party"), table, options.stats);
            visit.context = ContextLabel(field<std::string>(record, "context"));
            if (!declared.contains(visit.context))
                throw ParseError("context '" + visit.context.str() + "' is not declared in the header");
            if (!declared.contains(key.origin))
                throw ParseError("origin context '" + key.origin.str() + "' is not declared in the header");
            auto mapped = corpus.site_context_map.find(visit.first_party);
            if (mapped == corpus.site_context_map.end())
                throw InputError("first party '" + visit.first_party + "' is absent from the context map");
            if (mapped->second != visit.context)
                throw ParseError("first party '" + visit.first_party + "' recorded as '" +
                                 visit.context.str() + "' but mapped to '" + mapped->second.str() + "'");
            const auto& cookies = field_node(record, "cookies");
            if (!cookies.is_array()) throw ParseError("field 'cookies' must be an array");
            for (const auto& cookie : cookies) visit.cookies.push_back(parse_cookie(cookie, table, options.stats));
            const auto& scripts = field_node(record, "scripts");
            if (!scripts.is_array()) throw ParseError("field 'scripts' must be an array");
            for (const auto& script : scripts) visit.scripts.push_back(parse_script(script, table, options.stats));

            auto [it, inserted] = runs.try_emplace(key);
            CrawlRun& run = it->second;
            if (inserted) {
                run.day_index = key.day;
                run.origin_context = key.origin;
                run.context_order = std::move(order);
            } else if (run.context_order != order) {
                throw ParseError("context_order differs from earlier visits of the same run");
            }
            run.visits.push_back(std::move(visit));
        } catch (const json::exception& e) {
            throw ParseError(where() + e.what());
        } catch (const InputError& e) {
            throw InputError(where() + e.what());
        } catch (const Error& e) {
            throw ParseError(where() + e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(where() + "invalid integer");
        } catch (const std::out_of_range& e) {
            throw ParseError(where() + "integer out of range");
        }
    }

    for (auto& [key, run] : runs) corpus.runs.push_back(std::move(run));
    canonicalize(corpus);

    auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        const auto& v = violations.front();
        std::string where = v.run.empty() ? "corpus" : v.run;
        if (v.visit) where += " visit #" + std::to_string(*v.visit);
        throw IntegrityError(where + ": " + v.invariant + ": " + v.detail + " (" +
                             std::to_string(violations.size()) + " violation(s) total)");
    }
    return corpus;
}

CrawlRecordSet load_corpus(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& context_map_path,
                           const LoadOptions& options) {
    const SuffixTable& table = options.suffix_table ? *options.suffix_table : SuffixTable::bundled();
    std::optional<std::map<std::string, ContextLabel>> context_map;
    if (context_map_path) context_map = load_context_map(*context_map_path, table);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus: " + path.string());
    try {
        return read_corpus(in, context_map, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_corpus(const CrawlRecordSet& corpus, std::ostream& out) {
    json meta = {{"record", "meta"}, {"schema_version", kCorpusSchemaVersion}};
    meta["contexts"] = labels_to_json(corpus.contexts);
    json map = json::object();
    for (const auto& [site, context] : corpus.site_context_map) map[site] = context.str();
    meta["site_context_map"] = map;
    if (!corpus.day_labels.empty()) {
        json days = json::object();
        for (const auto& [day, label] : corpus.day_labels) days[std::to_string(day)] = label;
        meta["day_labels"] = days;
    }
    out << meta.dump() << '\n';

    for (const auto& run : corpus.runs) {
        json order = labels_to_json(run.context_order);
        for (const auto& visit : run.visits) {
            json record = {{"record", "visit"},
                           {"day_index", run.day_index},
                           {"origin_context", run.origin_context.str()},
                           {"context_order", order},
                           {"visit_order", visit.visit_order},
                           {"first_party", visit.first_party},
                           {"context", visit.context.str()}};
            json cookies = json::array();
            for (const auto& cookie : visit.cookies) cookies.push_back(cookie_to_json(cookie));
            json scripts = json::array();
            for (const auto& script : visit.scripts) scripts.push_back(script_to_json(script));
            record["cookies"] = std::move(cookies);
            record["scripts"] = std::move(scripts);
            out << record.dump() << '\n';
        }
    }
}

void write_context_map(const CrawlRecordSet& corpus, std::ostream& out) {
    for (const auto& [site, context] : corpus.site_context_map) out << site << '\t' << context.str() << '\n';
}

}  // namespace collapse
