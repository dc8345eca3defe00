#include "collapse/simulator.hpp"

#include "collapse/domain.hpp"
#include "collapse/embedded_data.hpp"
#include "collapse/error.hpp"
#include "collapse/fingerprint.hpp"
#include "collapse/json_fields.hpp"
#include "collapse/similarity.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace collapse {

using nlohmann::json;

namespace {

constexpr std::string_view kAlphanumeric = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr std::int64_t kDay = 86400;
// Generated per-day identifiers stay well below the 0.66 similarity bound.
constexpr double kGeneratedSimilarityCap = 0.5;

std::string_view to_string(ValuePolicy policy) {
    return policy == ValuePolicy::fresh_per_day ? "fresh_per_day" : "stable_within_day";
}

ValuePolicy value_policy_from_string(const std::string& text) {
    if (text == "fresh_per_day") return ValuePolicy::fresh_per_day;
    if (text == "stable_within_day") return ValuePolicy::stable_within_day;
    throw ConfigError("value_policy must be \"fresh_per_day\" or \"stable_within_day\"");
}

std::string two_digits(std::size_t n) {
    char buffer[24];
    std::snprintf(buffer, sizeof buffer, "%02zu", n);
    return buffer;
}

std::string date_label(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    auto day = floor<days>(sys_seconds{seconds{epoch_seconds}});
    year_month_day ymd{day};
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buffer;
}

/// Token of `length` characters dissimilar from every value in `previous`.
std::string dissimilar_token(SeededRng& rng, std::size_t length, const std::vector<std::string>& previous) {
    for (int attempt = 0; attempt < 10'000; ++attempt) {
        auto candidate = rng.token(length, kAlphanumeric);
        bool ok = std::all_of(previous.begin(), previous.end(), [&](const std::string& p) {
            return ratcliff_obershelp(candidate, p) < kGeneratedSimilarityCap;
        });
        if (ok) return candidate;
    }
    throw ConfigError("could not draw a dissimilar identifier of length " + std::to_string(length));
}

std::string_view family_name(Criterion criterion) {
    switch (criterion) {
        case Criterion::lifetime: return "lifetime";
        case Criterion::length: return "length";
        case Criterion::intra_stability: return "intra";
        case Criterion::inter_variability: return "inter";
    }
    return "unknown";
}

constexpr Criterion kFamilies[] = {Criterion::lifetime, Criterion::length, Criterion::intra_stability,
                                   Criterion::inter_variability};

struct Layout {
    std::map<ContextLabel, std::vector<std::string>> sites;  // per context, index order
    std::set<std::string> all_sites;
};

Layout layout_for(const SimPlan& plan) {
    Layout layout;
    for (const auto& context : plan.contexts) {
        auto& names = layout.sites[context];
        for (std::size_t i = 0; i < plan.sites_per_context; ++i) {
            auto name = simulated_site_name(context, i);
            if (!layout.all_sites.insert(name).second)
                throw ConfigError("contexts produce colliding site name '" + name + "'");
            names.push_back(std::move(name));
        }
    }
    return layout;
}

void validate_plan(const SimPlan& plan, const Layout& layout) {
    if (plan.contexts.empty()) throw ConfigError("plan has no contexts");
    std::set<ContextLabel> seen;
    for (const auto& context : plan.contexts) {
        if (context.empty()) throw ConfigError("plan has an empty context label");
        if (!seen.insert(context).second) throw ConfigError("plan repeats context '" + context.str() + "'");
    }
    if (plan.sites_per_context == 0) throw ConfigError("sites_per_context must be positive");
    if (plan.sites_per_context > 999) throw ConfigError("sites_per_context must be at most 999");
    if (plan.days == 0) throw ConfigError("days must be positive");
    std::set<std::string> trackers;
    for (const auto& planted : plan.planted) {
        if (!is_registrable_domain(planted.tracker, SuffixTable::bundled()))
            throw ConfigError("planted tracker '" + planted.tracker + "' is not a registrable domain");
        if (layout.all_sites.contains(planted.tracker))
            throw ConfigError("planted tracker '" + planted.tracker + "' is also a crawled site");
        if (planted.tracker.rfind("bg-", 0) == 0 || planted.tracker.rfind("decoy-", 0) == 0 ||
            planted.tracker.rfind("solo-fp-", 0) == 0)
            throw ConfigError("planted tracker '" + planted.tracker + "' uses a reserved prefix");
        if (!trackers.insert(planted.tracker).second)
            throw ConfigError("planted tracker '" + planted.tracker + "' appears twice");
        if (planted.target_sites.empty())
            throw ConfigError("planted tracker '" + planted.tracker + "' has no target sites");
        if (planted.lifetime_days < 0) throw ConfigError("lifetime_days must be non-negative");
        if (planted.cookie_name.empty()) throw ConfigError("cookie_name must be non-empty");
        for (const auto& target : planted.target_sites) {
            auto it = layout.sites.find(target.context);
            if (it == layout.sites.end())
                throw ConfigError("planted tracker '" + planted.tracker + "' references unknown context '" +
                                  target.context.str() + "'");
            if (std::find(it->second.begin(), it->second.end(), target.site) == it->second.end())
                throw ConfigError("planted tracker '" + planted.tracker + "' references unknown site '" +
                                  target.site + "' in context '" + target.context.str() + "'");
        }
    }
}

/// Everything placed on one site, shared by all runs.
struct Placement {
    std::vector<std::size_t> plants;
    std::vector<std::size_t> decoys;
    std::vector<std::size_t> background;
    std::vector<std::size_t> lone;
};

}  // namespace

std::uint64_t SeededRng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        std::uint64_t x = engine_();
        if (x >= threshold) return x % bound;
    }
}

std::string SeededRng::token(std::size_t length, std::string_view alphabet) {
    std::string out(length, ' ');
    for (auto& c : out) c = alphabet[below(alphabet.size())];
    return out;
}

bool PlantedTracker::cookie_qualifies() const {
    return mechanism != Mechanism::fingerprint && lifetime_days > 90 && value_policy == ValuePolicy::fresh_per_day;
}

std::string simulated_site_name(const ContextLabel& context, std::size_t index) {
    std::string stem;
    for (unsigned char c : context.str()) {
        stem.push_back(std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '-');
    }
    return stem + "-" + two_digits(index) + ".com";
}

namespace {

SimPlan parse_plan(const json& node) {
    require_object(node, "plan");
    static const std::set<std::string> known = {"contexts",          "sites_per_context",  "days",
                                                "planted",           "seed",               "background_trackers",
                                                "decoys_per_family", "lone_fingerprinters", "start_epoch",
                                                "fingerprint_keywords"};
    for (const auto& item : node.items()) {
        if (!known.contains(item.key())) throw ConfigError("unknown plan key '" + item.key() + "'");
    }
    SimPlan plan;
    if (node.contains("contexts")) {
        const auto& contexts = node.at("contexts");
        if (!contexts.is_array()) throw ConfigError("'contexts' must be an array");
        for (const auto& c : contexts) {
            if (!c.is_string()) throw ConfigError("'contexts' must hold strings");
            plan.contexts.emplace_back(c.get<std::string>());
        }
    } else {
        plan.contexts = standard_contexts();
    }
    plan.sites_per_context = field_or<std::size_t>(node, "sites_per_context", plan.sites_per_context);
    plan.days = field_or<std::size_t>(node, "days", plan.days);
    plan.seed = field_or<std::uint64_t>(node, "seed", plan.seed);
    plan.background_trackers = field_or<std::size_t>(node, "background_trackers", plan.background_trackers);
    plan.decoys_per_family = field_or<std::size_t>(node, "decoys_per_family", plan.decoys_per_family);
    plan.lone_fingerprinters = field_or<std::size_t>(node, "lone_fingerprinters", plan.lone_fingerprinters);
    plan.start_epoch = field_or<std::int64_t>(node, "start_epoch", plan.start_epoch);
    if (node.contains("fingerprint_keywords")) {
        for (const auto& k : node.at("fingerprint_keywords")) {
            if (!k.is_string()) throw ConfigError("'fingerprint_keywords' must hold strings");
            plan.fingerprint_keywords.push_back(k.get<std::string>());
        }
    }
    if (node.contains("planted")) {
        const auto& planted = node.at("planted");
        if (!planted.is_array()) throw ConfigError("'planted' must be an array");
        for (const auto& p : planted) {
            require_object(p, "planted tracker");
            PlantedTracker tracker;
            tracker.tracker = field<std::string>(p, "tracker");
            tracker.mechanism = mechanism_from_string(field_or<std::string>(p, "mechanism", "cookie"));
            tracker.value_policy = value_policy_from_string(field_or<std::string>(p, "value_policy", "fresh_per_day"));
            tracker.lifetime_days = field_or<int>(p, "lifetime_days", tracker.lifetime_days);
            tracker.cookie_name = field_or<std::string>(p, "cookie_name", tracker.cookie_name);
            const auto& targets = field_node(p, "target_sites");
            if (!targets.is_array()) throw ConfigError("'target_sites' must be an array");
            for (const auto& t : targets) {
                require_object(t, "target site");
                SiteRef ref;
                ref.context = ContextLabel(field<std::string>(t, "context"));
                if (t.contains("site")) {
                    ref.site = field<std::string>(t, "site");
                } else {
                    ref.site = simulated_site_name(ref.context, field<std::size_t>(t, "index"));
                }
                tracker.target_sites.push_back(std::move(ref));
            }
            plan.planted.push_back(std::move(tracker));
        }
    }
    return plan;
}

}  // namespace

SimPlan SimPlan::from_json(const json& node) {
    try {
        return parse_plan(node);
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
}

SimPlan SimPlan::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plan: " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

SimPlan SimPlan::default_plan() { return from_json(json::parse(embedded::default_plan())); }

json SimPlan::to_json() const {
    json out;
    json ctx = json::array();
    for (const auto& c : contexts) ctx.push_back(c.str());
    out["contexts"] = ctx;
    out["sites_per_context"] = sites_per_context;
    out["days"] = days;
    out["seed"] = seed;
    out["background_trackers"] = background_trackers;
    out["decoys_per_family"] = decoys_per_family;
    out["lone_fingerprinters"] = lone_fingerprinters;
    out["start_epoch"] = start_epoch;
    if (!fingerprint_keywords.empty()) out["fingerprint_keywords"] = fingerprint_keywords;
    json planted_json = json::array();
    for (const auto& p : planted) {
        json targets = json::array();
        for (const auto& t : p.target_sites) targets.push_back({{"site", t.site}, {"context", t.context.str()}});
        planted_json.push_back({{"tracker", p.tracker},
                                {"mechanism", std::string(collapse::to_string(p.mechanism))},
                                {"value_policy", std::string(to_string(p.value_policy))},
                                {"lifetime_days", p.lifetime_days},
                                {"cookie_name", p.cookie_name},
                                {"target_sites", targets}});
    }
    out["planted"] = planted_json;
    return out;
}

json GroundTruth::to_json() const {
    json out;
    out["schema_version"] = 1;
    json rows = json::array();
    for (const auto& f : findings) {
        json reached = json::array();
        for (const auto& c : f.contexts_reached) reached.push_back(c.str());
        json row = {{"day_index", f.day_index},
                    {"origin_context", f.origin_context.str()},
                    {"scope", std::string(collapse::to_string(f.scope))},
                    {"tracker", f.tracker},
                    {"mechanism", std::string(collapse::to_string(f.mechanism))},
                    {"sites", f.sites},
                    {"contexts_reached", reached}};
        if (f.scope == Scope::between) row["distance"] = f.distance;
        rows.push_back(std::move(row));
    }
    out["findings"] = rows;
    json edge_rows = json::array();
    for (const auto& [key, set] : edges) {
        json list = json::array();
        for (const auto& [from, to] : set) list.push_back({from, to});
        edge_rows.push_back({{"day_index", std::get<0>(key)},
                             {"origin_context", std::get<1>(key).str()},
                             {"scope", std::string(collapse::to_string(std::get<2>(key)))},
                             {"edges", list}});
    }
    out["edges"] = edge_rows;
    json decoy_rows = json::array();
    for (const auto& d : decoys) {
        decoy_rows.push_back({{"tracker", d.tracker},
                              {"cookie_name", d.cookie_name},
                              {"sites", d.sites},
                              {"fails", std::string(collapse::to_string(d.fails))}});
    }
    out["decoys"] = decoy_rows;
    out["planted_trackers"] = planted_trackers;
    out["expected_trackers"] = expected_trackers;
    return out;
}

Simulation generate(const SimPlan& plan) {
    const Layout layout = layout_for(plan);
    validate_plan(plan, layout);

    std::vector<std::string> keywords = plan.fingerprint_keywords;
    if (keywords.empty()) {
        const auto& defaults = default_keywords();
        auto it = defaults.begin();
        for (int i = 0; i < 2 && it != defaults.end(); ++i, ++it) keywords.push_back(*it);
    }
    if (keywords.empty()) throw ConfigError("no fingerprinting keywords available for the simulator");

    SeededRng rng(plan.seed);
    Simulation sim;
    auto& corpus = sim.corpus;
    auto& truth = sim.truth;
    corpus.contexts = plan.contexts;
    std::map<std::string, ContextLabel> context_of_site;
    std::vector<std::string> site_list;  // context order, then index
    for (const auto& context : plan.contexts) {
        for (const auto& site : layout.sites.at(context)) {
            corpus.site_context_map[site] = context;
            context_of_site[site] = context;
            site_list.push_back(site);
        }
    }
    for (std::size_t d = 0; d < plan.days; ++d) {
        corpus.day_labels[static_cast<std::int64_t>(d)] =
            date_label(plan.start_epoch + static_cast<std::int64_t>(d) * kDay);
    }

    std::map<std::string, Placement> placement;
    for (std::size_t p = 0; p < plan.planted.size(); ++p) {
        std::set<std::string> targets;
        for (const auto& t : plan.planted[p].target_sites) targets.insert(t.site);
        for (const auto& site : targets) placement[site].plants.push_back(p);
        truth.planted_trackers.insert(plan.planted[p].tracker);
    }

    // Decoys: each on two sites, in two different contexts when possible.
    for (auto family : kFamilies) {
        for (std::size_t k = 0; k < plan.decoys_per_family; ++k) {
            DecoyCookie decoy;
            decoy.tracker = "decoy-" + std::string(family_name(family)) + "-" + two_digits(k) + ".net";
            decoy.cookie_name = "id";
            decoy.fails = family;
            auto first = site_list[rng.below(site_list.size())];
            std::string second = first;
            for (int attempt = 0; attempt < 64 && (second == first || (plan.contexts.size() > 1 &&
                                                                       context_of_site[second] == context_of_site[first]));
                 ++attempt) {
                second = site_list[rng.below(site_list.size())];
            }
            decoy.sites = {first};
            if (second != first) decoy.sites.push_back(second);
            std::sort(decoy.sites.begin(), decoy.sites.end());
            for (const auto& site : decoy.sites) placement[site].decoys.push_back(truth.decoys.size());
            truth.decoys.push_back(std::move(decoy));
        }
    }
    for (std::size_t b = 0; b < plan.background_trackers; ++b) {
        bool placed = false;
        for (const auto& site : site_list) {
            if (rng.chance(1, 4)) {
                placement[site].background.push_back(b);
                placed = true;
            }
        }
        if (!placed) placement[site_list[rng.below(site_list.size())]].background.push_back(b);
    }
    for (std::size_t l = 0; l < plan.lone_fingerprinters; ++l) {
        placement[site_list[rng.below(site_list.size())]].lone.push_back(l);
    }

    // Identifier values, per day (and per run for intra-day decoys).
    const std::size_t runs_per_day = plan.contexts.size();
    std::vector<std::vector<std::string>> plant_values(plan.planted.size());
    for (std::size_t p = 0; p < plan.planted.size(); ++p) {
        const auto& planted = plan.planted[p];
        std::vector<std::string> previous;
        std::string stable = rng.token(20, kAlphanumeric);
        for (std::size_t d = 0; d < plan.days; ++d) {
            if (planted.value_policy == ValuePolicy::stable_within_day) {
                plant_values[p].push_back(stable);
            } else {
                previous.push_back(dissimilar_token(rng, 20, previous));
                plant_values[p].push_back(previous.back());
            }
        }
    }
    // decoy -> day -> run -> value
    std::vector<std::vector<std::vector<std::string>>> decoy_values(truth.decoys.size());
    for (std::size_t i = 0; i < truth.decoys.size(); ++i) {
        const auto family = truth.decoys[i].fails;
        std::vector<std::string> previous;
        const std::size_t length = family == Criterion::length ? (i % 2 == 0 ? 5 : 120) : 18;
        std::string constant = rng.token(length, kAlphanumeric);
        for (std::size_t d = 0; d < plan.days; ++d) {
            std::vector<std::string> day(runs_per_day);
            if (family == Criterion::inter_variability) {
                std::fill(day.begin(), day.end(), constant);
            } else if (family == Criterion::intra_stability) {
                std::vector<std::string> today;
                for (auto& value : day) {
                    do {
                        value = dissimilar_token(rng, length, previous);
                    } while (std::find(today.begin(), today.end(), value) != today.end());
                    today.push_back(value);
                }
                previous.insert(previous.end(), today.begin(), today.end());
            } else {
                auto value = dissimilar_token(rng, length, previous);
                previous.push_back(value);
                std::fill(day.begin(), day.end(), value);
            }
            decoy_values[i].push_back(std::move(day));
        }
    }

    for (std::size_t d = 0; d < plan.days; ++d) {
        std::map<std::string, std::string> first_party_values;
        for (const auto& site : site_list) first_party_values[site] = rng.token(22, kAlphanumeric);

        for (std::size_t r = 0; r < plan.contexts.size(); ++r) {
            CrawlRun run;
            run.day_index = static_cast<std::int64_t>(d);
            run.origin_context = plan.contexts[r];
            std::vector<ContextLabel> rest;
            for (const auto& c : plan.contexts) {
                if (c != run.origin_context) rest.push_back(c);
            }
            rng.shuffle(rest);
            run.context_order.push_back(run.origin_context);
            run.context_order.insert(run.context_order.end(), rest.begin(), rest.end());

            std::int64_t order = 0;
            for (const auto& context : run.context_order) {
                for (const auto& site : layout.sites.at(context)) {
                    SiteVisit visit;
                    visit.first_party = site;
                    visit.context = context;
                    visit.visit_order = order++;
                    const std::int64_t now = plan.start_epoch + static_cast<std::int64_t>(d) * kDay +
                                             static_cast<std::int64_t>(r) * 3600 + visit.visit_order * 5;
                    visit.cookies.push_back(
                        {site, "_fp_id", first_party_values[site], now + 400 * kDay, CookieChannel::http, now});
                    const auto& here = placement[site];
                    for (auto p : here.plants) {
                        const auto& planted = plan.planted[p];
                        if (planted.mechanism != Mechanism::fingerprint) {
                            visit.cookies.push_back({planted.tracker, planted.cookie_name, plant_values[p][d],
                                                     now + planted.lifetime_days * kDay, CookieChannel::http, now});
                        }
                        if (planted.mechanism != Mechanism::cookie) {
                            ScriptObservation script{planted.tracker, "https://cdn." + planted.tracker + "/fp.js", {}};
                            for (std::size_t k = 0; k < keywords.size(); ++k)
                                script.api_calls[keywords[k]] = static_cast<std::int64_t>(k + 1);
                            script.api_calls["Document.createElement"] = 4;
                            visit.scripts.push_back(std::move(script));
                        }
                    }
                    for (auto i : here.decoys) {
                        const auto& decoy = truth.decoys[i];
                        std::optional<std::int64_t> expiry = now + 365 * kDay;
                        if (decoy.fails == Criterion::lifetime) {
                            expiry = (i % 2 == 0) ? std::optional<std::int64_t>(now + 30 * kDay) : std::nullopt;
                        }
                        visit.cookies.push_back(
                            {decoy.tracker, decoy.cookie_name, decoy_values[i][d][r], expiry, CookieChannel::js, now});
                    }
                    for (auto b : here.background) {
                        auto tracker = "bg-" + two_digits(b) + ".net";
                        visit.cookies.push_back(
                            {tracker, "_sess", rng.token(12, kAlphanumeric), std::nullopt, CookieChannel::js, now});
                        visit.scripts.push_back({tracker,
                                                 "https://" + tracker + "/tag.js",
                                                 {{"Document.querySelector", 3}, {"Window.setTimeout", 1}}});
                    }
                    for (auto l : here.lone) {
                        auto tracker = "solo-fp-" + two_digits(l) + ".net";
                        visit.scripts.push_back(
                            {tracker, "https://" + tracker + "/probe.js", {{keywords.front(), 1}}});
                    }
                    run.visits.push_back(std::move(visit));
                }
            }

            // Expected findings for this run.
            std::map<std::string, std::int64_t> position;
            for (const auto& visit : run.visits) position[visit.first_party] = visit.visit_order;
            auto add_edges = [&](Scope scope, const std::set<std::string>& sites) {
                auto& set = truth.edges[{run.day_index, run.origin_context, scope}];
                std::vector<std::string> ordered(sites.begin(), sites.end());
                std::sort(ordered.begin(), ordered.end(),
                          [&](const std::string& a, const std::string& b) { return position[a] < position[b]; });
                for (std::size_t i = 0; i < ordered.size(); ++i) {
                    for (std::size_t j = i + 1; j < ordered.size(); ++j) set.insert({ordered[i], ordered[j]});
                }
            };
            truth.edges[{run.day_index, run.origin_context, Scope::between}];
            truth.edges[{run.day_index, run.origin_context, Scope::within}];
            for (const auto& planted : plan.planted) {
                std::set<std::string> targets;
                for (const auto& t : planted.target_sites) targets.insert(t.site);
                const bool by_cookie = planted.cookie_qualifies() && plan.days >= 2;
                const bool by_script = planted.mechanism != Mechanism::cookie && targets.size() >= 2;
                if (!by_cookie && !by_script) continue;
                const Mechanism mechanism =
                    by_cookie && by_script ? Mechanism::both : by_cookie ? Mechanism::cookie : Mechanism::fingerprint;

                std::set<std::string> in_origin;
                std::set<ContextLabel> contexts;
                for (const auto& site : targets) {
                    contexts.insert(context_of_site[site]);
                    if (context_of_site[site] == run.origin_context) in_origin.insert(site);
                }
                if (!in_origin.empty() && contexts.size() >= 2) {
                    ExpectedFinding f{run.day_index, run.origin_context, Scope::between, planted.tracker, mechanism,
                                      targets, {}, 0};
                    for (std::size_t i = 0; i < run.context_order.size(); ++i) {
                        if (contexts.contains(run.context_order[i])) {
                            f.contexts_reached.push_back(run.context_order[i]);
                            f.distance = i;
                        }
                    }
                    add_edges(Scope::between, targets);
                    truth.findings.push_back(std::move(f));
                    truth.expected_trackers.insert(planted.tracker);
                }
                if (in_origin.size() >= 2) {
                    truth.findings.push_back({run.day_index, run.origin_context, Scope::within, planted.tracker,
                                              mechanism, in_origin, {run.origin_context}, 0});
                    add_edges(Scope::within, in_origin);
                    truth.expected_trackers.insert(planted.tracker);
                }
            }
            corpus.runs.push_back(std::move(run));
        }
    }
    std::sort(truth.findings.begin(), truth.findings.end(), [](const ExpectedFinding& a, const ExpectedFinding& b) {
        return std::tie(a.day_index, a.origin_context, a.scope, a.tracker) <
               std::tie(b.day_index, b.origin_context, b.scope, b.tracker);
    });
    std::sort(corpus.runs.begin(), corpus.runs.end(), [](const CrawlRun& a, const CrawlRun& b) {
        return std::tie(a.day_index, a.origin_context) < std::tie(b.day_index, b.origin_context);
    });
    return sim;
}

SimPlan random_plan(std::uint64_t seed, std::size_t sites_per_context, std::size_t days, std::size_t max_planted) {
    SeededRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SimPlan plan;
    plan.contexts = standard_contexts();
    plan.sites_per_context = sites_per_context;
    plan.days = days;
    plan.seed = seed;
    plan.background_trackers = 6;
    plan.decoys_per_family = 2;
    plan.lone_fingerprinters = 1;
    const std::size_t count = max_planted == 0 ? 0 : 1 + rng.below(max_planted);
    for (std::size_t p = 0; p < count; ++p) {
        PlantedTracker planted;
        planted.tracker = "planted-" + two_digits(p) + ".net";
        auto roll = rng.below(4);
        planted.mechanism = roll < 2 ? Mechanism::cookie : roll == 2 ? Mechanism::fingerprint : Mechanism::both;
        planted.lifetime_days = rng.chance(1, 10) ? 60 : 365;
        planted.value_policy = rng.chance(1, 10) ? ValuePolicy::stable_within_day : ValuePolicy::fresh_per_day;
        const std::size_t targets = 1 + rng.below(6);
        std::set<SiteRef> chosen;
        for (std::size_t t = 0; t < targets; ++t) {
            const auto& context = plan.contexts[rng.below(plan.contexts.size())];
            chosen.insert({simulated_site_name(context, rng.below(sites_per_context)), context});
        }
        planted.target_sites.assign(chosen.begin(), chosen.end());
        plan.planted.push_back(std::move(planted));
    }
    return plan;
}

std::vector<SuiteHistory> generate_history_suite(std::size_t qualifying, std::size_t decoys, std::size_t days,
                                                 std::size_t runs_per_day, std::uint64_t seed) {
    if (days < 2) throw ConfigError("a history suite needs at least two days");
    if (runs_per_day < 2) throw ConfigError("a history suite needs at least two runs per day");
    SeededRng rng(seed);
    // Day d draws from its own slice of the alphabet; no character is shared
    // between days, so representatives of different days never match.
    const std::size_t slice = kAlphanumeric.size() / days;
    if (slice < 2) throw ConfigError("too many days for disjoint value alphabets");
    auto alphabet = [&](std::size_t day) { return kAlphanumeric.substr(day * slice, slice); };
    constexpr std::int64_t kLongLife = 91 * kDay;

    auto make = [&](std::size_t index, std::size_t length, std::optional<std::int64_t> lifetime) {
        SuiteHistory item;
        item.history.key = {"suite-" + std::to_string(index) + ".net", "id", "site-" + std::to_string(index) + ".com"};
        for (std::size_t d = 0; d < days; ++d) {
            auto value = rng.token(length, alphabet(d));
            item.history.values[static_cast<std::int64_t>(d)] = std::vector<std::string>(runs_per_day, value);
            if (lifetime) item.history.lifetimes[static_cast<std::int64_t>(d)] = *lifetime;
        }
        return item;
    };

    std::vector<SuiteHistory> out;
    for (std::size_t q = 0; q < qualifying; ++q) {
        std::size_t length = q % 3 == 0 ? 8 : q % 3 == 1 ? 100 : 8 + rng.below(93);
        std::int64_t lifetime = q % 2 == 0 ? 90 * kDay + 1 : kLongLife + static_cast<std::int64_t>(rng.below(300)) * kDay;
        out.push_back(make(out.size(), length, lifetime));
    }
    for (std::size_t j = 0; j < decoys; ++j) {
        const Criterion family = kFamilies[j % 4];
        const std::size_t variant = (j / 4) % 3;
        SuiteHistory item;
        switch (family) {
            case Criterion::lifetime: {
                std::optional<std::int64_t> lifetime =
                    variant == 0 ? std::nullopt : std::optional<std::int64_t>(variant == 1 ? 90 * kDay : 30 * kDay);
                item = make(out.size(), 16 + rng.below(40), lifetime);
                break;
            }
            case Criterion::length: {
                std::size_t length = variant == 0 ? 7 : variant == 1 ? 101 : 3;
                item = make(out.size(), length, kLongLife);
                break;
            }
            case Criterion::intra_stability: {
                item = make(out.size(), 12 + rng.below(40), kLongLife);
                // One run of one day sees a different value; the day's
                // representative (the majority value) is unchanged.
                auto day = static_cast<std::int64_t>(rng.below(days));
                auto& values = item.history.values[day];
                auto& odd = values[rng.below(values.size())];
                std::string replacement = odd;
                while (replacement == odd) replacement = rng.token(odd.size(), alphabet(static_cast<std::size_t>(day)));
                odd = replacement;
                break;
            }
            case Criterion::inter_variability: {
                item = make(out.size(), 16 + rng.below(40), kLongLife);
                const auto base = item.history.values[0].front();
                for (std::size_t d = 0; d < days; ++d) {
                    std::string value = base;
                    // Variant 1: one character per later day replaced by a
                    // symbol outside the alphabet (similarity stays >= 0.87).
                    if (variant == 1 && d > 0) value[(d - 1) % value.size()] = '~';
                    item.history.values[static_cast<std::int64_t>(d)] = std::vector<std::string>(runs_per_day, value);
                }
                break;
            }
        }
        item.fails = family;
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace collapse
