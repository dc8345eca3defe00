#pragma once

// Small hand-built corpora for unit tests.

#include "collapse/model.hpp"

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace fixtures {

using namespace collapse;

constexpr std::int64_t kDay = 86400;

inline CookieObservation cookie(const std::string& setter, const std::string& name, const std::string& value,
                                std::optional<std::int64_t> lifetime_days = 365, std::int64_t observed_at = 0) {
    CookieObservation c;
    c.setter_domain = setter;
    c.name = name;
    c.value = value;
    c.observed_at = observed_at;
    if (lifetime_days) c.expiry = observed_at + *lifetime_days * kDay;
    return c;
}

inline ScriptObservation script(const std::string& origin, std::initializer_list<std::string> keywords) {
    ScriptObservation s;
    s.script_origin = origin;
    s.script_url = "https://" + origin + "/s.js";
    for (const auto& k : keywords) s.api_calls[k] = 1;
    return s;
}

inline SiteVisit visit(const std::string& site, const std::string& context, std::int64_t order,
                       std::vector<CookieObservation> cookies = {}, std::vector<ScriptObservation> scripts = {}) {
    SiteVisit v;
    v.first_party = site;
    v.context = ContextLabel(context);
    v.visit_order = order;
    v.cookies = std::move(cookies);
    v.scripts = std::move(scripts);
    return v;
}

inline CrawlRun run(std::int64_t day, const std::vector<std::string>& order, std::vector<SiteVisit> visits) {
    CrawlRun r;
    r.day_index = day;
    r.origin_context = ContextLabel(order.front());
    for (const auto& c : order) r.context_order.emplace_back(c);
    r.visits = std::move(visits);
    return r;
}

/// Declares `contexts` and maps every visited site to its visit context.
inline CrawlRecordSet corpus(const std::vector<std::string>& contexts, std::vector<CrawlRun> runs) {
    CrawlRecordSet c;
    for (const auto& label : contexts) c.contexts.emplace_back(label);
    for (const auto& r : runs) {
        for (const auto& v : r.visits) c.site_context_map[v.first_party] = v.context;
    }
    c.runs = std::move(runs);
    return c;
}

}  // namespace fixtures
