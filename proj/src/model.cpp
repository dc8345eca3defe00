#include "collapse/model.hpp"

#include "collapse/domain.hpp"
#include "collapse/error.hpp"

#include <algorithm>
#include <set>

namespace collapse {

const std::vector<ContextLabel>& standard_contexts() {
    static const std::vector<ContextLabel> contexts = {
        ContextLabel("adult"),   ContextLabel("ecommerce"), ContextLabel("education"),
        ContextLabel("finance"), ContextLabel("health"),    ContextLabel("lgbtq"),
        ContextLabel("news_media"),
    };
    return contexts;
}

std::string_view to_string(CookieChannel channel) {
    return channel == CookieChannel::http ? "http" : "js";
}

CookieChannel cookie_channel_from_string(std::string_view text) {
    if (text == "http") return CookieChannel::http;
    if (text == "js") return CookieChannel::js;
    throw ParseError("unknown cookie mechanism '" + std::string(text) + "'");
}

std::optional<std::size_t> CrawlRun::position_of(const ContextLabel& context) const {
    auto it = std::find(context_order.begin(), context_order.end(), context);
    if (it == context_order.end()) return std::nullopt;
    return static_cast<std::size_t>(it - context_order.begin());
}

std::vector<std::int64_t> CrawlRecordSet::days() const {
    std::set<std::int64_t> unique;
    for (const auto& run : runs) unique.insert(run.day_index);
    return {unique.begin(), unique.end()};
}

std::string describe_run(const CrawlRun& run) {
    return "day=" + std::to_string(run.day_index) + " origin=" + run.origin_context.str();
}

std::vector<Violation> validate_corpus(const CrawlRecordSet& corpus) {
    std::vector<Violation> out;
    const auto& table = SuffixTable::bundled();
    auto report = [&](std::string run, std::optional<std::size_t> visit, std::string invariant,
                      std::string detail) {
        out.push_back({std::move(run), visit, std::move(invariant), std::move(detail)});
    };

    std::set<ContextLabel> declared;
    for (const auto& context : corpus.contexts) {
        if (context.empty()) report("", std::nullopt, "context_nonempty", "empty context label");
        if (!declared.insert(context).second)
            report("", std::nullopt, "context_unique", "duplicate context '" + context.str() + "'");
    }
    for (const auto& [site, context] : corpus.site_context_map) {
        if (!declared.contains(context))
            report("", std::nullopt, "site_context_declared",
                   "site '" + site + "' mapped to undeclared context '" + context.str() + "'");
    }

    std::set<std::pair<std::int64_t, ContextLabel>> run_keys;
    for (const auto& run : corpus.runs) {
        const auto name = describe_run(run);
        if (run.day_index < 0) report(name, std::nullopt, "day_index_nonnegative", "negative day_index");
        if (!run_keys.insert({run.day_index, run.origin_context}).second)
            report(name, std::nullopt, "run_unique", "duplicate (day_index, origin_context) pair");
        if (!declared.contains(run.origin_context))
            report(name, std::nullopt, "origin_declared", "origin context not in corpus contexts");
        if (run.context_order.empty() || run.context_order.front() != run.origin_context)
            report(name, std::nullopt, "context_order_starts_with_origin",
                   "context_order does not begin with the origin context");
        std::set<ContextLabel> ordered(run.context_order.begin(), run.context_order.end());
        if (ordered.size() != run.context_order.size())
            report(name, std::nullopt, "context_order_unique", "context_order repeats a context");

        std::set<std::int64_t> orders;
        for (std::size_t i = 0; i < run.visits.size(); ++i) {
            const auto& visit = run.visits[i];
            if (visit.visit_order < 0)
                report(name, i, "visit_order_nonnegative", "negative visit_order");
            if (!orders.insert(visit.visit_order).second)
                report(name, i, "visit_order_unique",
                       "visit_order " + std::to_string(visit.visit_order) + " repeated");
            if (i > 0 && run.visits[i - 1].visit_order > visit.visit_order)
                report(name, i, "visits_sorted", "visits not sorted by visit_order");
            if (!ordered.contains(visit.context))
                report(name, i, "visit_context_in_order",
                       "context '" + visit.context.str() + "' missing from context_order");
            if (!is_registrable_domain(visit.first_party, table))
                report(name, i, "first_party_registrable",
                       "'" + visit.first_party + "' is not a normalized registrable domain");
            if (!corpus.site_context_map.contains(visit.first_party))
                report(name, i, "first_party_mapped",
                       "'" + visit.first_party + "' absent from site_context_map");
            for (const auto& cookie : visit.cookies) {
                if (!is_registrable_domain(cookie.setter_domain, table))
                    report(name, i, "setter_registrable",
                           "cookie setter '" + cookie.setter_domain + "' is not normalized");
            }
            for (const auto& script : visit.scripts) {
                if (!is_registrable_domain(script.script_origin, table))
                    report(name, i, "script_origin_registrable",
                           "script origin '" + script.script_origin + "' is not normalized");
                for (const auto& [keyword, count] : script.api_calls) {
                    if (count <= 0)
                        report(name, i, "api_calls_positive",
                               "keyword '" + keyword + "' has non-positive count");
                }
            }
        }
    }
    return out;
}

}  // namespace collapse
