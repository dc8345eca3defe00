#include "collapse/analytics.hpp"
#include "collapse/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace collapse;
using namespace fixtures;

namespace {

const std::vector<std::string> kOrder{"c1", "c2", "c3", "c4", "c5", "c6", "c7"};

Identifiers cookie_ids() {
    Identifiers ids;
    ids.id_cookies["t.net"] = "uid";
    return ids;
}

CookieObservation uid(const std::string& value) { return cookie("t.net", "uid", value); }

}  // namespace

TEST_CASE("same ID value in the origin and two contexts later") {
    auto r = run(0, kOrder, {visit("a.com", "c1", 0, {uid("V1")}), visit("b.com", "c3", 1, {uid("V1")})});
    auto findings = between_context_findings(r, cookie_ids());
    REQUIRE(findings.size() == 1);
    const auto& f = findings[0];
    CHECK(f.tracker == "t.net");
    CHECK(f.scope == Scope::between);
    CHECK(f.mechanism == Mechanism::cookie);
    CHECK(f.origin_context == ContextLabel("c1"));
    CHECK(f.contexts_reached == std::vector<ContextLabel>{ContextLabel("c1"), ContextLabel("c3")});
    CHECK(f.sites() == std::set<std::string>{"a.com", "b.com"});
    CHECK(diffusion_distance(f, r) == 2);
}

TEST_CASE("different values link nothing") {
    auto r = run(0, kOrder, {visit("a.com", "c1", 0, {uid("V1")}), visit("b.com", "c3", 1, {uid("V2")})});
    CHECK(between_context_findings(r, cookie_ids()).empty());
}

TEST_CASE("evidence must touch the origin context") {
    auto r = run(0, kOrder, {visit("a.com", "c2", 0, {uid("V1")}), visit("b.com", "c3", 1, {uid("V1")})});
    CHECK(between_context_findings(r, cookie_ids()).empty());
}

TEST_CASE("tracker's own first-party rows are not evidence") {
    auto r = run(0, kOrder, {visit("t.net", "c1", 0, {uid("V1")}), visit("b.com", "c3", 1, {uid("V1")})});
    CHECK(between_context_findings(r, cookie_ids()).empty());
}

TEST_CASE("within-context findings") {
    auto r = run(0, kOrder,
                 {visit("a.com", "c1", 0, {uid("V1")}), visit("b.com", "c1", 1, {uid("V1")}),
                  visit("c.com", "c2", 2, {uid("V1")})});
    auto within = within_context_findings(r, ContextLabel("c1"), cookie_ids());
    REQUIRE(within.size() == 1);
    CHECK(within[0].scope == Scope::within);
    CHECK(within[0].sites() == std::set<std::string>{"a.com", "b.com"});
    CHECK(within[0].contexts_reached == std::vector<ContextLabel>{ContextLabel("c1")});
    CHECK_THROWS_AS(diffusion_distance(within[0], r), InputError);

    auto single = run(0, kOrder, {visit("a.com", "c1", 0, {uid("V1")}), visit("c.com", "c2", 1, {uid("V1")})});
    CHECK(within_context_findings(single, ContextLabel("c1"), cookie_ids()).empty());
}

TEST_CASE("fingerprinting evidence") {
    Identifiers ids;
    ids.flagged = {"k"};
    ids.fingerprinters["fp.net"] = {"a.com", "b.com"};
    ids.fingerprinters["solo.net"] = {"a.com"};
    auto r = run(0, kOrder,
                 {visit("a.com", "c1", 0, {}, {script("fp.net", {"k"}), script("solo.net", {"k"})}),
                  visit("b.com", "c4", 1, {}, {script("fp.net", {"k"})})});
    auto findings = between_context_findings(r, ids);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].tracker == "fp.net");
    CHECK(findings[0].mechanism == Mechanism::fingerprint);
    CHECK(findings[0].evidence[0].kind == EvidenceKind::script);
    CHECK(findings[0].evidence[0].token == "https://fp.net/s.js");
    CHECK(diffusion_distance(findings[0], r) == 3);

    ids.id_cookies["fp.net"] = "uid";
    r.visits[0].cookies.push_back(cookie("fp.net", "uid", "V"));
    r.visits[1].cookies.push_back(cookie("fp.net", "uid", "V"));
    CHECK(between_context_findings(r, ids)[0].mechanism == Mechanism::both);
}

TEST_CASE("diffusion distance") {
    auto make = [](std::vector<std::string> contexts) {
        std::vector<SiteVisit> visits;
        for (std::size_t i = 0; i < contexts.size(); ++i)
            visits.push_back(visit("s" + std::to_string(i) + ".com", contexts[i], static_cast<std::int64_t>(i),
                                   {uid("V1")}));
        return run(0, kOrder, visits);
    };
    auto one = make({"c1", "c2"});
    CHECK(diffusion_distance(between_context_findings(one, cookie_ids()).at(0), one) == 1);
    auto far = make({"c1", "c7"});
    CHECK(diffusion_distance(between_context_findings(far, cookie_ids()).at(0), far) == 6);
    auto spread = make({"c1", "c3", "c6"});
    CHECK(diffusion_distance(between_context_findings(spread, cookie_ids()).at(0), spread) == 5);

    auto finding = between_context_findings(one, cookie_ids()).at(0);
    finding.evidence.push_back({"z.com", ContextLabel("elsewhere"), 0, EvidenceKind::cookie, "V1"});
    CHECK_THROWS_AS(diffusion_distance(finding, one), IntegrityError);
}

TEST_CASE("within participation: two of ten sites") {
    std::vector<SiteVisit> visits;
    for (int i = 0; i < 10; ++i) {
        std::vector<CookieObservation> cookies;
        if (i < 2) cookies.push_back(uid("V1"));
        cookies.push_back(cookie("other.net", "x", "y"));
        visits.push_back(visit("s" + std::to_string(i) + ".com", "c1", i, cookies));
    }
    auto c = corpus(kOrder, {run(0, kOrder, visits)});
    auto analysis = analyze(c, cookie_ids());
    const auto& m = analysis.runs[0].within_metrics;
    CHECK(m.crawled_sites == 10);
    CHECK(m.participating_sites == 2);
    CHECK(m.participating_sites_pct == doctest::Approx(20.0));
    CHECK(m.unique_third_parties == 2);
    CHECK(m.cookie_count == 20 - 8);
    CHECK(m.pct_persistent == doctest::Approx(50.0));

    AnalysisOptions strict;
    strict.participation_min_degree = 2;
    CHECK(analyze(c, cookie_ids(), strict).runs[0].within_metrics.participating_sites == 0);
}

TEST_CASE("zero findings") {
    auto c = corpus(kOrder, {run(0, kOrder, {visit("a.com", "c1", 0, {cookie("o.net", "x", "y")})})});
    auto analysis = analyze(c, cookie_ids());
    auto reports = collapse_report(analysis, Scope::between);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].persistent_identifiers == 0.0);
    CHECK(reports[0].pct_persistent == 0.0);
    CHECK(reports[0].participating_sites_pct == 0.0);
    auto hist = diffusion_histograms(analysis);
    REQUIRE(hist.size() == 1);
    CHECK(hist[0].days_with_findings == 0);
    CHECK(hist[0].buckets == std::vector<double>(6, 0.0));
    CHECK(coverage_distribution({}).empty());
}

TEST_CASE("report averages over days") {
    std::vector<CrawlRun> runs;
    // Day 0: one identifier out of two third parties; day 1: none out of two.
    runs.push_back(run(0, kOrder,
                       {visit("a.com", "c1", 0, {uid("V1"), cookie("o.net", "x", "y")}),
                        visit("b.com", "c2", 1, {uid("V1")})}));
    runs.push_back(run(1, kOrder,
                       {visit("a.com", "c1", 0, {uid("V2"), cookie("o.net", "x", "y")}),
                        visit("b.com", "c2", 1, {uid("V3")})}));
    auto c = corpus(kOrder, runs);
    auto analysis = analyze(c, cookie_ids());
    auto report = collapse_report(analysis, Scope::between).at(0);
    CHECK(report.unique_third_parties == doctest::Approx(2.0));
    CHECK(report.persistent_identifiers == doctest::Approx(0.5));
    CHECK(report.pct_persistent == doctest::Approx(25.0));
    CHECK(report.participating_sites_pct == doctest::Approx(50.0));
    CHECK(report.per_day.size() == 2);
    auto hist = diffusion_histograms(analysis).at(0);
    CHECK(hist.mean_identifiers == doctest::Approx(0.5));
    CHECK(hist.days_with_findings == 1);
    CHECK(hist.buckets[0] == doctest::Approx(100.0));
}

TEST_CASE("coverage") {
    PersistentIdentifierFinding f;
    f.tracker = "t.net";
    f.evidence = {{"a.com", ContextLabel("c1"), 0, EvidenceKind::cookie, "v"},
                  {"b.com", ContextLabel("c2"), 0, EvidenceKind::cookie, "v"}};
    CHECK(coverage_distribution({f}) == std::vector<TrackerCoverage>{{"t.net", 100.0, 2}});
    auto g = f;
    g.tracker = "u.net";
    g.evidence[0].first_party = "c.com";
    g.evidence[1].first_party = "d.com";
    CHECK(coverage_distribution({g, f}) ==
          std::vector<TrackerCoverage>{{"t.net", 50.0, 2}, {"u.net", 50.0, 2}});
}

TEST_CASE("mechanism overlap") {
    PersistentIdentifierFinding a, b, c, d;
    a.tracker = "one.net";
    a.mechanism = Mechanism::cookie;
    a.evidence = {{"x.com", ContextLabel("c1"), 0, EvidenceKind::cookie, "v"}};
    b.tracker = "two.net";
    b.mechanism = Mechanism::fingerprint;
    b.evidence = {{"x.com", ContextLabel("c1"), 0, EvidenceKind::script, "u"},
                  {"y.com", ContextLabel("c2"), 0, EvidenceKind::script, "u"}};
    c.tracker = "three.net";
    c.mechanism = Mechanism::cookie;
    d = c;
    d.mechanism = Mechanism::fingerprint;
    auto overlap = mechanism_overlap({a, b, c, d});
    CHECK(overlap.cookie_only == std::set<std::string>{"one.net"});
    CHECK(overlap.fp_only == std::set<std::string>{"two.net"});
    CHECK(overlap.both == std::set<std::string>{"three.net"});
    CHECK(overlap.new_participating_sites == std::set<std::string>{"y.com"});
    auto empty = mechanism_overlap(std::vector<PersistentIdentifierFinding>{});
    CHECK(empty.cookie_only.empty());
    CHECK(empty.both.empty());
}

TEST_CASE("empty corpus") {
    CrawlRecordSet c;
    auto analysis = analyze(c, {});
    CHECK(analysis.runs.empty());
    CHECK(collapse_report(analysis, Scope::between).empty());
    CHECK(diffusion_histograms(analysis).empty());
}

namespace {

CrawlRecordSet random_corpus(std::mt19937& rng, int days) {
    std::vector<std::string> contexts{"c1", "c2", "c3", "c4"};
    std::vector<CrawlRun> runs;
    for (int day = 0; day < days; ++day) {
        for (std::size_t o = 0; o < contexts.size(); ++o) {
            std::vector<std::string> order{contexts[o]};
            for (std::size_t i = 0; i < contexts.size(); ++i)
                if (i != o) order.push_back(contexts[i]);
            std::vector<SiteVisit> visits;
            std::int64_t position = 0;
            for (const auto& ctx : order) {
                for (int s = 0; s < 3; ++s) {
                    std::vector<CookieObservation> cookies;
                    for (const char* tracker : {"t1.net", "t2.net", "t3.net"}) {
                        if (rng() % 2) cookies.push_back(cookie(tracker, "uid", std::string(1, 'a' + rng() % 3)));
                    }
                    visits.push_back(visit(ctx + "-" + std::to_string(s) + ".com", ctx, position++, cookies));
                }
            }
            runs.push_back(run(day, order, visits));
        }
    }
    return corpus(contexts, runs);
}

/// Trackers with some value seen in the origin and one other context.
std::set<std::string> oracle_between(const CrawlRun& r, const IdCookieMap& ids) {
    std::set<std::string> out;
    for (const auto& [tracker, name] : ids) {
        std::map<std::string, std::set<ContextLabel>> contexts;
        for (const auto& v : r.visits)
            for (const auto& c : v.cookies)
                if (c.setter_domain == tracker && c.name == name && v.first_party != tracker)
                    contexts[c.value].insert(v.context);
        for (const auto& [value, seen] : contexts)
            if (seen.contains(r.origin_context) && seen.size() >= 2) out.insert(tracker);
    }
    return out;
}

/// Trackers with some value on two first parties of the origin context.
std::set<std::string> oracle_within(const CrawlRun& r, const IdCookieMap& ids) {
    std::set<std::string> out;
    for (const auto& [tracker, name] : ids) {
        std::map<std::string, std::set<std::string>> sites;
        for (const auto& v : r.visits)
            for (const auto& c : v.cookies)
                if (c.setter_domain == tracker && c.name == name && v.context == r.origin_context &&
                    v.first_party != tracker)
                    sites[c.value].insert(v.first_party);
        for (const auto& [value, seen] : sites)
            if (seen.size() >= 2) out.insert(tracker);
    }
    return out;
}

std::set<std::string> trackers_of(const std::vector<PersistentIdentifierFinding>& findings) {
    std::set<std::string> out;
    for (const auto& f : findings) out.insert(f.tracker);
    return out;
}

}  // namespace

TEST_CASE("findings agree with a brute-force oracle on small random corpora") {
    std::mt19937 rng(11);
    Identifiers ids;
    ids.id_cookies = {{"t1.net", "uid"}, {"t2.net", "uid"}, {"t3.net", "uid"}};
    for (int trial = 0; trial < 50; ++trial) {
        auto c = random_corpus(rng, 2);
        auto analysis = analyze(c, ids);
        for (const auto& ra : analysis.runs) {
            CHECK(trackers_of(ra.between) == oracle_between(*ra.run, ids.id_cookies));
            CHECK(trackers_of(ra.within) == oracle_within(*ra.run, ids.id_cookies));
            for (const auto& f : ra.between) {
                CHECK(f.contexts_reached.front() == ra.run->origin_context);
                CHECK(diffusion_distance(f, *ra.run) == *ra.run->position_of(f.contexts_reached.back()));
            }
        }
    }
}

TEST_CASE("reports do not depend on day numbering") {
    std::mt19937 rng(5);
    Identifiers ids;
    ids.id_cookies = {{"t1.net", "uid"}, {"t2.net", "uid"}};
    auto c = random_corpus(rng, 3);
    auto renumbered = c;
    for (auto& r : renumbered.runs) r.day_index = 10 - r.day_index * 3;
    std::sort(renumbered.runs.begin(), renumbered.runs.end(),
              [](const CrawlRun& a, const CrawlRun& b) { return a.day_index < b.day_index; });
    auto a = collapse_report(analyze(c, ids), Scope::between);
    auto b = collapse_report(analyze(renumbered, ids), Scope::between);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].persistent_identifiers == doctest::Approx(b[i].persistent_identifiers));
        CHECK(a[i].pct_persistent == doctest::Approx(b[i].pct_persistent));
        CHECK(a[i].participating_sites_pct == doctest::Approx(b[i].participating_sites_pct));
    }
    auto ha = diffusion_histograms(analyze(c, ids));
    auto hb = diffusion_histograms(analyze(renumbered, ids));
    for (std::size_t i = 0; i < ha.size(); ++i)
        for (std::size_t k = 0; k < ha[i].buckets.size(); ++k)
            CHECK(ha[i].buckets[k] == doctest::Approx(hb[i].buckets[k]));
}
