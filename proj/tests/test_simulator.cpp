#include "collapse/error.hpp"
#include "collapse/corpus_io.hpp"
#include "collapse/pipeline.hpp"
#include "collapse/simulator.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sstream>

using namespace collapse;

namespace {

std::string corpus_text(const Simulation& sim) {
    std::ostringstream out;
    write_corpus(sim.corpus, out);
    return out.str();
}

SimPlan small_plan(std::vector<std::string> contexts) {
    SimPlan plan;
    for (const auto& c : contexts) plan.contexts.emplace_back(c);
    plan.sites_per_context = 4;
    plan.days = 2;
    plan.seed = 9;
    return plan;
}

PlantedTracker plant(const std::string& tracker, Mechanism mechanism, std::vector<SiteRef> targets) {
    PlantedTracker p;
    p.tracker = tracker;
    p.mechanism = mechanism;
    p.target_sites = std::move(targets);
    return p;
}

SiteRef ref(const std::string& context, std::size_t index) {
    return {simulated_site_name(ContextLabel(context), index), ContextLabel(context)};
}

}  // namespace

TEST_CASE("seeded generator") {
    SeededRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.below(1000) == b.below(1000));
    CHECK(a.token(16, "ab") == b.token(16, "ab"));
    SeededRng c(1);
    for (int i = 0; i < 1000; ++i) CHECK(c.below(7) < 7);
}

TEST_CASE("site names") {
    CHECK(simulated_site_name(ContextLabel("health"), 3) == "health-03.com");
    CHECK(simulated_site_name(ContextLabel("News Media"), 12) == "news-media-12.com");
    CHECK(simulated_site_name(ContextLabel("x"), 150) == "x-150.com");
}

TEST_CASE("no planted trackers, no findings") {
    auto sim = generate(small_plan({"a", "b", "c"}));
    CHECK(sim.truth.findings.empty());
    CHECK(sim.truth.planted_trackers.empty());
    CHECK(sim.corpus.runs.size() == 6);
    CHECK(validate_corpus(sim.corpus).empty());
    auto result = run_pipeline(sim.corpus, {});
    for (const auto& run : result.analysis.runs) {
        CHECK(run.between.empty());
        CHECK(run.within.empty());
    }
}

TEST_CASE("a two-context plant is at distance one") {
    auto plan = small_plan({"a", "b"});
    plan.planted.push_back(plant("ad.net", Mechanism::cookie, {ref("a", 0), ref("b", 1)}));
    auto sim = generate(plan);
    std::size_t between = 0;
    for (const auto& f : sim.truth.findings) {
        if (f.scope != Scope::between) continue;
        ++between;
        CHECK(f.distance == 1);
        CHECK(f.sites == std::set<std::string>{"a-00.com", "b-01.com"});
    }
    CHECK(between == 4);
}

TEST_CASE("distance is the farthest reached context's crawl position") {
    auto plan = small_plan({"c1", "c2", "c3", "c4", "c5", "c6", "c7"});
    std::vector<SiteRef> everywhere;
    for (const auto& c : plan.contexts) everywhere.push_back(ref(c.str(), 2));
    plan.planted.push_back(plant("ad.net", Mechanism::cookie, everywhere));
    plan.planted.push_back(plant("two.net", Mechanism::fingerprint, {ref("c1", 0), ref("c5", 0)}));
    auto sim = generate(plan);
    for (const auto& f : sim.truth.findings) {
        if (f.scope != Scope::between) continue;
        const CrawlRun* run = nullptr;
        for (const auto& r : sim.corpus.runs)
            if (r.day_index == f.day_index && r.origin_context == f.origin_context) run = &r;
        REQUIRE(run);
        CHECK(f.distance == *run->position_of(f.contexts_reached.back()));
        if (f.tracker == "ad.net") CHECK(f.distance == 6);
    }
}

TEST_CASE("default plan is recovered exactly") {
    auto plan = SimPlan::default_plan();
    auto sim = generate(plan);
    CHECK(sim.corpus.runs.size() == 21);
    CHECK(sim.truth.planted_trackers.size() == 12);
    CHECK(sim.truth.expected_trackers.size() == 12);

    auto result = run_pipeline(sim.corpus, {});
    std::set<std::string> found;
    std::size_t count = 0;
    for (const auto& run : result.analysis.runs) {
        for (const auto* list : {&run.between, &run.within}) {
            for (const auto& f : *list) {
                found.insert(f.tracker);
                ++count;
            }
        }
    }
    CHECK(found == sim.truth.expected_trackers);
    CHECK(count == sim.truth.findings.size());

    // Plant "uid" cookies are recognised; decoys are not.
    CHECK(result.ids.id_cookies.at("adnet-01.net") == "uid");
    for (const auto& decoy : sim.truth.decoys) CHECK_FALSE(result.ids.id_cookies.contains(decoy.tracker));
}

TEST_CASE("decoys each fail exactly their criterion") {
    auto plan = SimPlan::default_plan();
    plan.decoys_per_family = 2;
    auto sim = generate(plan);
    auto histories = build_histories(sim.corpus);
    std::size_t checked = 0;
    for (const auto& decoy : sim.truth.decoys) {
        for (const auto& h : histories) {
            if (h.key.setter_domain != decoy.tracker || h.key.cookie_name != decoy.cookie_name) continue;
            auto verdict = classify_cookie(h, {});
            CHECK(verdict.failed_criteria == std::set<Criterion>{decoy.fails});
            ++checked;
        }
    }
    CHECK(checked == 8 * 2);
}

TEST_CASE("fingerprinting plants reach exactly their targets") {
    auto plan = small_plan({"a", "b", "c"});
    plan.planted.push_back(plant("fp.net", Mechanism::fingerprint, {ref("a", 1), ref("c", 3)}));
    auto sim = generate(plan);
    auto ids = build_identifiers(sim.corpus, {});
    CHECK(ids.fingerprinters.at("fp.net") == std::set<std::string>{"a-01.com", "c-03.com"});
}

TEST_CASE("same seed, same bytes") {
    auto plan = random_plan(77, 6, 2, 4);
    CHECK(corpus_text(generate(plan)) == corpus_text(generate(plan)));
    CHECK(generate(plan).truth.to_json() == generate(plan).truth.to_json());
    auto other = plan;
    other.seed += 1;
    CHECK(corpus_text(generate(plan)) != corpus_text(generate(other)));
}

TEST_CASE("plan JSON round trip") {
    auto plan = random_plan(5, 5, 2, 3);
    auto again = SimPlan::from_json(plan.to_json());
    CHECK(again.to_json() == plan.to_json());
    CHECK(corpus_text(generate(again)) == corpus_text(generate(plan)));
}

TEST_CASE("invalid plans") {
    auto base = small_plan({"a", "b"});
    auto with = [&](PlantedTracker p) {
        auto plan = base;
        plan.planted.push_back(std::move(p));
        return plan;
    };
    CHECK_THROWS_AS(generate(with(plant("ad.net", Mechanism::cookie, {{"a-00.com", ContextLabel("zzz")}}))),
                    ConfigError);
    CHECK_THROWS_AS(generate(with(plant("ad.net", Mechanism::cookie, {ref("a", 9)}))), ConfigError);
    CHECK_THROWS_AS(generate(with(plant("a-00.com", Mechanism::cookie, {ref("a", 1)}))), ConfigError);
    CHECK_THROWS_AS(generate(with(plant("bg-01.net", Mechanism::cookie, {ref("a", 1)}))), ConfigError);
    CHECK_THROWS_AS(generate(with(plant("ad.net", Mechanism::cookie, {}))), ConfigError);
    auto no_days = base;
    no_days.days = 0;
    CHECK_THROWS_AS(generate(no_days), ConfigError);
    auto duplicate = base;
    duplicate.contexts.push_back(ContextLabel("a"));
    CHECK_THROWS_AS(generate(duplicate), ConfigError);

    CHECK_THROWS_AS(SimPlan::from_json(nlohmann::json{{"sites", 3}}), ConfigError);
    CHECK_THROWS_AS(SimPlan::from_json(nlohmann::json::array()), ConfigError);
    CHECK_THROWS_AS(SimPlan::load("/nonexistent/plan.json"), IoError);
}

TEST_CASE("history suite shape") {
    auto suite = generate_history_suite(10, 8, 3, 2, 4);
    REQUIRE(suite.size() == 18);
    std::map<Criterion, int> per_criterion;
    for (const auto& item : suite) {
        auto verdict = classify_cookie(item.history, {});
        if (item.fails) {
            ++per_criterion[*item.fails];
            CHECK(verdict.failed_criteria == std::set<Criterion>{*item.fails});
        } else {
            CHECK(verdict.is_id);
        }
        CHECK(item.history.values.size() == 3);
    }
    CHECK(per_criterion.size() == 4);
    for (const auto& [criterion, n] : per_criterion) CHECK(n == 2);
}
