#include "collapse/error.hpp"
#include "collapse/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace collapse;

namespace {

ContextLabel g(int i) { return ContextLabel("g" + std::to_string(i)); }

}  // namespace

// Reference values from scipy.special.betainc and scipy.stats.f.sf.
TEST_CASE("regularized incomplete beta reference values") {
    CHECK(regularized_incomplete_beta(0.3, 2.5, 4.0) == doctest::Approx(0.3521975859067672).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.9, 0.5, 0.5) == doctest::Approx(0.7951672353008665).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.01, 10, 3) == doctest::Approx(6.480550000000001e-19).epsilon(1e-10));
    CHECK(regularized_incomplete_beta(0.5, 100, 120) == doctest::Approx(0.9117960627949819).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(0.0, 2, 3) == 0.0);
    CHECK(regularized_incomplete_beta(1.0, 2, 3) == 1.0);
}

TEST_CASE("incomplete beta argument checks") {
    CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 0.0, 1.0), InputError);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.5, 1.0, 1.0), InputError);
}

TEST_CASE("F upper tail reference values") {
    CHECK(f_distribution_sf(1.5, 1, 4) == doctest::Approx(0.2878641347266907).epsilon(1e-12));
    CHECK(f_distribution_sf(2.5, 6, 189) == doctest::Approx(0.023735429999378794).epsilon(1e-12));
    CHECK(f_distribution_sf(0.7, 3, 20) == doctest::Approx(0.5630374080471039).epsilon(1e-12));
    CHECK(f_distribution_sf(0.0, 3, 20) == 1.0);
}

TEST_CASE("p is monotone decreasing in F") {
    double previous = 1.0;
    for (double f = 0.0; f < 30.0; f += 0.25) {
        double p = f_distribution_sf(f, 4, 17);
        CHECK(p <= previous);
        previous = p;
    }
}

TEST_CASE("identical groups give F = 0 and p = 1") {
    auto r = one_way_anova({{g(0), {5, 5, 5}}, {g(1), {5, 5, 5}}});
    CHECK(r.f_statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("two-group fixture") {
    auto r = one_way_anova({{g(0), {1, 2, 3}}, {g(1), {2, 3, 4}}});
    CHECK(r.ss_between == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.ss_within == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.df_between == 1);
    CHECK(r.df_within == 4);
    CHECK(std::fabs(r.f_statistic - 1.5) < 1e-9);
    CHECK(r.p_value == doctest::Approx(0.2878641347266907).epsilon(1e-12));
    CHECK(r.group_means.at(g(0)) == 2.0);
    CHECK(r.group_means.at(g(1)) == 3.0);
}

TEST_CASE("three-group reference from scipy.stats.f_oneway") {
    auto r = one_way_anova({{g(0), {3, 5, 4, 6}}, {g(1), {8, 9, 7, 10, 9}}, {g(2), {1, 2, 2}}});
    CHECK(r.f_statistic == doctest::Approx(39.80981595092022).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(3.3900535189280084e-05).epsilon(1e-9));
}

TEST_CASE("seven groups of 28 observations") {
    std::map<ContextLabel, std::vector<double>> groups;
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 28; ++j) groups[g(i)].push_back(i + 0.1 * ((j * 7 + i) % 11));
    }
    auto r = one_way_anova(groups);
    CHECK(r.df_between == 6);
    CHECK(r.df_within == 189);
}

TEST_CASE("zero within-group variance with separated means") {
    auto r = one_way_anova({{g(0), {1, 1}}, {g(1), {2, 2}}});
    CHECK(std::isinf(r.f_statistic));
    CHECK(r.p_value == 0.0);
}

TEST_CASE("input checks") {
    CHECK_THROWS_AS(one_way_anova({{g(0), {1, 2, 3}}}), InputError);
    CHECK_THROWS_AS(one_way_anova({{g(0), {1, 2, 3}}, {g(1), {4}}}), InputError);
}
