#include "collapse/stats.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collapse {

namespace {

constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10'000;

// Continued fraction for I_x(a, b) without the front factor.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) return h;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete beta needs a > 0 and b > 0");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw InputError("incomplete beta needs x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_distribution_sf(double f, double d1, double d2) {
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    // P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2)
    return regularized_incomplete_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

AnovaResult one_way_anova(const std::map<ContextLabel, std::vector<double>>& groups) {
    if (groups.size() < 2) throw InputError("one-way ANOVA needs at least two groups");
    AnovaResult result;
    std::size_t total_n = 0;
    double total_sum = 0.0;
    for (const auto& [label, values] : groups) {
        if (values.size() < 2)
            throw InputError("group '" + label.str() + "' has fewer than two observations");
        double sum = 0.0;
        for (double v : values) sum += v;
        result.group_means[label] = sum / static_cast<double>(values.size());
        total_sum += sum;
        total_n += values.size();
    }
    const double grand_mean = total_sum / static_cast<double>(total_n);
    for (const auto& [label, values] : groups) {
        const double group_mean = result.group_means[label];
        const double offset = group_mean - grand_mean;
        result.ss_between += static_cast<double>(values.size()) * offset * offset;
        for (double v : values) result.ss_within += (v - group_mean) * (v - group_mean);
    }
    result.df_between = static_cast<int>(groups.size()) - 1;
    result.df_within = static_cast<int>(total_n - groups.size());

    // Sums of squares this small relative to the data are rounding noise.
    double scale = 0.0;
    for (const auto& [label, values] : groups) {
        for (double v : values) scale = std::max(scale, std::fabs(v));
    }
    const double noise = 1e-24 * std::max(1.0, scale * scale) * static_cast<double>(total_n);
    const bool no_within = result.ss_within <= noise;
    const bool no_between = result.ss_between <= noise;
    if (no_within && no_between) {
        result.f_statistic = 0.0;
        result.p_value = 1.0;
    } else if (no_within) {
        result.f_statistic = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
    } else {
        result.f_statistic = result.ms_between() / result.ms_within();
        result.p_value = f_distribution_sf(result.f_statistic, result.df_between, result.df_within);
    }
    return result;
}

}  // namespace collapse
