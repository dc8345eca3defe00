#pragma once

#include "collapse/model.hpp"

#include <map>
#include <vector>

namespace collapse {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
/// Continued fraction (modified Lentz) evaluated on whichever of
/// I_x(a, b) and 1 - I_{1-x}(b, a) converges faster.
double regularized_incomplete_beta(double x, double a, double b);

/// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
double f_distribution_sf(double f, double d1, double d2);

struct AnovaResult {
    double f_statistic = 0.0;
    int df_between = 0;
    int df_within = 0;
    double p_value = 1.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
    std::map<ContextLabel, double> group_means;

    double ms_between() const { return df_between > 0 ? ss_between / df_between : 0.0; }
    double ms_within() const { return df_within > 0 ? ss_within / df_within : 0.0; }
};

/// Single-factor (one-way) ANOVA. Requires at least two groups with at least
/// two observations each (InputError otherwise). With no variance at all F
/// is 0 and p is 1; with zero within-group variance only, F is +inf and p 0.
AnovaResult one_way_anova(const std::map<ContextLabel, std::vector<double>>& groups);

}  // namespace collapse
