#pragma once

#include <span>
#include <vector>

namespace noneguard::defense {

/// Fraction of values on the non-negative side of the activation breakpoint.
/// Throws InputError on an empty vector.
double linearity_score(std::span<const double> values);

/// Two-cluster split of a value vector.
struct Separation {
    std::vector<double> lower;  // B: values <= break_value
    std::vector<double> upper;  // O: values >  break_value
    double break_value = 0.0;
    double quality = 0.0;       // between / (between + within), in [0, 1]
    bool degenerate = false;    // every value identical; no split exists
};

/// Jenks natural breaks with two classes. Every break between consecutive distinct
/// sorted values is scored by sigma_within / sigma_between, where
///   sigma_within^2  = var(B) + var(O)   (population variances)
///   sigma_between^2 = (mean(B) - mean(O))^2
/// and the lowest score wins; on ties the larger break is kept.
/// All-identical input yields `degenerate == true` with empty clusters.
Separation jenks_break(std::span<const double> values);

/// Mean and population standard deviation.
struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};
Moments moments(std::span<const double> values);

}  // namespace noneguard::defense
