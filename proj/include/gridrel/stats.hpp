#pragma once

#include <vector>

namespace gridrel {

// Anderson-Darling normality test with mean and variance estimated from the
// sample (the "both parameters unknown" case). The adjusted statistic
// a2_adjusted = a2 * (1 + 0.75/n + 2.25/n^2) is compared against the 5%
// critical value 0.752.
struct AdTestResult {
    double a2 = 0.0;
    double a2_adjusted = 0.0;
    double critical_value = 0.752;
    bool reject_normality = false;
    double mean = 0.0;
    double stddev = 0.0;  // with n-1 in the denominator
};

// Throws std::invalid_argument for fewer than 3 points or zero variance.
AdTestResult anderson_darling_normality(std::vector<double> sample);

// Two-sample Kolmogorov-Smirnov test: D is the largest gap between the two
// empirical distribution functions; the p-value uses the asymptotic
// Kolmogorov distribution at sqrt(n_a*n_b/(n_a+n_b)) * D.
struct KsTestResult {
    double d = 0.0;
    double p_value = 1.0;
};

// Throws std::invalid_argument if either sample is empty.
KsTestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Survival function of the asymptotic Kolmogorov distribution,
// P(K > x) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

double sample_mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);  // n-1 denominator

}  // namespace gridrel
