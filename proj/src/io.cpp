#include "mhd/io.hpp"

#include <cmath>

namespace mhd {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw ValueError("mean_of: empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / double(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / double(xs.size() - 1));
}

namespace {

// Two-sided 95% t quantiles for small degrees of freedom; 1.96 asymptotically.
double t_quantile_975(std::size_t df) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return 12.706;
    if (df <= 30) return table[df - 1];
    if (df <= 40) return 2.021;
    if (df <= 60) return 2.000;
    if (df <= 120) return 1.980;
    return 1.960;
}

}  // namespace

MeanCi mean_ci95(const std::vector<double>& xs) {
    MeanCi ci;
    ci.mean = mean_of(xs);
    if (xs.size() < 2) {
        ci.ci_low = ci.ci_high = ci.mean;
        return ci;
    }
    double half = t_quantile_975(xs.size() - 1) * sample_sd(xs) / std::sqrt(double(xs.size()));
    ci.ci_low = ci.mean - half;
    ci.ci_high = ci.mean + half;
    return ci;
}

}  // namespace mhd
