#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace recall {

struct BinomialSample {
    std::int64_t n = 0;  // sample size
    std::int64_t r = 0;  // positives

    void validate() const;
    double proportion() const { return static_cast<double>(r) / static_cast<double>(n); }
};

struct ProportionInterval {
    double lower = 0.0;
    double upper = 1.0;
    double level = 0.95;

    bool contains(double pi) const { return lower <= pi && pi <= upper; }
};

enum class BinomialMethod { ClopperPearson, Wald, Wilson, AgrestiCoull, Jeffreys };

std::string_view to_string(BinomialMethod method);
BinomialMethod parse_binomial_method(std::string_view name);

ProportionInterval clopper_pearson(const BinomialSample& sample, double level);
ProportionInterval wald(const BinomialSample& sample, double level);
ProportionInterval wilson(const BinomialSample& sample, double level);
ProportionInterval agresti_coull(const BinomialSample& sample, double level);
ProportionInterval jeffreys(const BinomialSample& sample, double level);

ProportionInterval binomial_interval(BinomialMethod method, const BinomialSample& sample,
                                     double level);

struct CoveragePoint {
    double pi = 0.0;
    double coverage = 0.0;
};

// Exact coverage: sum over k of Pr(k | n, pi) for the k whose interval
// contains pi.
std::vector<CoveragePoint> coverage_curve(BinomialMethod method, std::int64_t n, double level,
                                          std::span<const double> grid);

// points equally spaced values i / (points + 1), i = 1..points.
std::vector<double> uniform_grid(std::size_t points);

// Mean of coverage_curve over uniform_grid(points).
double mean_coverage(BinomialMethod method, std::int64_t n, double level,
                     std::size_t points = 99);

}  // namespace recall
