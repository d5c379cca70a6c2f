#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "recall/random_stream.hpp"

namespace recall {

// Sampling n items without replacement from N, of which R are successes.
struct HypergeomParams {
    std::int64_t population = 0;  // N
    std::int64_t successes = 0;   // R
    std::int64_t sample = 0;      // n

    void validate() const;
    // Inclusive support [max(0, n - (N - R)), min(n, R)].
    std::pair<std::int64_t, std::int64_t> support() const;
};

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

struct BetaBinomialParams {
    std::int64_t trials = 0;  // N
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

// Special functions. All probability kernels below are evaluated in log space.
double log_gamma(double x);
double log_beta(double a, double b);
double log_choose(std::int64_t n, std::int64_t k);

double hypergeom_log_pmf(const HypergeomParams& params, std::int64_t k);
double hypergeom_pmf(const HypergeomParams& params, std::int64_t k);

// g(k) = f(k+1) / f(k). Throws UndefinedSupportError when f(k) = 0.
double hypergeom_successor_ratio(const HypergeomParams& params, std::int64_t k);

double binomial_pmf(std::int64_t n, double pi, std::int64_t k);

double normal_cdf(double x);
// Inverse standard normal CDF; throws DomainError outside (0, 1).
double normal_quantile(double q);
double chi_square_1df_quantile(double q);

double beta_quantile(const BetaParams& params, double q);

double beta_binomial_log_pmf(const BetaBinomialParams& params, std::int64_t s);
double beta_binomial_pmf(const BetaBinomialParams& params, std::int64_t s);

// Samplers. Each consumes draws from the given stream only.
double sample_normal(RandomStream& rng);
double sample_gamma(double shape, RandomStream& rng);
double sample_beta(const BetaParams& params, RandomStream& rng);
std::int64_t sample_binomial(std::int64_t n, double p, RandomStream& rng);
std::int64_t sample_hypergeom(const HypergeomParams& params, RandomStream& rng);
std::int64_t sample_beta_binomial(const BetaBinomialParams& params, RandomStream& rng);

// Inverse-CDF hypergeometric sampler over a precomputed table, for drawing
// many samples from one population. Tails below 1e-20 are dropped.
class HypergeomTable {
public:
    explicit HypergeomTable(const HypergeomParams& params);

    std::int64_t sample(RandomStream& rng) const;
    const HypergeomParams& params() const { return params_; }

private:
    HypergeomParams params_;
    std::int64_t first_ = 0;
    std::vector<double> cdf_;
};

}  // namespace recall
