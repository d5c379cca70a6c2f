#include "recall/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "recall/errors.hpp"

namespace recall {

void HypergeomParams::validate() const {
    if (population < 0 || successes < 0 || sample < 0) {
        throw DomainError("hypergeometric parameters must be nonnegative");
    }
    if (successes > population || sample > population) {
        throw DomainError("hypergeometric parameters require R <= N and n <= N (N=" +
                          std::to_string(population) + ", R=" + std::to_string(successes) +
                          ", n=" + std::to_string(sample) + ")");
    }
}

std::pair<std::int64_t, std::int64_t> HypergeomParams::support() const {
    return {std::max<std::int64_t>(0, sample - (population - successes)),
            std::min(sample, successes)};
}

void BetaParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("beta parameters must be positive");
    }
}

void BetaBinomialParams::validate() const {
    if (trials < 0) {
        throw DomainError("beta-binomial trials must be nonnegative");
    }
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("beta-binomial parameters must be positive");
    }
}

double log_gamma(double x) {
    return boost::math::lgamma(x);
}

double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) {
        return -std::numeric_limits<double>::infinity();
    }
    if (k == 0 || k == n) {
        return 0.0;
    }
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return log_gamma(nd + 1.0) - log_gamma(kd + 1.0) - log_gamma(nd - kd + 1.0);
}

double hypergeom_log_pmf(const HypergeomParams& params, std::int64_t k) {
    params.validate();
    const auto [lo, hi] = params.support();
    if (k < lo || k > hi) {
        return -std::numeric_limits<double>::infinity();
    }
    const auto N = params.population;
    const auto R = params.successes;
    const auto n = params.sample;
    return log_choose(R, k) + log_choose(N - R, n - k) - log_choose(N, n);
}

double hypergeom_pmf(const HypergeomParams& params, std::int64_t k) {
    return std::exp(hypergeom_log_pmf(params, k));
}

double hypergeom_successor_ratio(const HypergeomParams& params, std::int64_t k) {
    params.validate();
    const auto [lo, hi] = params.support();
    if (k < lo || k > hi) {
        throw UndefinedSupportError("successor ratio undefined outside the support (k=" +
                                    std::to_string(k) + ")");
    }
    const auto N = static_cast<double>(params.population);
    const auto R = static_cast<double>(params.successes);
    const auto n = static_cast<double>(params.sample);
    const auto kd = static_cast<double>(k);
    if (k == hi) {
        return 0.0;
    }
    return (R - kd) * (n - kd) / ((kd + 1.0) * (N - R - n + kd + 1.0));
}

double binomial_pmf(std::int64_t n, double pi, std::int64_t k) {
    if (!(pi >= 0.0 && pi <= 1.0)) {
        throw DomainError("binomial probability outside [0, 1]");
    }
    if (k < 0 || k > n) {
        return 0.0;
    }
    if (pi == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    if (pi == 1.0) {
        return k == n ? 1.0 : 0.0;
    }
    const auto kd = static_cast<double>(k);
    const auto rest = static_cast<double>(n - k);
    return std::exp(log_choose(n, k) + kd * std::log(pi) + rest * std::log1p(-pi));
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("normal quantile requires 0 < q < 1");
    }
    // Acklam's rational approximation followed by one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x = 0.0;
    if (q < low) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else if (q <= 1.0 - low) {
        const double s = q - 0.5;
        const double r = s * s;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * s /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double t = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    // CDF(x) - q, computed from the tail that avoids cancellation.
    const double e = x < 0.0 ? normal_cdf(x) - q : (1.0 - q) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double chi_square_1df_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("chi-square quantile requires 0 < q < 1");
    }
    const double z = normal_quantile(0.5 * (1.0 + q));
    return z * z;
}

double beta_quantile(const BetaParams& params, double q) {
    params.validate();
    if (!(q >= 0.0 && q <= 1.0)) {
        throw DomainError("beta quantile requires 0 <= q <= 1");
    }
    return boost::math::ibeta_inv(params.alpha, params.beta, q);
}

double beta_binomial_log_pmf(const BetaBinomialParams& params, std::int64_t s) {
    params.validate();
    if (s < 0 || s > params.trials) {
        return -std::numeric_limits<double>::infinity();
    }
    const auto sd = static_cast<double>(s);
    const auto rest = static_cast<double>(params.trials - s);
    return log_choose(params.trials, s) + log_beta(sd + params.alpha, rest + params.beta) -
           log_beta(params.alpha, params.beta);
}

double beta_binomial_pmf(const BetaBinomialParams& params, std::int64_t s) {
    return std::exp(beta_binomial_log_pmf(params, s));
}

double sample_normal(RandomStream& rng) {
    boost::random::normal_distribution<double> normal;
    return normal(rng);
}

namespace {

// Marsaglia-Tsang squeeze, shape >= 1.
double sample_gamma_large(double shape, RandomStream& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = sample_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

// Log of a gamma variate, so that shape < 1 can be boosted without underflow.
double sample_log_gamma(double shape, RandomStream& rng) {
    if (shape >= 1.0) {
        return std::log(sample_gamma_large(shape, rng));
    }
    const double boost_log = std::log(rng.uniform_open()) / shape;
    return std::log(sample_gamma_large(shape + 1.0, rng)) + boost_log;
}

}  // namespace

double sample_gamma(double shape, RandomStream& rng) {
    if (!(shape > 0.0)) {
        throw DomainError("gamma shape must be positive");
    }
    return shape >= 1.0 ? sample_gamma_large(shape, rng) : std::exp(sample_log_gamma(shape, rng));
}

double sample_beta(const BetaParams& params, RandomStream& rng) {
    params.validate();
    if (params.alpha >= 1.0 && params.beta >= 1.0) {
        const double x = sample_gamma_large(params.alpha, rng);
        const double y = sample_gamma_large(params.beta, rng);
        return x / (x + y);
    }
    const double log_x = sample_log_gamma(params.alpha, rng);
    const double log_y = sample_log_gamma(params.beta, rng);
    // x / (x + y) evaluated as a logistic of the log ratio.
    const double diff = log_y - log_x;
    if (diff > 0.0) {
        const double e = std::exp(-diff);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(diff));
}

std::int64_t sample_binomial(std::int64_t n, double p, RandomStream& rng) {
    if (n < 0 || !(p >= 0.0 && p <= 1.0)) {
        throw DomainError("binomial sampler requires n >= 0 and 0 <= p <= 1");
    }
    if (n == 0 || p == 0.0) {
        return 0;
    }
    if (p == 1.0) {
        return n;
    }
    boost::random::binomial_distribution<std::int64_t, double> binomial(n, p);
    return binomial(rng);
}

std::int64_t sample_hypergeom(const HypergeomParams& params, RandomStream& rng) {
    params.validate();
    const auto [lo, hi] = params.support();
    if (lo == hi) {
        return lo;
    }
    // Inverse-CDF walk outward from the mode, alternating sides, using the
    // successor ratio to move between neighbouring probabilities.
    const auto N = static_cast<double>(params.population);
    const auto R = static_cast<double>(params.successes);
    const auto n = static_cast<double>(params.sample);
    auto mode = static_cast<std::int64_t>(std::floor((n + 1.0) * (R + 1.0) / (N + 2.0)));
    mode = std::clamp(mode, lo, hi);

    const auto ratio = [&](std::int64_t k) {
        const auto kd = static_cast<double>(k);
        return (R - kd) * (n - kd) / ((kd + 1.0) * (N - R - n + kd + 1.0));
    };

    const double p_mode = std::exp(hypergeom_log_pmf(params, mode));
    double u = rng.uniform();
    if (u < p_mode) {
        return mode;
    }
    u -= p_mode;

    std::int64_t up = mode;
    std::int64_t down = mode;
    double p_up = p_mode;
    double p_down = p_mode;
    while (up < hi || down > lo) {
        if (up < hi) {
            p_up *= ratio(up);
            ++up;
            if (u < p_up) {
                return up;
            }
            u -= p_up;
        }
        if (down > lo) {
            p_down /= ratio(down - 1);
            --down;
            if (u < p_down) {
                return down;
            }
            u -= p_down;
        }
    }
    // Only reachable through accumulated rounding in the final few ulps.
    return mode;
}

std::int64_t sample_beta_binomial(const BetaBinomialParams& params, RandomStream& rng) {
    params.validate();
    if (params.trials == 0) {
        return 0;
    }
    const double q = sample_beta({params.alpha, params.beta}, rng);
    return sample_binomial(params.trials, q, rng);
}

HypergeomTable::HypergeomTable(const HypergeomParams& params) : params_(params) {
    params.validate();
    const auto [lo, hi] = params.support();
    const auto N = static_cast<double>(params.population);
    const auto R = static_cast<double>(params.successes);
    const auto n = static_cast<double>(params.sample);
    const auto mode = std::clamp(
        static_cast<std::int64_t>(std::floor((n + 1.0) * (R + 1.0) / (N + 2.0))), lo, hi);
    const auto ratio = [&](std::int64_t k) {
        const auto kd = static_cast<double>(k);
        return (R - kd) * (n - kd) / ((kd + 1.0) * (N - R - n + kd + 1.0));
    };
    constexpr double kCut = 1e-20;
    const double p_mode = std::exp(hypergeom_log_pmf(params, mode));
    std::vector<double> below;
    double p = p_mode;
    for (std::int64_t k = mode; k > lo && p > kCut; --k) {
        p /= ratio(k - 1);
        below.push_back(p);
    }
    std::vector<double> pmf(below.rbegin(), below.rend());
    first_ = mode - static_cast<std::int64_t>(below.size());
    pmf.push_back(p_mode);
    p = p_mode;
    for (std::int64_t k = mode; k < hi && p > kCut; ++k) {
        p *= ratio(k);
        pmf.push_back(p);
    }
    cdf_.resize(pmf.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        total += pmf[i];
        cdf_[i] = total;
    }
    for (auto& c : cdf_) {
        c /= total;
    }
    cdf_.back() = 1.0;
}

std::int64_t HypergeomTable::sample(RandomStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return first_ + static_cast<std::int64_t>(it - cdf_.begin());
}

}  // namespace recall
