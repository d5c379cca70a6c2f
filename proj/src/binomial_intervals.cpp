#include "recall/binomial_intervals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recall/distributions.hpp"
#include "recall/errors.hpp"

namespace recall {

namespace {

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("confidence level must lie in (0, 1)");
    }
}

double z_for(double level) {
    return normal_quantile(0.5 * (1.0 + level));
}

ProportionInterval clipped(double lower, double upper, double level) {
    return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0), level};
}

}  // namespace

void BinomialSample::validate() const {
    if (n < 1) {
        throw DomainError("binomial sample size must be positive");
    }
    if (r < 0 || r > n) {
        throw DomainError("binomial positive count must lie in [0, n]");
    }
}

std::string_view to_string(BinomialMethod method) {
    switch (method) {
        case BinomialMethod::ClopperPearson: return "clopper-pearson";
        case BinomialMethod::Wald: return "wald";
        case BinomialMethod::Wilson: return "wilson";
        case BinomialMethod::AgrestiCoull: return "agresti-coull";
        case BinomialMethod::Jeffreys: return "jeffreys";
    }
    return "unknown";
}

BinomialMethod parse_binomial_method(std::string_view name) {
    for (auto m : {BinomialMethod::ClopperPearson, BinomialMethod::Wald, BinomialMethod::Wilson,
                   BinomialMethod::AgrestiCoull, BinomialMethod::Jeffreys}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw DomainError("unknown binomial interval method: " + std::string(name));
}

ProportionInterval clopper_pearson(const BinomialSample& sample, double level) {
    sample.validate();
    check_level(level);
    const double tail = 0.5 * (1.0 - level);
    const auto r = static_cast<double>(sample.r);
    const auto n = static_cast<double>(sample.n);
    // Tail-sum inversion expressed through beta quantiles.
    const double lower = sample.r == 0 ? 0.0 : beta_quantile({r, n - r + 1.0}, tail);
    const double upper = sample.r == sample.n ? 1.0 : beta_quantile({r + 1.0, n - r}, 1.0 - tail);
    return {lower, upper, level};
}

ProportionInterval wald(const BinomialSample& sample, double level) {
    sample.validate();
    check_level(level);
    const double p = sample.proportion();
    const double half = z_for(level) * std::sqrt(p * (1.0 - p) / static_cast<double>(sample.n));
    return clipped(p - half, p + half, level);
}

ProportionInterval wilson(const BinomialSample& sample, double level) {
    sample.validate();
    check_level(level);
    const double p = sample.proportion();
    const auto n = static_cast<double>(sample.n);
    const double z = z_for(level);
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * n);
    const double half = z * std::sqrt((p * (1.0 - p) + z2 / (4.0 * n)) / n);
    const double scale = 1.0 + z2 / n;
    return clipped((centre - half) / scale, (centre + half) / scale, level);
}

ProportionInterval agresti_coull(const BinomialSample& sample, double level) {
    sample.validate();
    check_level(level);
    const double z = z_for(level);
    const double z2 = z * z;
    const double n_adj = static_cast<double>(sample.n) + z2;
    const double p_adj = (static_cast<double>(sample.r) + 0.5 * z2) / n_adj;
    const double half = z * std::sqrt(p_adj * (1.0 - p_adj) / n_adj);
    return clipped(p_adj - half, p_adj + half, level);
}

ProportionInterval jeffreys(const BinomialSample& sample, double level) {
    sample.validate();
    check_level(level);
    const double tail = 0.5 * (1.0 - level);
    const BetaParams posterior{0.5 + static_cast<double>(sample.r),
                               0.5 + static_cast<double>(sample.n - sample.r)};
    const double lower = sample.r == 0 ? 0.0 : beta_quantile(posterior, tail);
    const double upper = sample.r == sample.n ? 1.0 : beta_quantile(posterior, 1.0 - tail);
    return {lower, upper, level};
}

ProportionInterval binomial_interval(BinomialMethod method, const BinomialSample& sample,
                                     double level) {
    switch (method) {
        case BinomialMethod::ClopperPearson: return clopper_pearson(sample, level);
        case BinomialMethod::Wald: return wald(sample, level);
        case BinomialMethod::Wilson: return wilson(sample, level);
        case BinomialMethod::AgrestiCoull: return agresti_coull(sample, level);
        case BinomialMethod::Jeffreys: return jeffreys(sample, level);
    }
    throw DomainError("unknown binomial interval method");
}

std::vector<CoveragePoint> coverage_curve(BinomialMethod method, std::int64_t n, double level,
                                          std::span<const double> grid) {
    std::vector<ProportionInterval> intervals;
    intervals.reserve(static_cast<std::size_t>(n + 1));
    for (std::int64_t k = 0; k <= n; ++k) {
        intervals.push_back(binomial_interval(method, {n, k}, level));
    }
    std::vector<CoveragePoint> curve;
    curve.reserve(grid.size());
    for (double pi : grid) {
        if (!(pi > 0.0 && pi < 1.0)) {
            throw DomainError("coverage grid values must lie in (0, 1)");
        }
        double coverage = 0.0;
        for (std::int64_t k = 0; k <= n; ++k) {
            if (intervals[static_cast<std::size_t>(k)].contains(pi)) {
                coverage += binomial_pmf(n, pi, k);
            }
        }
        curve.push_back({pi, coverage});
    }
    return curve;
}

std::vector<double> uniform_grid(std::size_t points) {
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = static_cast<double>(i + 1) / static_cast<double>(points + 1);
    }
    return grid;
}

double mean_coverage(BinomialMethod method, std::int64_t n, double level, std::size_t points) {
    const auto grid = uniform_grid(points);
    const auto curve = coverage_curve(method, n, level, grid);
    double total = 0.0;
    for (const auto& point : curve) {
        total += point.coverage;
    }
    return total / static_cast<double>(curve.size());
}

}  // namespace recall
