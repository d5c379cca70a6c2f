#include "recall/recall_intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include "recall/distributions.hpp"
#include "recall/errors.hpp"

namespace recall {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("confidence level must lie in (0, 1)");
    }
}

double z_for(double level) {
    return normal_quantile(0.5 * (1.0 + level));
}

std::optional<double> point_estimate(const RecallProblem& problem) {
    try {
        return estimate_recall(problem);
    } catch (const UndefinedEstimateError&) {
        return std::nullopt;
    }
}

// Lower bound forced to 0 when nothing relevant was sampled from the
// retrieved segment, upper to 1 when nothing was sampled from the unretrieved.
void apply_forcing(const RecallProblem& problem, RecallInterval& interval) {
    if (problem.retrieved.relevant() == 0) {
        interval.lower = 0.0;
    }
    if (problem.unretrieved.relevant() == 0) {
        interval.upper = 1.0;
    }
}

double pearson_term(double observed, double size, double p) {
    const double diff = observed - size * p;
    if (std::abs(diff) <= 1e-12 * std::max(1.0, size)) {
        return 0.0;
    }
    const double denom = size * p * (1.0 - p);
    if (!(denom > 0.0)) {
        return kInf;
    }
    return diff * diff / denom;
}

// Boundary of {ratio : U(ratio) <= threshold} between an inside and an
// outside point. Both points positive: bisection on the log scale.
template <typename Statistic>
double bisect_boundary(const Statistic& stat, double threshold, double inside, double outside) {
    for (int i = 0; i < 400; ++i) {
        const double mid = (inside > 0.0 && outside > 0.0) ? std::sqrt(inside * outside)
                                                           : 0.5 * (inside + outside);
        if (stat(mid) <= threshold) {
            inside = mid;
        } else {
            outside = mid;
        }
        if (std::abs(outside - inside) <= 1e-10 * std::max(std::abs(inside), std::abs(outside))) {
            break;
        }
    }
    return 0.5 * (inside + outside);
}

constexpr double kRatioFloor = 1e-300;
constexpr double kRatioCeiling = 1e300;

}  // namespace

std::string_view to_string(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::NaiveBinomial: return "naive-binomial";
        case IntervalMethod::NormalMle: return "normal-mle";
        case IntervalMethod::NormalLaplace: return "normal-laplace";
        case IntervalMethod::NormalAgresti: return "normal-agresti";
        case IntervalMethod::Koopman: return "koopman";
        case IntervalMethod::BetaJeffreys: return "beta-jeffreys";
        case IntervalMethod::BetaBinUniform: return "betabin-uniform";
        case IntervalMethod::BetaBinMcp: return "betabin-mcp";
        case IntervalMethod::BetaBinHalf: return "betabin-half";
    }
    return "unknown";
}

IntervalMethod parse_interval_method(std::string_view tag) {
    for (auto m : kAllMethods) {
        if (to_string(m) == tag) {
            return m;
        }
    }
    throw DomainError("unknown interval method: " + std::string(tag));
}

bool is_monte_carlo(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::BetaJeffreys:
        case IntervalMethod::BetaBinUniform:
        case IntervalMethod::BetaBinMcp:
        case IntervalMethod::BetaBinHalf: return true;
        default: return false;
    }
}

void MonteCarloConfig::validate() const {
    if (draws < kMinDraws) {
        throw DomainError("Monte Carlo draws must be at least " + std::to_string(kMinDraws));
    }
}

void PriorSpec::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("prior hyperparameters must be positive");
    }
}

RecallInterval naive_binomial(const RecallProblem& problem, double level) {
    check_level(level);
    problem.validate();
    const std::int64_t m = problem.retrieved.relevant() + problem.unretrieved.relevant();
    if (m == 0) {
        throw NoRelevantSampledError("naive binomial interval needs at least one relevant document "
                                     "in the sample");
    }
    const double point = estimate_recall(problem);
    const double half = z_for(level) * std::sqrt(point * (1.0 - point) / static_cast<double>(m));
    RecallInterval out;
    out.method = IntervalMethod::NaiveBinomial;
    out.level = level;
    out.point = point;
    out.lower = std::clamp(point - half, 0.0, 1.0);
    out.upper = std::clamp(point + half, 0.0, 1.0);
    return out;
}

NormalApproximation normal_approximation(const RecallProblem& problem, int adjustment) {
    problem.validate();
    if (adjustment < 0) {
        throw DomainError("normal adjustment must be nonnegative");
    }
    if (adjustment == 0) {
        const double centre = estimate_recall(problem);
        return {centre, std::sqrt(recall_variance(problem, VarianceForm::Corrected))};
    }
    const auto c = static_cast<double>(adjustment);
    const auto adjusted = [c](const SegmentData& segment) {
        YieldEstimate out;
        for (const auto& s : segment.strata) {
            const auto N = static_cast<double>(s.population);
            const auto n = static_cast<double>(s.sample);
            const double n_adj = n + 2.0 * c;
            const double p_adj = (static_cast<double>(s.relevant) + c) / n_adj;
            out.point += N * p_adj;
            out.variance += N * N * (p_adj * (1.0 - p_adj) / n_adj) * (1.0 - n / N);
        }
        return out;
    };
    const auto retrieved = adjusted(problem.retrieved);
    const auto unretrieved = adjusted(problem.unretrieved);
    return {recall_from_yields(retrieved.point, unretrieved.point),
            std::sqrt(propagated_recall_variance(retrieved, unretrieved, VarianceForm::Corrected))};
}

RecallInterval normal_interval(const RecallProblem& problem, double level, int adjustment) {
    check_level(level);
    problem.validate();
    RecallInterval out;
    switch (adjustment) {
        case 0: out.method = IntervalMethod::NormalMle; break;
        case 1: out.method = IntervalMethod::NormalLaplace; break;
        case 2: out.method = IntervalMethod::NormalAgresti; break;
        default: throw DomainError("normal interval adjustment must be 0, 1 or 2");
    }
    out.level = level;
    out.point = point_estimate(problem);
    if (adjustment == 0 && !out.point) {
        // No relevant documents anywhere: nothing to centre on.
        out.lower = 0.0;
        out.upper = 1.0;
        return out;
    }
    const auto approx = normal_approximation(problem, adjustment);
    const double half = z_for(level) * approx.std_error;
    out.lower = std::clamp(approx.centre - half, 0.0, 1.0);
    out.upper = std::clamp(approx.centre + half, 0.0, 1.0);
    apply_forcing(problem, out);
    return out;
}

double koopman_statistic(std::int64_t x, std::int64_t m, std::int64_t y, std::int64_t n,
                         double ratio) {
    if (!(ratio > 0.0)) {
        throw DomainError("ratio must be positive");
    }
    const auto xd = static_cast<double>(x);
    const auto md = static_cast<double>(m);
    const auto yd = static_cast<double>(y);
    const auto nd = static_cast<double>(n);
    // Constrained MLE of pi_b under pi_a = ratio * pi_b: smaller root of
    // ratio (m + n) p^2 - [ratio (m + y) + n + x] p + (x + y) = 0.
    const double a = ratio * (md + nd);
    const double b = ratio * (md + yd) + nd + xd;
    const double c = xd + yd;
    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    double pb = c == 0.0 ? 0.0 : 2.0 * c / (b + std::sqrt(disc));
    pb = std::clamp(pb, 0.0, 1.0);
    const double pa = std::clamp(ratio * pb, 0.0, 1.0);
    return pearson_term(xd, md, pa) + pearson_term(yd, nd, pb);
}

RatioInterval koopman_ratio_interval(std::int64_t x, std::int64_t m, std::int64_t y,
                                     std::int64_t n, double level) {
    check_level(level);
    if (m < 1 || n < 1 || x < 0 || x > m || y < 0 || y > n) {
        throw DomainError("ratio interval requires 0 <= x <= m, 0 <= y <= n, m, n >= 1");
    }
    const double threshold = chi_square_1df_quantile(level);
    const auto stat = [&](double ratio) { return koopman_statistic(x, m, y, n, ratio); };

    if (x == 0 && y == 0) {
        return {0.0, kInf};
    }
    RatioInterval out;
    if (x > 0 && y > 0) {
        const double mle = (static_cast<double>(x) / static_cast<double>(m)) /
                           (static_cast<double>(y) / static_cast<double>(n));
        double outside = mle;
        do {
            outside *= 0.5;
        } while (outside > kRatioFloor && stat(outside) <= threshold);
        out.lower = outside <= kRatioFloor ? 0.0 : bisect_boundary(stat, threshold, mle, outside);
        outside = mle;
        do {
            outside *= 2.0;
        } while (outside < kRatioCeiling && stat(outside) <= threshold);
        out.upper = outside >= kRatioCeiling ? kInf : bisect_boundary(stat, threshold, mle, outside);
        return out;
    }
    // One zero count: the MLE sits at 0 (x = 0) or infinity (y = 0) and the
    // statistic is monotone on (0, inf). Find an inside/outside pair from 1.
    double probe = 1.0;
    if (x == 0) {
        out.lower = 0.0;
        if (stat(probe) <= threshold) {
            do {
                probe *= 2.0;
            } while (probe < kRatioCeiling && stat(probe) <= threshold);
            out.upper = probe >= kRatioCeiling ? kInf
                                               : bisect_boundary(stat, threshold, 0.5 * probe, probe);
        } else {
            do {
                probe *= 0.5;
            } while (probe > kRatioFloor && stat(probe) > threshold);
            out.upper = bisect_boundary(stat, threshold, probe, 2.0 * probe);
        }
        return out;
    }
    out.upper = kInf;
    if (stat(probe) <= threshold) {
        do {
            probe *= 0.5;
        } while (probe > kRatioFloor && stat(probe) <= threshold);
        out.lower = probe <= kRatioFloor ? 0.0 : bisect_boundary(stat, threshold, 2.0 * probe, probe);
    } else {
        do {
            probe *= 2.0;
        } while (probe < kRatioCeiling && stat(probe) > threshold);
        out.lower = bisect_boundary(stat, threshold, probe, 0.5 * probe);
    }
    return out;
}

RecallInterval koopman_interval(const RecallProblem& problem, double level) {
    check_level(level);
    problem.validate();
    if (problem.stratified()) {
        throw StratifiedInputError("koopman interval does not extend to stratified samples");
    }
    const auto& retrieved = problem.retrieved.strata.front();
    const auto& unretrieved = problem.unretrieved.strata.front();
    if (retrieved.sample < 1 || unretrieved.sample < 1) {
        throw EmptySampleError("koopman interval requires a sample from both segments");
    }
    // Ratio of unretrieved to retrieved prevalence; recall is decreasing in it.
    const auto ratio = koopman_ratio_interval(unretrieved.relevant, unretrieved.sample,
                                              retrieved.relevant, retrieved.sample, level);
    const double size_ratio =
        static_cast<double>(unretrieved.population) / static_cast<double>(retrieved.population);
    RecallInterval out;
    out.method = IntervalMethod::Koopman;
    out.level = level;
    out.point = point_estimate(problem);
    out.lower = std::isinf(ratio.upper) ? 0.0 : 1.0 / (1.0 + size_ratio * ratio.upper);
    out.upper = 1.0 / (1.0 + size_ratio * ratio.lower);
    apply_forcing(problem, out);
    return out;
}

std::size_t lower_rank_index(std::size_t draws, double level) {
    const double tail = 0.5 * (1.0 - level);
    const auto rank = static_cast<std::size_t>(std::ceil(tail * static_cast<double>(draws) - 1e-9));
    return rank == 0 ? 0 : std::min(rank, draws) - 1;
}

std::size_t upper_rank_index(std::size_t draws, double level) {
    const double q = 1.0 - 0.5 * (1.0 - level);
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(draws) - 1e-9));
    return rank == 0 ? 0 : std::min(rank, draws) - 1;
}

std::vector<double> posterior_recall_draws(const RecallProblem& problem, PosteriorFamily family,
                                           std::span<const PriorSpec> priors,
                                           const MonteCarloConfig& config) {
    problem.validate();
    config.validate();
    const std::size_t strata_count =
        problem.retrieved.strata.size() + problem.unretrieved.strata.size();
    if (family == PosteriorFamily::BetaBinomial && priors.size() != strata_count) {
        throw DomainError("one prior per stratum is required");
    }
    for (const auto& prior : priors) {
        prior.validate();
    }

    struct Posterior {
        bool retrieved;
        double seen;             // r_s
        std::int64_t unseen;     // N_s - n_s
        double alpha;            // posterior hyperparameters
        double beta;
    };
    std::vector<Posterior> posteriors;
    posteriors.reserve(strata_count);
    std::size_t index = 0;
    for (const auto* segment : {&problem.retrieved, &problem.unretrieved}) {
        for (const auto& s : segment->strata) {
            const auto r = static_cast<double>(s.relevant);
            const auto misses = static_cast<double>(s.sample - s.relevant);
            Posterior p{segment == &problem.retrieved, r, s.population - s.sample, 0.0, 0.0};
            if (family == PosteriorFamily::BetaJeffreys) {
                p.alpha = 0.5 + r;
                p.beta = 0.5 + misses;
            } else {
                p.alpha = priors[index].alpha + r;
                p.beta = priors[index].beta + misses;
            }
            posteriors.push_back(p);
            ++index;
        }
    }

    RandomStream rng = config.rng;
    std::vector<double> draws(static_cast<std::size_t>(config.draws));
    for (auto& value : draws) {
        double yield1 = 0.0;
        double yield0 = 0.0;
        for (const auto& p : posteriors) {
            double yield = p.seen;
            if (p.unseen > 0) {
                if (family == PosteriorFamily::BetaJeffreys) {
                    yield += sample_beta({p.alpha, p.beta}, rng) * static_cast<double>(p.unseen);
                } else {
                    yield += static_cast<double>(
                        sample_beta_binomial({p.unseen, p.alpha, p.beta}, rng));
                }
            }
            (p.retrieved ? yield1 : yield0) += yield;
        }
        const double total = yield1 + yield0;
        value = total > 0.0 ? yield1 / total : 1.0;
    }
    return draws;
}

RecallInterval monte_carlo_interval(const RecallProblem& problem, double level,
                                    PosteriorFamily family, std::span<const PriorSpec> priors,
                                    const MonteCarloConfig& config) {
    check_level(level);
    auto draws = posterior_recall_draws(problem, family, priors, config);
    const auto lo = lower_rank_index(draws.size(), level);
    const auto hi = upper_rank_index(draws.size(), level);
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(hi), draws.end());
    const double upper = draws[hi];
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(lo),
                     draws.begin() + static_cast<std::ptrdiff_t>(hi));
    const double lower = draws[lo];

    RecallInterval out;
    out.method = family == PosteriorFamily::BetaJeffreys ? IntervalMethod::BetaJeffreys
                                                         : IntervalMethod::BetaBinHalf;
    out.level = level;
    out.point = point_estimate(problem);
    out.lower = std::clamp(lower, 0.0, 1.0);
    out.upper = std::clamp(upper, 0.0, 1.0);
    out.draws = config.draws;
    out.seed = config.rng.seed();
    apply_forcing(problem, out);
    return out;
}

RecallInterval monte_carlo_interval(const RecallProblem& problem, double level,
                                    PosteriorFamily family, const PriorSpec& prior,
                                    const MonteCarloConfig& config) {
    const std::vector<PriorSpec> priors(
        problem.retrieved.strata.size() + problem.unretrieved.strata.size(), prior);
    return monte_carlo_interval(problem, level, family, priors, config);
}

double expected_information_gain(double alpha, double beta, std::int64_t N, std::int64_t n) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("prior hyperparameters must be positive");
    }
    if (n < 0 || n > N) {
        throw DomainError("information gain requires 0 <= n <= N");
    }
    const std::int64_t unseen = N - n;
    const auto size = [](std::int64_t k) { return static_cast<std::size_t>(k + 1); };
    std::vector<double> lg_alpha(size(N));
    std::vector<double> lg_beta(size(N));
    std::vector<double> lc_total(size(N));
    for (std::int64_t k = 0; k <= N; ++k) {
        const auto kd = static_cast<double>(k);
        lg_alpha[static_cast<std::size_t>(k)] = log_gamma(alpha + kd);
        lg_beta[static_cast<std::size_t>(k)] = log_gamma(beta + kd);
        lc_total[static_cast<std::size_t>(k)] = log_choose(N, k);
    }
    std::vector<double> lc_unseen(size(unseen));
    for (std::int64_t k = 0; k <= unseen; ++k) {
        lc_unseen[static_cast<std::size_t>(k)] = log_choose(unseen, k);
    }
    const double lg_ab = log_gamma(alpha + beta);
    const double lg_a = lg_alpha[0];
    const double lg_b = lg_beta[0];
    const double weight_const = lg_ab - lg_a - lg_b - log_gamma(alpha + beta + static_cast<double>(N));
    const double ratio_const = lg_a + lg_b + log_gamma(alpha + beta + static_cast<double>(n)) - lg_ab;

    // Joint probability of (sample count x, yield r) times log posterior/prior.
    double gain = 0.0;
    for (std::int64_t x = 0; x <= n; ++x) {
        const auto xs = static_cast<std::size_t>(x);
        const double lc_sample = log_choose(n, x);
        const double ratio_x = ratio_const - lg_alpha[xs] - lg_beta[static_cast<std::size_t>(n - x)];
        for (std::int64_t k = 0; k <= unseen; ++k) {
            const auto r = static_cast<std::size_t>(x + k);
            const double lc_k = lc_unseen[static_cast<std::size_t>(k)];
            const double log_weight = weight_const + lc_sample + lc_k + lg_alpha[r] +
                                      lg_beta[static_cast<std::size_t>(N) - r];
            const double log_ratio = lc_k + ratio_x - lc_total[r];
            gain += std::exp(log_weight) * log_ratio;
        }
    }
    return gain;
}

std::pair<std::int64_t, std::int64_t> capped_prior_problem(std::int64_t N, std::int64_t n) {
    if (N > 1000) {
        return {1000, 1000 - std::min<std::int64_t>(N - n, 200)};
    }
    return {N, n};
}

PriorSolution solve_most_conservative_prior(std::int64_t N, std::int64_t n) {
    if (n < 1 || n > N) {
        throw DomainError("most conservative prior requires 1 <= n <= N");
    }
    if (n == 1) {
        return {{kMcpSearchLow, kMcpSearchLow}, true};
    }
    const auto [capped_N, capped_n] = capped_prior_problem(N, n);
    // Concave and symmetric in (alpha, beta): search the diagonal.
    const auto negative_gain = [&](double a) {
        return -expected_information_gain(a, a, capped_N, capped_n);
    };
    std::uintmax_t max_iter = 200;
    const auto [best, value] =
        boost::math::tools::brent_find_minima(negative_gain, kMcpSearchLow, kMcpSearchHigh, 30, max_iter);
    (void)value;
    return {{best, best}, false};
}

PriorSpec most_conservative_prior(std::int64_t N, std::int64_t n) {
    static std::mutex mutex;
    static std::map<std::pair<std::int64_t, std::int64_t>, PriorSpec> cache;
    if (n < 1 || n > N) {
        throw DomainError("most conservative prior requires 1 <= n <= N");
    }
    const auto key = capped_prior_problem(N, n);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    const auto prior = solve_most_conservative_prior(key.first, key.second).prior;
    std::lock_guard lock(mutex);
    cache.emplace(key, prior);
    return prior;
}

RecallInterval compute_interval(IntervalMethod method, const RecallProblem& problem, double level,
                                const MonteCarloConfig& config) {
    const auto strata_priors = [&](auto&& choose) {
        std::vector<PriorSpec> priors;
        for (const auto* segment : {&problem.retrieved, &problem.unretrieved}) {
            for (const auto& s : segment->strata) {
                priors.push_back(choose(s));
            }
        }
        return priors;
    };
    RecallInterval out;
    switch (method) {
        case IntervalMethod::NaiveBinomial: return naive_binomial(problem, level);
        case IntervalMethod::NormalMle: return normal_interval(problem, level, 0);
        case IntervalMethod::NormalLaplace: return normal_interval(problem, level, 1);
        case IntervalMethod::NormalAgresti: return normal_interval(problem, level, 2);
        case IntervalMethod::Koopman: return koopman_interval(problem, level);
        case IntervalMethod::BetaJeffreys:
            return monte_carlo_interval(problem, level, PosteriorFamily::BetaJeffreys, kHalfPrior,
                                        config);
        case IntervalMethod::BetaBinUniform:
            out = monte_carlo_interval(problem, level, PosteriorFamily::BetaBinomial, kUniformPrior,
                                       config);
            break;
        case IntervalMethod::BetaBinHalf:
            out = monte_carlo_interval(problem, level, PosteriorFamily::BetaBinomial, kHalfPrior,
                                       config);
            break;
        case IntervalMethod::BetaBinMcp: {
            problem.validate();
            const auto priors = strata_priors([](const StratumCounts& s) {
                return most_conservative_prior(s.population, std::max<std::int64_t>(s.sample, 1));
            });
            out = monte_carlo_interval(problem, level, PosteriorFamily::BetaBinomial, priors, config);
            break;
        }
    }
    out.method = method;
    return out;
}

std::string to_json(const RecallInterval& interval) {
    nlohmann::ordered_json record;
    record["method"] = to_string(interval.method);
    record["level"] = interval.level;
    record["point"] = interval.point ? nlohmann::ordered_json(*interval.point) : nullptr;
    record["lower"] = interval.lower;
    record["upper"] = interval.upper;
    record["draws"] = interval.draws ? nlohmann::ordered_json(*interval.draws) : nullptr;
    record["seed"] = interval.seed ? nlohmann::ordered_json(*interval.seed) : nullptr;
    return record.dump();
}

}  // namespace recall
