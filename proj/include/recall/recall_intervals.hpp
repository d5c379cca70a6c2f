#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recall/random_stream.hpp"
#include "recall/recall_core.hpp"

namespace recall {

enum class IntervalMethod {
    NaiveBinomial,
    NormalMle,
    NormalLaplace,
    NormalAgresti,
    Koopman,
    BetaJeffreys,
    BetaBinUniform,
    BetaBinMcp,
    BetaBinHalf,
};

inline constexpr std::array<IntervalMethod, 9> kAllMethods{
    IntervalMethod::NaiveBinomial,  IntervalMethod::NormalMle,     IntervalMethod::NormalLaplace,
    IntervalMethod::NormalAgresti,  IntervalMethod::Koopman,       IntervalMethod::BetaJeffreys,
    IntervalMethod::BetaBinUniform, IntervalMethod::BetaBinMcp,    IntervalMethod::BetaBinHalf,
};

std::string_view to_string(IntervalMethod method);
IntervalMethod parse_interval_method(std::string_view tag);
bool is_monte_carlo(IntervalMethod method);

inline constexpr std::int64_t kDefaultDraws = 40'000;
inline constexpr std::int64_t kMinDraws = 1'000;

struct MonteCarloConfig {
    std::int64_t draws = kDefaultDraws;
    RandomStream rng{0, 0};

    void validate() const;
};

struct RecallInterval {
    double lower = 0.0;
    double upper = 1.0;
    double level = 0.95;
    std::optional<double> point;
    IntervalMethod method = IntervalMethod::BetaBinHalf;
    // Set for Monte Carlo methods only.
    std::optional<std::int64_t> draws;
    std::optional<std::uint64_t> seed;

    double width() const { return upper - lower; }
    bool contains(double recall) const { return lower <= recall && recall <= upper; }
};

// Beta-binomial prior hyperparameters.
struct PriorSpec {
    double alpha = 0.5;
    double beta = 0.5;

    void validate() const;
};

inline constexpr PriorSpec kUniformPrior{1.0, 1.0};
inline constexpr PriorSpec kHalfPrior{0.5, 0.5};

enum class PosteriorFamily { BetaJeffreys, BetaBinomial };

// Wald interval on recall treated as a proportion of the m = r1 + r0 relevant
// documents sampled. Throws NoRelevantSampledError when m = 0.
RecallInterval naive_binomial(const RecallProblem& problem, double level);

// Centre and standard error of the normal approximation after adding
// `adjustment` positives and negatives to every stratum (0 = MLE).
struct NormalApproximation {
    double centre = 0.0;
    double std_error = 0.0;
};
NormalApproximation normal_approximation(const RecallProblem& problem, int adjustment);

RecallInterval normal_interval(const RecallProblem& problem, double level, int adjustment);

// Pearson chi-square statistic for H0: pi_a / pi_b = ratio, evaluated at the
// constrained maximum-likelihood estimates. x of m from sample a, y of n from
// sample b.
double koopman_statistic(std::int64_t x, std::int64_t m, std::int64_t y, std::int64_t n,
                         double ratio);

struct RatioInterval {
    double lower = 0.0;
    double upper = 0.0;  // +infinity when unbounded
};

// Score-test confidence set on pi_a / pi_b.
RatioInterval koopman_ratio_interval(std::int64_t x, std::int64_t m, std::int64_t y,
                                     std::int64_t n, double level);

// Throws StratifiedInputError for stratified problems.
RecallInterval koopman_interval(const RecallProblem& problem, double level);

// One prior per stratum, retrieved strata first, then unretrieved.
RecallInterval monte_carlo_interval(const RecallProblem& problem, double level,
                                    PosteriorFamily family, std::span<const PriorSpec> priors,
                                    const MonteCarloConfig& config);
RecallInterval monte_carlo_interval(const RecallProblem& problem, double level,
                                    PosteriorFamily family, const PriorSpec& prior,
                                    const MonteCarloConfig& config);

// Recall values of every Monte Carlo draw, unsorted. Exposed for tests.
std::vector<double> posterior_recall_draws(const RecallProblem& problem, PosteriorFamily family,
                                           std::span<const PriorSpec> priors,
                                           const MonteCarloConfig& config);

// Nearest-rank quantile positions used for the interval endpoints.
std::size_t lower_rank_index(std::size_t draws, double level);
std::size_t upper_rank_index(std::size_t draws, double level);

// Expected Kullback-Leibler information gain of a beta-binomial prior for a
// size-n sample from a population of N.
double expected_information_gain(double alpha, double beta, std::int64_t N, std::int64_t n);

// Problem size actually optimised: N > 1000 becomes (1000, 1000 - min(N - n, 200)).
std::pair<std::int64_t, std::int64_t> capped_prior_problem(std::int64_t N, std::int64_t n);

struct PriorSolution {
    PriorSpec prior;
    // n = 1: hyperparameters collapse toward 0 and the search boundary is returned.
    bool degenerate = false;
};

inline constexpr double kMcpSearchLow = 0.01;
inline constexpr double kMcpSearchHigh = 2.0;

PriorSolution solve_most_conservative_prior(std::int64_t N, std::int64_t n);
// Memoised per (N, n).
PriorSpec most_conservative_prior(std::int64_t N, std::int64_t n);

RecallInterval compute_interval(IntervalMethod method, const RecallProblem& problem, double level,
                                const MonteCarloConfig& config);

// {method, level, point, lower, upper, draws, seed} on one line.
std::string to_json(const RecallInterval& interval);

}  // namespace recall
