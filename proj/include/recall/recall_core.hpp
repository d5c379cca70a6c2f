#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace recall {

enum class Segment { Retrieved, Unretrieved };

std::string_view to_string(Segment segment);

// One simple random sample drawn from a stratum.
struct StratumCounts {
    std::int64_t population = 0;  // N_s
    std::int64_t sample = 0;      // n_s
    std::int64_t relevant = 0;    // r_s, relevant documents in the sample
    std::string name;             // optional label used in diagnostics

    void validate() const;
    double prevalence() const { return static_cast<double>(relevant) / static_cast<double>(sample); }
};

struct SegmentData {
    Segment label = Segment::Retrieved;
    std::vector<StratumCounts> strata;

    void validate() const;
    std::int64_t population() const;
    std::int64_t sample() const;
    std::int64_t relevant() const;
};

struct RecallProblem {
    SegmentData retrieved{Segment::Retrieved, {}};
    SegmentData unretrieved{Segment::Unretrieved, {}};

    // Unstratified problem: one stratum per segment.
    static RecallProblem simple(const StratumCounts& retrieved, const StratumCounts& unretrieved);

    void validate() const;
    bool stratified() const { return retrieved.strata.size() > 1 || unretrieved.strata.size() > 1; }
};

struct YieldEstimate {
    double point = 0.0;
    double variance = 0.0;
};

// Sum of N_s r_s / n_s, with MLE variance and finite population correction.
YieldEstimate estimate_segment_yield(const SegmentData& segment);

double estimate_recall(const RecallProblem& problem);

enum class VarianceForm {
    Corrected,    // propagation through 1 / (1 + R0/R1); yields independent
    Uncorrected,  // propagation through R1 / (R1 + R0) ignoring covariance
};

double recall_variance(const RecallProblem& problem, VarianceForm form = VarianceForm::Corrected);

// Both recall formulas from yield estimates, shared with the interval code.
double recall_from_yields(double retrieved, double unretrieved);
double propagated_recall_variance(const YieldEstimate& retrieved, const YieldEstimate& unretrieved,
                                  VarianceForm form);

// The true (integer) state of a two-segment corpus.
struct RealizationTruth {
    std::int64_t retrieved_size = 0;     // N_1
    std::int64_t unretrieved_size = 0;   // N_0
    std::int64_t retrieved_yield = 0;    // R_1
    std::int64_t unretrieved_yield = 0;  // R_0

    void validate() const;
    double recall() const;
};

struct SampleDesign {
    std::int64_t retrieved_sample = 0;    // n_1
    std::int64_t unretrieved_sample = 0;  // n_0

    void validate(const RealizationTruth& truth) const;
};

struct SamplingOutcome {
    double estimate = 0.0;
    double probability = 0.0;
};

struct SamplingDistribution {
    // Sorted by estimate; outcomes with equal estimates are merged.
    std::vector<SamplingOutcome> outcomes;
    double defined_mass = 0.0;
    // Mass of r_1 = r_0 = 0, where the estimate is 0/0.
    double undefined_mass = 0.0;

    double mean() const;      // over defined mass, renormalised
    double variance() const;  // over defined mass, renormalised
};

inline constexpr std::int64_t kMaxEnumeratedSample = 10'000;

SamplingDistribution exact_sampling_distribution(const RealizationTruth& truth,
                                                 const SampleDesign& design);

struct BiasSummary {
    double mean_estimate = 0.0;
    double true_recall = 0.0;
    double bias = 0.0;
    double undefined_mass = 0.0;
};

BiasSummary estimator_bias(const RealizationTruth& truth, const SampleDesign& design);

}  // namespace recall
