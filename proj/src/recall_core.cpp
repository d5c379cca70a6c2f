#include "recall/recall_core.hpp"

#include <algorithm>
#include <cmath>

#include "recall/distributions.hpp"
#include "recall/errors.hpp"

namespace recall {

namespace {

std::string describe(const StratumCounts& s) {
    if (!s.name.empty()) {
        return "stratum '" + s.name + "'";
    }
    return "stratum (N=" + std::to_string(s.population) + ", n=" + std::to_string(s.sample) +
           ", r=" + std::to_string(s.relevant) + ")";
}

// Probabilities of r over the support, with tails below kTailCut dropped.
struct TrimmedPmf {
    std::int64_t first = 0;
    std::vector<double> probability;
};

constexpr double kTailCut = 1e-22;

TrimmedPmf trimmed_pmf(const HypergeomParams& params) {
    const auto [lo, hi] = params.support();
    TrimmedPmf out;
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t k = lo; k <= hi; ++k) {
        all.push_back(hypergeom_pmf(params, k));
    }
    std::size_t a = 0;
    std::size_t b = all.size();
    while (a + 1 < b && all[a] < kTailCut) {
        ++a;
    }
    while (b > a + 1 && all[b - 1] < kTailCut) {
        --b;
    }
    out.first = lo + static_cast<std::int64_t>(a);
    out.probability.assign(all.begin() + static_cast<std::ptrdiff_t>(a),
                           all.begin() + static_cast<std::ptrdiff_t>(b));
    return out;
}

}  // namespace

std::string_view to_string(Segment segment) {
    return segment == Segment::Retrieved ? "retrieved" : "unretrieved";
}

void StratumCounts::validate() const {
    if (population < 1) {
        throw DomainError(describe(*this) + ": population must be positive");
    }
    if (sample < 0 || sample > population) {
        throw DomainError(describe(*this) + ": sample size must lie in [0, population]");
    }
    if (relevant < 0 || relevant > sample) {
        throw DomainError(describe(*this) + ": relevant count must lie in [0, sample]");
    }
}

void SegmentData::validate() const {
    if (strata.empty()) {
        throw DomainError(std::string(to_string(label)) + " segment has no strata");
    }
    for (const auto& s : strata) {
        s.validate();
    }
}

std::int64_t SegmentData::population() const {
    std::int64_t total = 0;
    for (const auto& s : strata) total += s.population;
    return total;
}

std::int64_t SegmentData::sample() const {
    std::int64_t total = 0;
    for (const auto& s : strata) total += s.sample;
    return total;
}

std::int64_t SegmentData::relevant() const {
    std::int64_t total = 0;
    for (const auto& s : strata) total += s.relevant;
    return total;
}

RecallProblem RecallProblem::simple(const StratumCounts& retrieved, const StratumCounts& unretrieved) {
    RecallProblem problem;
    problem.retrieved.strata = {retrieved};
    problem.unretrieved.strata = {unretrieved};
    return problem;
}

void RecallProblem::validate() const {
    if (retrieved.label != Segment::Retrieved || unretrieved.label != Segment::Unretrieved) {
        throw DomainError("recall problem segments are mislabelled");
    }
    retrieved.validate();
    unretrieved.validate();
}

YieldEstimate estimate_segment_yield(const SegmentData& segment) {
    segment.validate();
    YieldEstimate out;
    for (const auto& s : segment.strata) {
        if (s.sample == 0) {
            throw EmptySampleError(describe(s) + " has no sampled documents");
        }
        const auto N = static_cast<double>(s.population);
        const auto n = static_cast<double>(s.sample);
        const double p = s.prevalence();
        out.point += N * p;
        out.variance += N * N * (p * (1.0 - p) / n) * (1.0 - n / N);
    }
    return out;
}

double recall_from_yields(double retrieved, double unretrieved) {
    const double total = retrieved + unretrieved;
    if (!(total > 0.0)) {
        throw UndefinedEstimateError("recall estimate is undefined: no relevant documents estimated");
    }
    return retrieved / total;
}

double propagated_recall_variance(const YieldEstimate& retrieved, const YieldEstimate& unretrieved,
                                  VarianceForm form) {
    const double r1 = retrieved.point;
    const double r0 = unretrieved.point;
    const double total = r1 + r0;
    if (!(total > 0.0)) {
        throw UndefinedEstimateError("recall variance is undefined: no relevant documents estimated");
    }
    const double total4 = total * total * total * total;
    if (form == VarianceForm::Corrected) {
        return (retrieved.variance * r0 * r0 + unretrieved.variance * r1 * r1) / total4;
    }
    // d/dR1 = 1/R*, d/dR* = -R1/R*^2, Var(R*) = Var(R1) + Var(R0).
    return (retrieved.variance * total * total +
            r1 * r1 * (retrieved.variance + unretrieved.variance)) /
           total4;
}

double estimate_recall(const RecallProblem& problem) {
    problem.validate();
    return recall_from_yields(estimate_segment_yield(problem.retrieved).point,
                              estimate_segment_yield(problem.unretrieved).point);
}

double recall_variance(const RecallProblem& problem, VarianceForm form) {
    problem.validate();
    return propagated_recall_variance(estimate_segment_yield(problem.retrieved),
                                      estimate_segment_yield(problem.unretrieved), form);
}

void RealizationTruth::validate() const {
    if (retrieved_size < 1 || unretrieved_size < 1) {
        throw DomainError("both segments must be nonempty");
    }
    if (retrieved_yield < 0 || retrieved_yield > retrieved_size || unretrieved_yield < 0 ||
        unretrieved_yield > unretrieved_size) {
        throw DomainError("segment yields must lie in [0, segment size]");
    }
    if (retrieved_yield + unretrieved_yield < 1) {
        throw DomainError("corpus must contain at least one relevant document");
    }
}

double RealizationTruth::recall() const {
    return static_cast<double>(retrieved_yield) /
           static_cast<double>(retrieved_yield + unretrieved_yield);
}

void SampleDesign::validate(const RealizationTruth& truth) const {
    if (retrieved_sample < 1 || unretrieved_sample < 1) {
        throw InfeasibleAllocationError("sample sizes must be positive");
    }
    if (retrieved_sample > truth.retrieved_size || unretrieved_sample > truth.unretrieved_size) {
        throw InfeasibleAllocationError("sample size exceeds segment size (n1=" +
                                        std::to_string(retrieved_sample) + ", N1=" +
                                        std::to_string(truth.retrieved_size) + ", n0=" +
                                        std::to_string(unretrieved_sample) + ", N0=" +
                                        std::to_string(truth.unretrieved_size) + ")");
    }
}

double SamplingDistribution::mean() const {
    double total = 0.0;
    for (const auto& o : outcomes) total += o.estimate * o.probability;
    return total / defined_mass;
}

double SamplingDistribution::variance() const {
    const double m = mean();
    double total = 0.0;
    for (const auto& o : outcomes) total += (o.estimate - m) * (o.estimate - m) * o.probability;
    return total / defined_mass;
}

SamplingDistribution exact_sampling_distribution(const RealizationTruth& truth,
                                                 const SampleDesign& design) {
    truth.validate();
    design.validate(truth);
    if (design.retrieved_sample > kMaxEnumeratedSample ||
        design.unretrieved_sample > kMaxEnumeratedSample) {
        throw DomainError("exact enumeration supports sample sizes up to " +
                          std::to_string(kMaxEnumeratedSample));
    }
    const auto retrieved = trimmed_pmf(
        {truth.retrieved_size, truth.retrieved_yield, design.retrieved_sample});
    const auto unretrieved = trimmed_pmf(
        {truth.unretrieved_size, truth.unretrieved_yield, design.unretrieved_sample});

    const double scale1 = static_cast<double>(truth.retrieved_size) /
                          static_cast<double>(design.retrieved_sample);
    const double scale0 = static_cast<double>(truth.unretrieved_size) /
                          static_cast<double>(design.unretrieved_sample);

    SamplingDistribution dist;
    std::vector<SamplingOutcome> raw;
    raw.reserve(retrieved.probability.size() * unretrieved.probability.size());
    for (std::size_t i = 0; i < retrieved.probability.size(); ++i) {
        const auto r1 = retrieved.first + static_cast<std::int64_t>(i);
        for (std::size_t j = 0; j < unretrieved.probability.size(); ++j) {
            const auto r0 = unretrieved.first + static_cast<std::int64_t>(j);
            const double p = retrieved.probability[i] * unretrieved.probability[j];
            if (r1 == 0 && r0 == 0) {
                dist.undefined_mass += p;
                continue;
            }
            const double y1 = scale1 * static_cast<double>(r1);
            const double y0 = scale0 * static_cast<double>(r0);
            raw.push_back({y1 / (y1 + y0), p});
            dist.defined_mass += p;
        }
    }
    std::sort(raw.begin(), raw.end(),
              [](const auto& a, const auto& b) { return a.estimate < b.estimate; });
    for (const auto& o : raw) {
        if (!dist.outcomes.empty() && dist.outcomes.back().estimate == o.estimate) {
            dist.outcomes.back().probability += o.probability;
        } else {
            dist.outcomes.push_back(o);
        }
    }
    return dist;
}

BiasSummary estimator_bias(const RealizationTruth& truth, const SampleDesign& design) {
    const auto dist = exact_sampling_distribution(truth, design);
    BiasSummary out;
    out.true_recall = truth.recall();
    out.undefined_mass = dist.undefined_mass;
    if (dist.defined_mass > 0.0) {
        out.mean_estimate = dist.mean();
        out.bias = out.mean_estimate - out.true_recall;
    } else {
        out.mean_estimate = std::nan("");
        out.bias = std::nan("");
    }
    return out;
}

}  // namespace recall
