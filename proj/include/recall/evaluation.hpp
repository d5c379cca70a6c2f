#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "recall/recall_intervals.hpp"
#include "recall/scenarios.hpp"

namespace recall {

struct EvalConfig {
    std::int64_t realizations = 1000;
    std::int64_t samples_per_realization = 1000;
    double level = 0.95;
    std::vector<IntervalMethod> methods{kAllMethods.begin(), kAllMethods.end()};
    std::uint64_t master_seed = 0;
    std::int64_t mc_draws = kDefaultDraws;
    // Thread count; results do not depend on it. 0 = hardware concurrency.
    unsigned workers = 1;

    void validate() const;
};

// Per (method, realization) tallies as fractions of the samples drawn.
// coverage + upper_gap + lower_gap + undefined = 1.
struct CoverageCell {
    double coverage = 0.0;
    double upper_gap = 0.0;  // true recall above the interval
    double lower_gap = 0.0;  // true recall below the interval
    double undefined = 0.0;  // r1 = r0 = 0
    double mean_width = 0.0; // over defined samples; 0 when none
};

struct MethodSummary {
    IntervalMethod method = IntervalMethod::BetaBinHalf;
    double mean_coverage = 0.0;
    double min_coverage = 0.0;
    double q1_coverage = 0.0;
    double median_coverage = 0.0;
    double q3_coverage = 0.0;
    double max_coverage = 0.0;
    double rmse = 0.0;
    double mean_width = 0.0;
    double mean_upper_gap = 0.0;
    double mean_lower_gap = 0.0;
    double undefined_fraction = 0.0;
    double closest_share = 0.0;
};

struct CoverageReport {
    std::string scenario;
    EvalConfig config;
    std::vector<Realization> realizations;
    // cells[m][i]: method config.methods[m], realization i.
    std::vector<std::vector<CoverageCell>> cells;
    std::vector<MethodSummary> summary;

    std::size_t method_index(IntervalMethod method) const;  // MissingMethodError
};

CoverageReport evaluate_coverage(const ScenarioSpec& spec, const EvalConfig& config);

// sqrt(mean over realizations of (coverage - level)^2).
double coverage_rmse(const CoverageReport& report, IntervalMethod method);

// Each realization awards one point, split equally between the methods whose
// coverage is nearest the nominal level. Shares sum to 1.
std::vector<std::pair<IntervalMethod, double>> closest_coverage_shares(const CoverageReport& report);

// Long format: method,realization,coverage,above,below,undefined,width where
// above/below are the fractions with true recall above/below the interval.
void write_coverage_csv(std::ostream& out, const CoverageReport& report);
void write_summary_json(std::ostream& out, const CoverageReport& report);
// method,metric,min,q1,median,q3,max for coverage, upper_gap, lower_gap, width.
void write_quartiles_csv(std::ostream& out, const CoverageReport& report);
std::string format_summary_table(const CoverageReport& report);

// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double q);

struct DesignConfig {
    std::int64_t samples = 200;
    double level = 0.95;
    std::int64_t mc_draws = kDefaultDraws;
    std::uint64_t seed = 0;

    void validate() const;
};

struct WidthPoint {
    std::int64_t retrieved_sample = 0;
    std::int64_t unretrieved_sample = 0;
    double mean_width = 0.0;
    // Normal methods: 2 z se before clipping and forcing. Others: mean_width.
    double mean_raw_width = 0.0;
    double undefined_fraction = 0.0;
};

// Expected width per allocation of a fixed budget, n0 = budget - n1,
// estimated from config.samples simulated samples.
std::vector<WidthPoint> design_width_curve(const RealizationTruth& truth, std::int64_t budget,
                                           const std::vector<std::int64_t>& allocations,
                                           IntervalMethod method, const DesignConfig& config);

// n1 = round(size * i / 21) for i = 1..20, dropping infeasible entries.
std::vector<std::int64_t> allocation_grid(const RealizationTruth& truth, std::int64_t size);

struct SizeWidth {
    std::int64_t size = 0;
    IntervalMethod method = IntervalMethod::BetaBinHalf;
    WidthPoint best;  // allocation with the smallest mean width
};

std::vector<SizeWidth> width_vs_sample_size(const RealizationTruth& truth,
                                            const std::vector<std::int64_t>& sizes,
                                            const std::vector<IntervalMethod>& methods,
                                            const DesignConfig& config);

}  // namespace recall
