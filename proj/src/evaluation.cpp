#include "recall/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "recall/distributions.hpp"
#include "recall/errors.hpp"

namespace recall {

namespace {

// Stream keys below the realization stream.
constexpr std::uint64_t kScenarioKey = 0;
constexpr std::uint64_t kSampleKey = 1;
constexpr std::uint64_t kIntervalKey = 2;

struct Tally {
    std::int64_t covered = 0;
    std::int64_t above = 0;
    std::int64_t below = 0;
    std::int64_t undefined = 0;
    double width_sum = 0.0;
};

struct RealizationOutcome {
    Realization realization;
    std::vector<CoverageCell> cells;  // per method
    std::vector<double> width_sums;
    std::int64_t defined = 0;
};

RecallProblem problem_for(const RealizationTruth& truth, const SampleDesign& design, std::int64_t r1,
                          std::int64_t r0) {
    return RecallProblem::simple({truth.retrieved_size, design.retrieved_sample, r1, "retrieved"},
                                 {truth.unretrieved_size, design.unretrieved_sample, r0, "unretrieved"});
}

// Distinct (r1, r0) outcomes with multiplicities, in sorted order.
std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> draw_outcomes(
    const RealizationTruth& truth, const SampleDesign& design, std::int64_t samples,
    const RandomStream& base) {
    const HypergeomTable retrieved({truth.retrieved_size, truth.retrieved_yield, design.retrieved_sample});
    const HypergeomTable unretrieved(
        {truth.unretrieved_size, truth.unretrieved_yield, design.unretrieved_sample});
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> counts;
    for (std::int64_t s = 0; s < samples; ++s) {
        auto rng = base.substream({kSampleKey, static_cast<std::uint64_t>(s)});
        const auto r1 = retrieved.sample(rng);
        const auto r0 = unretrieved.sample(rng);
        ++counts[{r1, r0}];
    }
    return counts;
}

MonteCarloConfig interval_config(const RandomStream& base, std::int64_t draws, std::int64_t r1,
                                 std::int64_t r0, IntervalMethod method) {
    MonteCarloConfig mc;
    mc.draws = draws;
    mc.rng = base.substream({kIntervalKey, static_cast<std::uint64_t>(r1),
                             static_cast<std::uint64_t>(r0), static_cast<std::uint64_t>(method)});
    return mc;
}

RealizationOutcome evaluate_realization(const ScenarioSpec& spec, const EvalConfig& config,
                                        std::int64_t index) {
    const RandomStream base(config.master_seed, static_cast<std::uint64_t>(index));
    auto scenario_rng = base.substream({kScenarioKey});
    RealizationOutcome out;
    out.realization = sample_realization(spec, scenario_rng);
    const auto& truth = out.realization.truth;
    const auto& design = out.realization.design;
    const double true_recall = truth.recall();

    std::vector<Tally> tallies(config.methods.size());
    const auto outcomes = draw_outcomes(truth, design, config.samples_per_realization, base);
    for (const auto& [counts, multiplicity] : outcomes) {
        const auto [r1, r0] = counts;
        if (r1 == 0 && r0 == 0) {
            for (auto& t : tallies) t.undefined += multiplicity;
            continue;
        }
        out.defined += multiplicity;
        const auto problem = problem_for(truth, design, r1, r0);
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            const auto method = config.methods[m];
            const auto interval = compute_interval(method, problem, config.level,
                                                   interval_config(base, config.mc_draws, r1, r0, method));
            auto& t = tallies[m];
            if (true_recall > interval.upper) {
                t.above += multiplicity;
            } else if (true_recall < interval.lower) {
                t.below += multiplicity;
            } else {
                t.covered += multiplicity;
            }
            t.width_sum += static_cast<double>(multiplicity) * interval.width();
        }
    }
    const auto total = static_cast<double>(config.samples_per_realization);
    for (const auto& t : tallies) {
        CoverageCell cell;
        cell.coverage = static_cast<double>(t.covered) / total;
        cell.upper_gap = static_cast<double>(t.above) / total;
        cell.lower_gap = static_cast<double>(t.below) / total;
        cell.undefined = static_cast<double>(t.undefined) / total;
        cell.mean_width = out.defined > 0 ? t.width_sum / static_cast<double>(out.defined) : 0.0;
        out.cells.push_back(cell);
        out.width_sums.push_back(t.width_sum);
    }
    return out;
}

// Runs job(i) for i in [0, count) on `workers` threads. The first exception
// by index is rethrown.
template <typename Job>
void parallel_for(std::int64_t count, unsigned workers, const Job& job) {
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::int64_t>(workers, std::max<std::int64_t>(count, 1)));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<std::int64_t> next{0};
    const auto run = [&] {
        for (std::int64_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run);
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12;
}

std::string format_double(double x) {
    std::ostringstream out;
    out << std::setprecision(17) << x;
    return out.str();
}

}  // namespace

void EvalConfig::validate() const {
    if (realizations < 1 || samples_per_realization < 1) {
        throw DomainError("realizations and samples per realization must be at least 1");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("confidence level must lie in (0, 1)");
    }
    if (methods.empty()) {
        throw DomainError("at least one method is required");
    }
    if (mc_draws < kMinDraws) {
        throw DomainError("Monte Carlo draws must be at least " + std::to_string(kMinDraws));
    }
}

std::size_t CoverageReport::method_index(IntervalMethod method) const {
    const auto it = std::find(config.methods.begin(), config.methods.end(), method);
    if (it == config.methods.end()) {
        throw MissingMethodError("report has no results for " + std::string(to_string(method)));
    }
    return static_cast<std::size_t>(it - config.methods.begin());
}

double sample_quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw DomainError("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CoverageReport evaluate_coverage(const ScenarioSpec& spec, const EvalConfig& config) {
    config.validate();
    spec.validate();
    std::vector<RealizationOutcome> outcomes(static_cast<std::size_t>(config.realizations));
    parallel_for(config.realizations, config.workers, [&](std::int64_t i) {
        outcomes[static_cast<std::size_t>(i)] = evaluate_realization(spec, config, i);
    });

    CoverageReport report;
    report.scenario = spec.name;
    report.config = config;
    report.cells.assign(config.methods.size(), {});
    std::int64_t defined_total = 0;
    std::vector<double> width_totals(config.methods.size(), 0.0);
    for (auto& o : outcomes) {
        report.realizations.push_back(o.realization);
        defined_total += o.defined;
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            report.cells[m].push_back(o.cells[m]);
            width_totals[m] += o.width_sums[m];
        }
    }

    const auto shares = closest_coverage_shares(report);
    const auto count = static_cast<double>(config.realizations);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        MethodSummary s;
        s.method = config.methods[m];
        std::vector<double> coverage;
        for (const auto& cell : report.cells[m]) {
            coverage.push_back(cell.coverage);
            s.mean_coverage += cell.coverage;
            s.mean_upper_gap += cell.upper_gap;
            s.mean_lower_gap += cell.lower_gap;
            s.undefined_fraction += cell.undefined;
        }
        s.mean_coverage /= count;
        s.mean_upper_gap /= count;
        s.mean_lower_gap /= count;
        s.undefined_fraction /= count;
        s.min_coverage = sample_quantile(coverage, 0.0);
        s.q1_coverage = sample_quantile(coverage, 0.25);
        s.median_coverage = sample_quantile(coverage, 0.5);
        s.q3_coverage = sample_quantile(coverage, 0.75);
        s.max_coverage = sample_quantile(coverage, 1.0);
        s.rmse = coverage_rmse(report, s.method);
        s.mean_width = defined_total > 0 ? width_totals[m] / static_cast<double>(defined_total) : 0.0;
        s.closest_share = shares[m].second;
        report.summary.push_back(s);
    }
    return report;
}

double coverage_rmse(const CoverageReport& report, IntervalMethod method) {
    const auto& cells = report.cells[report.method_index(method)];
    if (cells.empty()) {
        throw DomainError("report has no realizations");
    }
    double total = 0.0;
    for (const auto& cell : cells) {
        const double d = cell.coverage - report.config.level;
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(cells.size()));
}

std::vector<std::pair<IntervalMethod, double>> closest_coverage_shares(const CoverageReport& report) {
    const auto& methods = report.config.methods;
    std::vector<double> points(methods.size(), 0.0);
    const std::size_t n = report.cells.empty() ? 0 : report.cells.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < methods.size(); ++m) {
            best = std::min(best, std::abs(report.cells[m][i].coverage - report.config.level));
        }
        std::vector<std::size_t> winners;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (nearly_equal(std::abs(report.cells[m][i].coverage - report.config.level), best)) {
                winners.push_back(m);
            }
        }
        for (const auto m : winners) {
            points[m] += 1.0 / static_cast<double>(winners.size());
        }
    }
    std::vector<std::pair<IntervalMethod, double>> out;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        out.emplace_back(methods[m], n > 0 ? points[m] / static_cast<double>(n) : 0.0);
    }
    return out;
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
    out << "method,realization,coverage,above,below,undefined,width\n";
    for (std::size_t m = 0; m < report.config.methods.size(); ++m) {
        const auto tag = to_string(report.config.methods[m]);
        for (std::size_t i = 0; i < report.cells[m].size(); ++i) {
            const auto& c = report.cells[m][i];
            out << tag << ',' << i << ',' << format_double(c.coverage) << ','
                << format_double(c.upper_gap) << ',' << format_double(c.lower_gap) << ','
                << format_double(c.undefined) << ',' << format_double(c.mean_width) << '\n';
        }
    }
}

void write_summary_json(std::ostream& out, const CoverageReport& report) {
    nlohmann::ordered_json doc;
    const auto& c = report.config;
    doc["scenario"] = report.scenario;
    doc["seed"] = c.master_seed;
    doc["realizations"] = c.realizations;
    doc["samples_per_realization"] = c.samples_per_realization;
    doc["level"] = c.level;
    doc["draws"] = c.mc_draws;
    auto& methods = doc["methods"];
    methods = nlohmann::ordered_json::array();
    for (const auto& s : report.summary) {
        nlohmann::ordered_json m;
        m["method"] = to_string(s.method);
        m["mean_coverage"] = s.mean_coverage;
        m["median_coverage"] = s.median_coverage;
        m["q1_coverage"] = s.q1_coverage;
        m["q3_coverage"] = s.q3_coverage;
        m["min_coverage"] = s.min_coverage;
        m["max_coverage"] = s.max_coverage;
        m["rmse"] = s.rmse;
        m["mean_width"] = s.mean_width;
        m["mean_upper_gap"] = s.mean_upper_gap;
        m["mean_lower_gap"] = s.mean_lower_gap;
        m["undefined_fraction"] = s.undefined_fraction;
        m["closest_share"] = s.closest_share;
        methods.push_back(m);
    }
    out << doc.dump(2) << '\n';
}

void write_quartiles_csv(std::ostream& out, const CoverageReport& report) {
    out << "method,metric,min,q1,median,q3,max\n";
    for (std::size_t m = 0; m < report.config.methods.size(); ++m) {
        const auto tag = to_string(report.config.methods[m]);
        const auto row = [&](const char* metric, double CoverageCell::*field) {
            std::vector<double> values;
            for (const auto& cell : report.cells[m]) values.push_back(cell.*field);
            out << tag << ',' << metric;
            for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                out << ',' << format_double(sample_quantile(values, q));
            }
            out << '\n';
        };
        row("coverage", &CoverageCell::coverage);
        row("upper_gap", &CoverageCell::upper_gap);
        row("lower_gap", &CoverageCell::lower_gap);
        row("width", &CoverageCell::mean_width);
    }
}

std::string format_summary_table(const CoverageReport& report) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof line, "%-16s %7s %7s %7s %7s %7s %7s %7s\n", "method", "width",
                  "cover", "median", "rmse", "upgap", "lowgap", "closest");
    out << line;
    for (const auto& s : report.summary) {
        std::snprintf(line, sizeof line, "%-16s %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f\n",
                      std::string(to_string(s.method)).c_str(), s.mean_width, s.mean_coverage,
                      s.median_coverage, s.rmse, s.mean_upper_gap, s.mean_lower_gap,
                      s.closest_share);
        out << line;
    }
    return out.str();
}

void DesignConfig::validate() const {
    if (samples < 1) {
        throw DomainError("design needs at least one simulated sample");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("confidence level must lie in (0, 1)");
    }
    if (mc_draws < kMinDraws) {
        throw DomainError("Monte Carlo draws must be at least " + std::to_string(kMinDraws));
    }
}

std::vector<WidthPoint> design_width_curve(const RealizationTruth& truth, std::int64_t budget,
                                           const std::vector<std::int64_t>& allocations,
                                           IntervalMethod method, const DesignConfig& config) {
    truth.validate();
    config.validate();
    std::vector<WidthPoint> out;
    const double z = normal_quantile(0.5 * (1.0 + config.level));
    for (const auto n1 : allocations) {
        const SampleDesign design{n1, budget - n1};
        design.validate(truth);
        // Keyed by the allocation so a curve's points do not depend on list order.
        const RandomStream base(config.seed, static_cast<std::uint64_t>(n1));
        const auto outcomes = draw_outcomes(truth, design, config.samples, base);
        WidthPoint point{design.retrieved_sample, design.unretrieved_sample, 0.0, 0.0, 0.0};
        std::int64_t defined = 0;
        for (const auto& [counts, multiplicity] : outcomes) {
            const auto [r1, r0] = counts;
            if (r1 == 0 && r0 == 0) {
                point.undefined_fraction += static_cast<double>(multiplicity);
                continue;
            }
            defined += multiplicity;
            const auto problem = problem_for(truth, design, r1, r0);
            const auto interval = compute_interval(method, problem, config.level,
                                                   interval_config(base, config.mc_draws, r1, r0, method));
            double raw = interval.width();
            switch (method) {
                case IntervalMethod::NormalMle:
                case IntervalMethod::NormalLaplace:
                case IntervalMethod::NormalAgresti: {
                    const int c = method == IntervalMethod::NormalMle       ? 0
                                  : method == IntervalMethod::NormalLaplace ? 1
                                                                            : 2;
                    raw = 2.0 * z * normal_approximation(problem, c).std_error;
                    break;
                }
                default: break;
            }
            point.mean_width += static_cast<double>(multiplicity) * interval.width();
            point.mean_raw_width += static_cast<double>(multiplicity) * raw;
        }
        if (defined > 0) {
            point.mean_width /= static_cast<double>(defined);
            point.mean_raw_width /= static_cast<double>(defined);
        }
        point.undefined_fraction /= static_cast<double>(config.samples);
        out.push_back(point);
    }
    return out;
}

std::vector<std::int64_t> allocation_grid(const RealizationTruth& truth, std::int64_t size) {
    std::vector<std::int64_t> out;
    for (int i = 1; i <= 20; ++i) {
        const auto n1 = std::llround(static_cast<double>(size) * i / 21.0);
        const auto n0 = size - n1;
        if (n1 < 1 || n0 < 1 || n1 > truth.retrieved_size || n0 > truth.unretrieved_size) {
            continue;
        }
        if (out.empty() || out.back() != n1) {
            out.push_back(n1);
        }
    }
    return out;
}

std::vector<SizeWidth> width_vs_sample_size(const RealizationTruth& truth,
                                            const std::vector<std::int64_t>& sizes,
                                            const std::vector<IntervalMethod>& methods,
                                            const DesignConfig& config) {
    std::vector<SizeWidth> out;
    for (const auto size : sizes) {
        const auto grid = allocation_grid(truth, size);
        if (grid.empty()) {
            throw InfeasibleAllocationError("no feasible allocation of " + std::to_string(size) +
                                            " samples");
        }
        for (const auto method : methods) {
            const auto curve = design_width_curve(truth, size, grid, method, config);
            const auto best = std::min_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) {
                return a.mean_width < b.mean_width;
            });
            out.push_back({size, method, *best});
        }
    }
    return out;
}

}  // namespace recall
