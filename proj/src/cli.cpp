#include "recall/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "recall/binomial_intervals.hpp"
#include "recall/errors.hpp"
#include "recall/evaluation.hpp"
#include "recall/problem_io.hpp"
#include "recall/recall_intervals.hpp"
#include "recall/scenarios.hpp"

namespace recall {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

std::vector<std::int64_t> parse_int_list(const std::string& text, std::size_t expected,
                                         const char* what) {
    std::vector<std::int64_t> values;
    std::stringstream in(text);
    for (std::string field; std::getline(in, field, ',');) {
        try {
            std::size_t used = 0;
            values.push_back(std::stoll(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::logic_error&) {
            throw UsageError(std::string("invalid integer in ") + what + ": '" + field + "'");
        }
    }
    if (expected != 0 && values.size() != expected) {
        throw UsageError(std::string(what) + " expects " + std::to_string(expected) +
                         " comma-separated integers");
    }
    return values;
}

std::vector<IntervalMethod> parse_methods(const std::vector<std::string>& tags) {
    std::vector<IntervalMethod> methods;
    for (const auto& tag : tags) {
        if (tag == "all") {
            methods.assign(kAllMethods.begin(), kAllMethods.end());
            continue;
        }
        methods.push_back(parse_interval_method(tag));
    }
    return methods;
}

// Output file when a path was given, else the fallback stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error("cannot write " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    writer(out);
}

RealizationTruth parse_truth(const std::string& text) {
    const auto v = parse_int_list(text, 4, "--truth N1,R1,N0,R0");
    RealizationTruth truth{v[0], v[2], v[1], v[3]};
    truth.validate();
    return truth;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Recall point estimates, confidence intervals and coverage simulation.", "recall_ci"};
    app.require_subcommand(1);

    double level = 0.95;
    std::optional<std::uint64_t> seed;
    std::int64_t draws = kDefaultDraws;
    std::string output;

    const auto add_common = [&](CLI::App* sub, bool randomized) {
        sub->add_option("--level", level, "Confidence level")->check(CLI::Range(0.0, 1.0));
        sub->add_option("-o,--output", output, "Output file (default: standard output)");
        if (randomized) {
            sub->add_option("--seed", seed, "Seed for all random draws (required)");
            sub->add_option("--draws", draws, "Monte Carlo draws per interval")
                ->check(CLI::Range(kMinDraws, std::numeric_limits<std::int64_t>::max()));
        }
    };

    // interval
    auto* interval = app.add_subcommand("interval", "Confidence intervals for one sample");
    std::string input;
    std::string retrieved;
    std::string unretrieved;
    std::vector<std::string> method_tags{"betabin-half"};
    interval->add_option("-i,--input", input, "CSV: segment,stratum,population,sample,relevant");
    interval->add_option("--retrieved", retrieved, "Retrieved segment as N,n,r");
    interval->add_option("--unretrieved", unretrieved, "Unretrieved segment as N,n,r");
    interval->add_option("-m,--method", method_tags, "Interval method(s) or 'all'");
    add_common(interval, true);

    // coverage
    auto* coverage = app.add_subcommand("coverage", "Coverage study over scenario realizations");
    std::string scenario;
    std::int64_t realizations = 200;
    std::int64_t samples = 500;
    unsigned workers = 1;
    std::string prefix;
    std::vector<std::string> coverage_methods{"all"};
    coverage->add_option("-s,--scenario", scenario, "neutral, legal, small or a scenario file")
        ->required();
    coverage->add_option("--realizations", realizations)->check(CLI::PositiveNumber);
    coverage->add_option("--samples", samples, "Samples per realization")->check(CLI::PositiveNumber);
    coverage->add_option("-m,--method", coverage_methods, "Interval method(s) or 'all'");
    coverage->add_option("--workers", workers, "Worker threads; results do not depend on it");
    coverage->add_option("--prefix", prefix,
                         "Write <prefix>.csv, <prefix>.json and <prefix>_quartiles.csv");
    add_common(coverage, true);

    // scenario
    auto* scenario_cmd = app.add_subcommand("scenario", "Draw scenario realizations");
    std::int64_t count = 10;
    scenario_cmd->add_option("-s,--scenario", scenario, "neutral, legal, small or a scenario file")
        ->required();
    scenario_cmd->add_option("-n,--count", count)->check(CLI::PositiveNumber);
    bool literal = false;
    scenario_cmd->add_flag("--literal", literal, "Use the literal min/max bound formulas");
    add_common(scenario_cmd, true);

    // bias
    auto* bias = app.add_subcommand("bias", "Exact sampling distribution and bias of the estimator");
    std::string truth_text;
    std::string design_text;
    bias->add_option("--truth", truth_text, "N1,R1,N0,R0")->required();
    bias->add_option("--design", design_text, "n1,n0")->required();
    add_common(bias, false);

    // design
    auto* design = app.add_subcommand("design", "Expected interval width per sample allocation");
    std::int64_t budget = 0;
    std::string allocations_text;
    std::string sizes_text;
    std::int64_t design_samples = 200;
    std::vector<std::string> design_methods{"betabin-half"};
    design->add_option("--truth", truth_text, "N1,R1,N0,R0")->required();
    design->add_option("--budget", budget, "Total sample size for an allocation curve");
    design->add_option("--allocations", allocations_text,
                       "Comma-separated n1 values (default: 20-point grid)");
    design->add_option("--sizes", sizes_text,
                       "Comma-separated total sizes: best allocation per size and method");
    design->add_option("--samples", design_samples, "Simulated samples per allocation")
        ->check(CLI::PositiveNumber);
    design->add_option("-m,--method", design_methods, "Interval method(s)");
    add_common(design, true);

    // binom
    auto* binom = app.add_subcommand("binom", "Exact coverage curve of a binomial interval");
    std::string binom_method = "wilson";
    std::int64_t n = 20;
    std::size_t points = 99;
    binom->add_option("-m,--method", binom_method,
                      "clopper-pearson, wald, wilson, agresti-coull or jeffreys");
    binom->add_option("-n", n, "Sample size")->check(CLI::PositiveNumber);
    binom->add_option("--points", points, "Grid points i/(points+1)")->check(CLI::PositiveNumber);
    add_common(binom, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    const auto require_seed = [&](const char* command) {
        if (!seed) {
            throw UsageError(std::string(command) + " draws random numbers and requires --seed");
        }
        return *seed;
    };

    try {
        if (interval->parsed()) {
            RecallProblem problem;
            if (!input.empty()) {
                if (!retrieved.empty() || !unretrieved.empty()) {
                    throw UsageError("use either --input or --retrieved/--unretrieved, not both");
                }
                problem = read_problem_csv_file(input);
            } else if (!retrieved.empty() && !unretrieved.empty()) {
                problem = RecallProblem::simple(parse_stratum_triple(retrieved),
                                                parse_stratum_triple(unretrieved));
            } else {
                throw UsageError("interval needs --input or both --retrieved and --unretrieved");
            }
            const auto methods = parse_methods(method_tags);
            if (std::any_of(methods.begin(), methods.end(), is_monte_carlo)) {
                require_seed("interval");
            }
            Sink sink(output, out);
            int status = 0;
            for (const auto method : methods) {
                MonteCarloConfig mc;
                mc.draws = draws;
                mc.rng = RandomStream(seed.value_or(0), static_cast<std::uint64_t>(method));
                try {
                    *sink << to_json(compute_interval(method, problem, level, mc)) << '\n';
                } catch (const Error& e) {
                    err << "error: " << to_string(method) << ": " << e.what() << '\n';
                    status = 1;
                }
            }
            return status;
        }

        if (coverage->parsed()) {
            EvalConfig config;
            config.realizations = realizations;
            config.samples_per_realization = samples;
            config.level = level;
            config.methods = parse_methods(coverage_methods);
            config.master_seed = require_seed("coverage");
            config.mc_draws = draws;
            config.workers = workers;
            const auto spec = resolve_scenario(scenario);
            const auto report = evaluate_coverage(spec, config);
            Sink sink(output, out);
            *sink << "# scenario=" << spec.name << " seed=" << config.master_seed
                  << " draws=" << draws << " realizations=" << realizations
                  << " samples=" << samples << " level=" << level << '\n'
                  << format_summary_table(report);
            if (!prefix.empty()) {
                write_file(prefix + ".csv", [&](std::ostream& o) { write_coverage_csv(o, report); });
                write_file(prefix + ".json", [&](std::ostream& o) { write_summary_json(o, report); });
                write_file(prefix + "_quartiles.csv",
                           [&](std::ostream& o) { write_quartiles_csv(o, report); });
            }
            return 0;
        }

        if (scenario_cmd->parsed()) {
            auto spec = resolve_scenario(scenario);
            spec.literal_bounds = spec.literal_bounds || literal;
            const auto master = require_seed("scenario");
            Sink sink(output, out);
            *sink << "# scenario=" << spec.name << " seed=" << master << '\n'
                  << "realization,population,prevalence,recall,precision,N1,R1,N0,R0,n1,n0,"
                     "true_recall\n"
                  << std::setprecision(10);
            for (std::int64_t i = 0; i < count; ++i) {
                auto rng = RandomStream(master, static_cast<std::uint64_t>(i)).substream({0});
                const auto r = sample_realization(spec, rng);
                *sink << i << ',' << r.draw.population << ',' << r.draw.prevalence << ','
                      << r.draw.recall << ',' << r.draw.precision << ',' << r.truth.retrieved_size
                      << ',' << r.truth.retrieved_yield << ',' << r.truth.unretrieved_size << ','
                      << r.truth.unretrieved_yield << ',' << r.design.retrieved_sample << ','
                      << r.design.unretrieved_sample << ',' << r.truth.recall() << '\n';
            }
            return 0;
        }

        if (bias->parsed()) {
            const auto truth = parse_truth(truth_text);
            const auto d = parse_int_list(design_text, 2, "--design n1,n0");
            const SampleDesign sample_design{d[0], d[1]};
            if (d[0] > kMaxEnumeratedSample || d[1] > kMaxEnumeratedSample) {
                throw DomainError("exact enumeration supports sample sizes up to " +
                                  std::to_string(kMaxEnumeratedSample));
            }
            const auto dist = exact_sampling_distribution(truth, sample_design);
            const auto summary = estimator_bias(truth, sample_design);
            Sink sink(output, out);
            write_distribution_csv(*sink, dist);
            err << std::setprecision(6) << "true " << summary.true_recall << ", mean "
                << summary.mean_estimate << ", bias " << summary.bias << ", undefined mass "
                << summary.undefined_mass << '\n';
            return 0;
        }

        if (design->parsed()) {
            const auto truth = parse_truth(truth_text);
            DesignConfig config;
            config.samples = design_samples;
            config.level = level;
            config.mc_draws = draws;
            const auto methods = parse_methods(design_methods);
            config.seed = require_seed("design");
            Sink sink(output, out);
            *sink << "# seed=" << config.seed << " draws=" << draws << " samples=" << design_samples
                  << " level=" << level << '\n'
                  << std::setprecision(10);
            if (!sizes_text.empty()) {
                const auto sizes = parse_int_list(sizes_text, 0, "--sizes");
                *sink << "size,method,n1,n0,width,raw_width,undefined\n";
                for (const auto& row : width_vs_sample_size(truth, sizes, methods, config)) {
                    *sink << row.size << ',' << to_string(row.method) << ','
                          << row.best.retrieved_sample << ',' << row.best.unretrieved_sample << ','
                          << row.best.mean_width << ',' << row.best.mean_raw_width << ','
                          << row.best.undefined_fraction << '\n';
                }
                return 0;
            }
            if (budget < 2) {
                throw UsageError("design needs --budget >= 2 or --sizes");
            }
            const auto allocations = allocations_text.empty()
                                         ? allocation_grid(truth, budget)
                                         : parse_int_list(allocations_text, 0, "--allocations");
            *sink << "method,n1,n0,width,raw_width,undefined\n";
            for (const auto method : methods) {
                for (const auto& p : design_width_curve(truth, budget, allocations, method, config)) {
                    *sink << to_string(method) << ',' << p.retrieved_sample << ','
                          << p.unretrieved_sample << ',' << p.mean_width << ',' << p.mean_raw_width
                          << ',' << p.undefined_fraction << '\n';
                }
            }
            return 0;
        }

        if (binom->parsed()) {
            const auto method = parse_binomial_method(binom_method);
            const auto grid = uniform_grid(points);
            const auto curve = coverage_curve(method, n, level, grid);
            Sink sink(output, out);
            *sink << "pi,coverage\n" << std::setprecision(10);
            double total = 0.0;
            for (const auto& p : curve) {
                *sink << p.pi << ',' << p.coverage << '\n';
                total += p.coverage;
            }
            err << "mean coverage " << std::setprecision(6) << total / static_cast<double>(curve.size())
                << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace recall
