// Acceptance run: one PASS/FAIL line per criterion, with details below it.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "posterior_grid.hpp"
#include "recall/binomial_intervals.hpp"
#include "recall/distributions.hpp"
#include "recall/evaluation.hpp"
#include "recall/recall_core.hpp"
#include "recall/recall_intervals.hpp"
#include "recall/scenarios.hpp"

using namespace recall;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body, double budget_s) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0.0) o.check(elapsed < budget_s, fmt("runtime %.1f s < %.0f s", elapsed, budget_s));
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), elapsed);
    for (const auto& n : o.notes) std::printf("      %s\n", n.c_str());
    std::fflush(stdout);
}

Outcome binomial_coverage() {
    Outcome o;
    struct Ref {
        BinomialMethod method;
        double value;
    };
    for (const auto& [method, value] : {Ref{BinomialMethod::ClopperPearson, 0.977}, Ref{BinomialMethod::Wald, 0.851},
                                        Ref{BinomialMethod::Wilson, 0.953}, Ref{BinomialMethod::Jeffreys, 0.951}}) {
        const double got = mean_coverage(method, 20, 0.95);
        o.check(std::abs(got - value) <= 0.003,
                std::string(to_string(method)) + fmt(" mean coverage %.4f vs %.3f", got, value));
    }
    return o;
}

Outcome estimator_bias_check() {
    Outcome o;
    const auto b = estimator_bias({2000, 100000, 1000, 3000}, {100, 100});
    o.check(std::abs(b.true_recall - 0.25) < 5e-4, fmt("true recall %.4f", b.true_recall));
    o.check(std::abs(b.mean_estimate - 0.31) <= 0.005, fmt("estimator mean %.4f vs 0.310", b.mean_estimate));
    return o;
}

struct StudyRow {
    const char* scenario;
    double width;  // reference betabin-half width
    CoverageReport report;
};

std::vector<StudyRow> study;

Outcome coverage_study() {
    Outcome o;
    EvalConfig config;
    config.realizations = 200;
    config.samples_per_realization = 500;
    config.master_seed = 20240601;
    config.mc_draws = kDefaultDraws;
    config.workers = 0;
    config.methods = {IntervalMethod::NaiveBinomial,         IntervalMethod::NormalMle, IntervalMethod::NormalLaplace,
                      IntervalMethod::NormalAgresti, IntervalMethod::Koopman,   IntervalMethod::BetaBinHalf};
    for (const auto& [name, width] : {std::pair{"neutral", 0.05}, std::pair{"legal", 0.28}, std::pair{"small", 0.14}}) {
        const auto start = std::chrono::steady_clock::now();
        study.push_back({name, width, evaluate_coverage(builtin_scenario(name), config)});
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::istringstream table(format_summary_table(study.back().report));
        std::string line;
        std::printf("  %s (%.0f s)\n", name, s);
        while (std::getline(table, line)) std::printf("    %s\n", line.c_str());
        std::fflush(stdout);
    }
    for (const auto& row : study) {
        const double rmse = coverage_rmse(row.report, IntervalMethod::BetaBinHalf);
        o.check(rmse <= 0.025, std::string(row.scenario) + fmt(" betabin-half RMSE %.4f <= 0.025", rmse));
    }
    const auto& legal = study[1].report;
    const double normal = coverage_rmse(legal, IntervalMethod::NormalMle);
    o.check(normal >= 0.10, fmt("legal normal-mle RMSE %.4f >= 0.10", normal));
    const double naive = legal.summary[legal.method_index(IntervalMethod::NaiveBinomial)].mean_coverage;
    o.check(naive <= 0.80, fmt("legal naive mean coverage %.4f <= 0.80", naive));
    return o;
}

Outcome study_widths() {
    Outcome o;
    o.check(study.size() == 3, "coverage study available");
    for (const auto& row : study) {
        const double w = row.report.summary[row.report.method_index(IntervalMethod::BetaBinHalf)].mean_width;
        o.check(std::abs(w - row.width) <= 0.03,
                std::string(row.scenario) + fmt(" betabin-half mean width %.4f vs %.2f", w, row.width));
    }
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    RandomStream pick(606, 0);
    const auto uniform_int = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(pick() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    int worst_id = -1;
    double worst_ratio = 0.0;
    int misses = 0;
    for (int i = 0; i < 50; ++i) {
        std::int64_t N1, N0, n1, n0, r1, r0;
        do {
            N1 = uniform_int(2, 60);
            N0 = uniform_int(2, 60);
            n1 = uniform_int(1, N1);
            n0 = uniform_int(1, N0);
            r1 = uniform_int(0, n1);
            r0 = uniform_int(0, n0);
        } while (r1 + r0 == 0);
        const auto problem = RecallProblem::simple({N1, n1, r1, ""}, {N0, n0, r0, ""});
        const IntervalMethod methods[] = {IntervalMethod::BetaBinHalf, IntervalMethod::BetaBinUniform,
                                          IntervalMethod::BetaBinMcp};
        const auto method = methods[i % 3];
        PriorSpec p1 = kHalfPrior;
        PriorSpec p0 = kHalfPrior;
        if (method == IntervalMethod::BetaBinUniform) p1 = p0 = kUniformPrior;
        if (method == IntervalMethod::BetaBinMcp) {
            p1 = most_conservative_prior(N1, n1);
            p0 = most_conservative_prior(N0, n0);
        }
        const auto exact =
            oracle::posterior_grid_interval(problem.retrieved.strata[0], problem.unretrieved.strata[0], p1, p0, 0.95);
        MonteCarloConfig mc;
        mc.draws = 1000000;
        mc.rng = RandomStream(7000 + static_cast<std::uint64_t>(i), 0);
        const auto iv = compute_interval(method, problem, 0.95, mc);
        const double tol = 1.0 / static_cast<double>(N1 + N0 + 1);
        const double gap = std::max(std::abs(iv.lower - exact.lower), std::abs(iv.upper - exact.upper));
        if (gap > tol) {
            ++misses;
            o.notes.push_back(fmt("miss: N1=%.0f N0=%.0f ", static_cast<double>(N1), static_cast<double>(N0)) +
                              fmt("mc [%.4f, %.4f] exact [%.4f, %.4f]", iv.lower, iv.upper, exact.lower, exact.upper));
        }
        if (gap / tol > worst_ratio) {
            worst_ratio = gap / tol;
            worst_id = i;
        }
    }
    o.check(misses == 0, fmt("%.0f of 50 problems outside 1/(N+1); worst gap/tol %.3f (problem %.0f)", misses,
                             worst_ratio, worst_id));
    return o;
}

Outcome property_suite() {
    Outcome o;

    // pmf normalization and successor recurrence.
    {
        double worst_norm = 0.0;
        double worst_ratio = 0.0;
        for (std::int64_t N = 1; N <= 80; N += 3) {
            for (std::int64_t R = 0; R <= N; R += 4) {
                for (std::int64_t n = 1; n <= N; n += 5) {
                    const HypergeomParams h{N, R, n};
                    double total = 0.0;
                    for (std::int64_t k = 0; k <= n; ++k) total += hypergeom_pmf(h, k);
                    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
                    const std::int64_t lo = std::max<std::int64_t>(0, n - (N - R));
                    const std::int64_t hi = std::min(n, R);
                    for (std::int64_t k = lo; k < hi; ++k) {
                        const double direct = hypergeom_pmf(h, k + 1) / hypergeom_pmf(h, k);
                        const double rel = std::abs(hypergeom_successor_ratio(h, k) - direct) / direct;
                        worst_ratio = std::max(worst_ratio, rel);
                    }
                }
            }
        }
        double bb = 0.0;
        for (std::int64_t N = 0; N <= 60; N += 6) {
            for (const double a : {0.2, 0.5, 1.0, 3.7}) {
                double total = 0.0;
                for (std::int64_t s = 0; s <= N; ++s) total += beta_binomial_pmf({N, a, 1.3}, s);
                bb = std::max(bb, std::abs(total - 1.0));
            }
        }
        o.check(worst_norm < 1e-10, fmt("hypergeometric pmf sums to 1 (max error %.2e)", worst_norm));
        o.check(bb < 1e-10, fmt("beta-binomial pmf sums to 1 (max error %.2e)", bb));
        o.check(worst_ratio < 1e-9, fmt("successor ratio recurrence (max relative error %.2e)", worst_ratio));
    }

    // Conjugacy, pointwise, for every N <= 50.
    {
        double worst = 0.0;
        for (std::int64_t N = 1; N <= 50; ++N) {
            for (std::int64_t n = 1; n <= N; n += std::max<std::int64_t>(1, N / 7)) {
                for (std::int64_t r = 0; r <= n; r += std::max<std::int64_t>(1, n / 4)) {
                    for (const auto& [a, b] : {std::pair{0.5, 0.5}, std::pair{1.0, 1.0}, std::pair{0.27, 1.9}}) {
                        std::vector<double> post(static_cast<std::size_t>(N + 1));
                        double total = 0.0;
                        for (std::int64_t s = 0; s <= N; ++s) {
                            post[static_cast<std::size_t>(s)] =
                                beta_binomial_pmf({N, a, b}, s) * hypergeom_pmf({N, s, n}, r);
                            total += post[static_cast<std::size_t>(s)];
                        }
                        for (std::int64_t s = 0; s <= N; ++s) {
                            const double shifted =
                                (s < r || s - r > N - n)
                                    ? 0.0
                                    : beta_binomial_pmf({N - n, a + static_cast<double>(r),
                                                         b + static_cast<double>(n - r)},
                                                        s - r);
                            worst = std::max(worst, std::abs(post[static_cast<std::size_t>(s)] / total - shifted));
                        }
                    }
                }
            }
        }
        o.check(worst < 1e-12, fmt("beta-binomial conjugacy for N <= 50 (max error %.2e)", worst));
    }

    // Forcing rules.
    {
        bool ok = true;
        RandomStream pick(31, 0);
        for (int i = 0; i < 40; ++i) {
            const auto N1 = 50 + static_cast<std::int64_t>(pick() % 5000);
            const auto N0 = 50 + static_cast<std::int64_t>(pick() % 500000);
            const auto n1 = 10 + static_cast<std::int64_t>(pick() % 40);
            const auto n0 = 10 + static_cast<std::int64_t>(pick() % 400);
            const auto r = 1 + static_cast<std::int64_t>(pick() % 10);
            const auto no_r0 = RecallProblem::simple({N1, n1, r, ""}, {N0, n0, 0, ""});
            const auto no_r1 = RecallProblem::simple({N1, n1, 0, ""}, {N0, n0, r, ""});
            for (const auto m : {IntervalMethod::Koopman, IntervalMethod::BetaJeffreys, IntervalMethod::BetaBinUniform,
                                 IntervalMethod::BetaBinHalf, IntervalMethod::BetaBinMcp}) {
                MonteCarloConfig mc;
                mc.draws = 2000;
                mc.rng = RandomStream(static_cast<std::uint64_t>(i), 1);
                ok = ok && compute_interval(m, no_r0, 0.95, mc).upper == 1.0;
                ok = ok && compute_interval(m, no_r1, 0.95, mc).lower == 0.0;
            }
        }
        o.check(ok, "r0 = 0 forces upper = 1 and r1 = 0 forces lower = 0 (koopman, jeffreys, betabin)");
    }

    // Census.
    {
        bool ok = true;
        for (const auto& [N1, R1, N0, R0] : {std::array<std::int64_t, 4>{40, 13, 60, 7}, {500, 250, 900, 1},
                                             {10, 0, 20, 4}, {33, 33, 10, 0}}) {
            const auto census = RecallProblem::simple({N1, N1, R1, ""}, {N0, N0, R0, ""});
            const double truth = static_cast<double>(R1) / static_cast<double>(R1 + R0);
            for (const auto m : {IntervalMethod::BetaBinUniform, IntervalMethod::BetaBinHalf,
                                 IntervalMethod::BetaBinMcp, IntervalMethod::NormalMle}) {
                MonteCarloConfig mc;
                mc.draws = 2000;
                mc.rng = RandomStream(1, 2);
                const auto iv = compute_interval(m, census, 0.95, mc);
                // Forcing takes precedence when a segment has no relevant documents.
                const double lo = R1 == 0 ? 0.0 : truth;
                const double hi = R0 == 0 ? 1.0 : truth;
                ok = ok && std::abs(iv.lower - lo) < 1e-12 && std::abs(iv.upper - hi) < 1e-12;
            }
        }
        o.check(ok, "census gives a degenerate interval at the true recall");
    }

    // Variance forms.
    {
        bool ok = true;
        RandomStream pick(41, 0);
        for (int i = 0; i < 5000; ++i) {
            const auto N1 = 2 + static_cast<std::int64_t>(pick() % 100000);
            const auto N0 = 2 + static_cast<std::int64_t>(pick() % 1000000);
            const auto n1 = 1 + static_cast<std::int64_t>(pick() % static_cast<std::uint64_t>(N1));
            const auto n0 = 1 + static_cast<std::int64_t>(pick() % static_cast<std::uint64_t>(N0));
            const auto r1 = static_cast<std::int64_t>(pick() % static_cast<std::uint64_t>(n1 + 1));
            const auto r0 = static_cast<std::int64_t>(pick() % static_cast<std::uint64_t>(n0 + 1));
            if (r1 + r0 == 0) continue;
            const auto p = RecallProblem::simple({N1, n1, r1, ""}, {N0, n0, r0, ""});
            ok = ok && recall_variance(p, VarianceForm::Corrected) <=
                           recall_variance(p, VarianceForm::Uncorrected) * (1 + 1e-12);
        }
        o.check(ok, "corrected variance <= uncorrected on 5000 random problems");
    }

    // Most conservative prior.
    {
        bool in_range = true;
        std::string outside;
        for (const std::int64_t N : {20, 100, 1000, 100000}) {
            for (const std::int64_t n : {4, 10, 50, 200, 1000}) {
                if (n > N) continue;
                const double a = most_conservative_prior(N, n).alpha;
                if (a < 0.1 || a > 1.0 + 1e-6) {
                    in_range = false;
                    outside += fmt(" (%.0f,%.0f)->%.3f", static_cast<double>(N), static_cast<double>(n), a);
                }
            }
        }
        o.check(in_range, "MCP in [0.1, 1] for sample sizes n >= 4" + outside);
        std::string small_n;
        for (const std::int64_t n : {2, 3}) {
            small_n += fmt(" n=%.0f: %.4f", static_cast<double>(n), most_conservative_prior(100, n).alpha);
        }
        o.notes.push_back("info MCP below the range for tiny samples (N = 100):" + small_n);

        bool symmetric = true;
        bool unimodal = true;
        for (const auto& [N, n] : {std::pair<std::int64_t, std::int64_t>{30, 10}, {100, 20}, {1000, 100}, {500, 250}}) {
            for (const auto& [a, b] : {std::pair{0.3, 0.7}, std::pair{0.1, 1.5}, std::pair{0.9, 0.2}}) {
                const double x = expected_information_gain(a, b, N, n);
                const double y = expected_information_gain(b, a, N, n);
                symmetric = symmetric && std::abs(x - y) <= 1e-10 * std::max(1.0, std::abs(x));
            }
            int turns = 0;
            double prev = expected_information_gain(0.01, 0.01, N, n);
            int direction = 1;
            for (int k = 2; k <= 200; ++k) {
                const double alpha = 0.01 * k;
                const double v = expected_information_gain(alpha, alpha, N, n);
                const int d = v >= prev ? 1 : -1;
                if (d != direction) {
                    ++turns;
                    direction = d;
                }
                prev = v;
            }
            unimodal = unimodal && turns <= 1;
        }
        o.check(symmetric, "objective symmetric in (alpha, beta)");
        o.check(unimodal, "objective unimodal along alpha = beta on [0.01, 2]");
    }

    // Scenario ranges and means.
    {
        struct Means {
            const char* name;
            double N, pi, rec, prec, n1, n0;
        };
        const Means refs[] = {{"neutral", 2000500, 0.41, 0.55, 0.64, 1935, 1995},
                              {"legal", 1075000, 0.031, 0.33, 0.48, 820, 3170},
                              {"small", 5500, 0.12, 0.55, 0.51, 290, 815}};
        for (const auto& ref : refs) {
            const auto spec = builtin_scenario(ref.name);
            RandomStream rng(11, 0);
            const int count = 100000;
            double sums[6] = {};
            bool ranges = true;
            for (int i = 0; i < count; ++i) {
                const auto r = sample_realization(spec, rng);
                const auto& d = r.draw;
                const double values[6] = {d.population, d.prevalence, d.recall, d.precision,
                                          static_cast<double>(r.design.retrieved_sample),
                                          static_cast<double>(r.design.unretrieved_sample)};
                for (int k = 0; k < 6; ++k) sums[k] += values[k];
                ranges = ranges && d.recall <= 1.0 && d.precision <= 1.0 && d.prevalence > 0.0 &&
                         r.design.retrieved_sample <= r.truth.retrieved_size &&
                         r.design.unretrieved_sample <= r.truth.unretrieved_size;
                if (std::string(ref.name) == "legal") {
                    ranges = ranges && d.population >= 5e5 && d.population <= 5e7 * (1 + 1e-12) &&
                             d.precision >= 0.025 && d.precision <= 0.92 && r.design.retrieved_sample >= 20 &&
                             r.design.unretrieved_sample >= 100;
                } else {
                    const double top = std::string(ref.name) == "neutral" ? 4e6 : 1e4;
                    const double pi_top = std::string(ref.name) == "neutral" ? 0.8 : 0.22;
                    ranges = ranges && d.population >= 1e3 && d.population <= top && d.prevalence >= 0.02 &&
                             d.prevalence <= pi_top && d.recall >= 0.1;
                }
            }
            o.check(ranges, std::string(ref.name) + " draws inside the scenario ranges");
            const char* labels[6] = {"N*", "pi*", "Rec", "Prec", "n1", "n0"};
            const double expected[6] = {ref.N, ref.pi, ref.rec, ref.prec, ref.n1, ref.n0};
            for (int k = 0; k < 6; ++k) {
                const double mean = sums[k] / count;
                const double rel = std::abs(mean - expected[k]) / expected[k];
                o.check(rel <= 0.02, std::string(ref.name) + " mean " + labels[k] +
                                         fmt(" %.5g vs %.5g (%.1f%%)", mean, expected[k], 100 * rel));
            }
        }
    }
    return o;
}

Outcome determinism() {
    Outcome o;
    EvalConfig config;
    config.realizations = 12;
    config.samples_per_realization = 60;
    config.master_seed = 77;
    config.mc_draws = 4000;
    config.methods = {IntervalMethod::NaiveBinomial, IntervalMethod::NormalAgresti, IntervalMethod::Koopman,
                      IntervalMethod::BetaJeffreys, IntervalMethod::BetaBinMcp, IntervalMethod::BetaBinHalf};
    for (const char* name : {"neutral", "legal", "small"}) {
        std::string reference;
        for (const unsigned workers : {1u, 2u, 5u}) {
            config.workers = workers;
            const auto report = evaluate_coverage(builtin_scenario(name), config);
            std::ostringstream bytes;
            write_coverage_csv(bytes, report);
            write_summary_json(bytes, report);
            write_quartiles_csv(bytes, report);
            if (workers == 1) {
                reference = bytes.str();
            } else {
                o.check(bytes.str() == reference,
                        std::string(name) + fmt(" report with %.0f workers identical to 1 worker", workers));
            }
        }
    }
    return o;
}

}  // namespace

int main() {
    criterion(1, "binomial interval mean coverages, n = 20", binomial_coverage, 5.0);
    criterion(2, "estimator bias by exact enumeration", estimator_bias_check, 10.0);
    criterion(5, "Monte Carlo quantiles match posterior enumeration", oracle_equivalence, 0.0);
    criterion(6, "property suite", property_suite, 0.0);
    criterion(7, "determinism across worker counts", determinism, 0.0);
    criterion(3, "reduced coverage study, 200 x 500", coverage_study, 1800.0);
    criterion(4, "betabin-half mean widths at reduced scale", study_widths, 0.0);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
