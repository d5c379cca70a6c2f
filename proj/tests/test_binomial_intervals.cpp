#include <doctest.h>

#include <cmath>

#include "recall/binomial_intervals.hpp"
#include "recall/errors.hpp"

using namespace recall;

TEST_CASE("clopper-pearson") {
    const auto zero = clopper_pearson({20, 0}, 0.95);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 20)).epsilon(1e-10));
    CHECK(zero.upper == doctest::Approx(0.1684).epsilon(1e-3));
    const auto full = clopper_pearson({20, 20}, 0.95);
    CHECK(full.lower == doctest::Approx(std::pow(0.025, 1.0 / 20)).epsilon(1e-10));
    CHECK(full.upper == 1.0);
    // scipy.stats.beta.ppf(0.025, 5, 16), beta.ppf(0.975, 6, 15)
    const auto mid = clopper_pearson({20, 5}, 0.95);
    CHECK(mid.lower == doctest::Approx(0.08657146910143461).epsilon(1e-9));
    CHECK(mid.upper == doctest::Approx(0.49104587170795744).epsilon(1e-9));
}

TEST_CASE("wald") {
    const auto zero = wald({20, 0}, 0.95);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == 0.0);
    const auto half = wald({20, 10}, 0.95);
    CHECK(half.lower == doctest::Approx(0.280869).epsilon(1e-5));
    CHECK(half.upper == doctest::Approx(0.719131).epsilon(1e-5));
    const auto edge = wald({5, 1}, 0.95);
    CHECK(edge.lower == 0.0);  // clipped
}

TEST_CASE("wilson") {
    const auto zero = wilson({20, 0}, 0.95);
    CHECK(zero.lower == doctest::Approx(0.0));
    CHECK(zero.upper == doctest::Approx(0.161125).epsilon(1e-5));
    const auto half = wilson({20, 10}, 0.95);
    CHECK(half.lower + half.upper == doctest::Approx(1.0));
    const auto mid = wilson({20, 5}, 0.95);
    CHECK(mid.lower == doctest::Approx(0.11186170140766569).epsilon(1e-9));
    CHECK(mid.upper == doctest::Approx(0.468700877618744).epsilon(1e-9));
}

TEST_CASE("agresti-coull") {
    const auto half = agresti_coull({20, 10}, 0.95);
    CHECK(0.5 * (half.lower + half.upper) == doctest::Approx(0.5));
    const auto zero = agresti_coull({20, 0}, 0.95);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == doctest::Approx(0.18981).epsilon(1e-4));
}

TEST_CASE("jeffreys") {
    CHECK(jeffreys({20, 0}, 0.95).lower == 0.0);
    CHECK(jeffreys({20, 20}, 0.95).upper == 1.0);
    // scipy.stats.beta.ppf([0.025, 0.975], 5.5, 15.5)
    const auto mid = jeffreys({20, 5}, 0.95);
    CHECK(mid.lower == doctest::Approx(0.1023984856830451).epsilon(1e-9));
    CHECK(mid.upper == doctest::Approx(0.46419462924086813).epsilon(1e-9));
}

TEST_CASE("dispatch and names") {
    for (const auto m : {BinomialMethod::ClopperPearson, BinomialMethod::Wald, BinomialMethod::Wilson,
                         BinomialMethod::AgrestiCoull, BinomialMethod::Jeffreys}) {
        CHECK(parse_binomial_method(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_binomial_method("logit"), DomainError);
    CHECK_THROWS_AS(wald({0, 0}, 0.95), DomainError);
    CHECK_THROWS_AS(wald({5, 6}, 0.95), DomainError);
    CHECK_THROWS_AS(wald({5, 1}, 1.0), DomainError);
}

TEST_CASE("endpoints monotone in r and contain the sample proportion") {
    for (const auto m : {BinomialMethod::ClopperPearson, BinomialMethod::Wald, BinomialMethod::Wilson,
                         BinomialMethod::AgrestiCoull, BinomialMethod::Jeffreys}) {
        for (const std::int64_t n : {1, 7, 20, 133}) {
            ProportionInterval prev{0.0, 0.0, 0.95};
            for (std::int64_t r = 0; r <= n; ++r) {
                const auto iv = binomial_interval(m, {n, r}, 0.95);
                CHECK(0.0 <= iv.lower);
                CHECK(iv.lower <= iv.upper);
                CHECK(iv.upper <= 1.0);
                if (m == BinomialMethod::Wilson || m == BinomialMethod::Jeffreys) {
                    CHECK(iv.lower >= prev.lower - 1e-12);
                    CHECK(iv.upper >= prev.upper - 1e-12);
                }
                const double p = static_cast<double>(r) / static_cast<double>(n);
                const bool wald_degenerate = m == BinomialMethod::Wald && (r == 0 || r == n);
                if (!wald_degenerate) {
                    CHECK(iv.lower <= p + 1e-12);
                    CHECK(p <= iv.upper + 1e-12);
                }
                prev = iv;
            }
        }
    }
}

TEST_CASE("coverage curves") {
    const auto grid = uniform_grid(99);
    REQUIRE(grid.size() == 99);
    CHECK(grid.front() == doctest::Approx(0.01));
    const auto cp = coverage_curve(BinomialMethod::ClopperPearson, 20, 0.95, grid);
    for (const auto& point : cp) CHECK(point.coverage >= 0.95);

    const std::vector<double> edge{1e-6};
    CHECK(coverage_curve(BinomialMethod::Wald, 20, 0.95, edge).front().coverage < 1e-4);

    // Coverage at a point equals the pmf mass of the covering outcomes.
    const std::vector<double> one{0.3};
    double mass = 0.0;
    for (std::int64_t k = 0; k <= 20; ++k) {
        if (wilson({20, k}, 0.95).contains(0.3)) mass += std::exp(
            std::lgamma(21.0) - std::lgamma(k + 1.0) - std::lgamma(21.0 - k) + k * std::log(0.3) +
            (20 - k) * std::log(0.7));
    }
    CHECK(coverage_curve(BinomialMethod::Wilson, 20, 0.95, one).front().coverage == doctest::Approx(mass));
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(coverage_curve(BinomialMethod::Wilson, 20, 0.95, bad), DomainError);
}

TEST_CASE("mean coverage reproduces the reference values") {
    CHECK(mean_coverage(BinomialMethod::ClopperPearson, 20, 0.95) == doctest::Approx(0.977).epsilon(0.003 / 0.977));
    CHECK(mean_coverage(BinomialMethod::Wald, 20, 0.95) == doctest::Approx(0.851).epsilon(0.003 / 0.851));
    CHECK(mean_coverage(BinomialMethod::Wilson, 20, 0.95) == doctest::Approx(0.953).epsilon(0.003 / 0.953));
    CHECK(mean_coverage(BinomialMethod::Jeffreys, 20, 0.95) == doctest::Approx(0.951).epsilon(0.003 / 0.951));
    // Fine grid, independently integrated in numpy.
    CHECK(mean_coverage(BinomialMethod::Wald, 20, 0.95, 9999) == doctest::Approx(0.84589).epsilon(1e-4));
    CHECK(mean_coverage(BinomialMethod::ClopperPearson, 20, 0.95, 9999) == doctest::Approx(0.97703).epsilon(1e-4));
}
