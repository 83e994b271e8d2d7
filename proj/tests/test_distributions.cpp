#include "atypia/distributions.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

#include "atypia/errors.hpp"
#include "oracles.hpp"

using namespace atypia;

TEST_CASE("gaussian MLE on a symmetric two-point sample") {
    const std::vector<double> xs{0.0, 2.0};
    const auto p = fit_gaussian(xs);
    CHECK(p.mean == doctest::Approx(1.0));
    CHECK(p.variance == doctest::Approx(1.0));
}

TEST_CASE("exponential MLE is reciprocal mean") {
    const std::vector<double> xs{1.0, 1.0, 1.0};
    CHECK(fit_exponential(xs).rate == doctest::Approx(1.0));
}

TEST_CASE("inverse-gaussian MLE recovers seeded parameters within 5%") {
    std::mt19937_64 rng(20240811);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = oracles::sample_inverse_gaussian(rng, 2.0, 5.0);
    const auto p = fit_inverse_gaussian(xs);
    CHECK(std::abs(p.mean - 2.0) / 2.0 < 0.05);
    CHECK(std::abs(p.shape - 5.0) / 5.0 < 0.05);
}

TEST_CASE("constant samples are degenerate for gamma and inverse-gaussian") {
    const std::vector<double> xs{3.0, 3.0, 3.0};
    CHECK_THROWS_WITH_AS(fit_inverse_gaussian(xs), doctest::Contains("DegenerateSample"), Error);
    CHECK_THROWS_WITH_AS(fit_gamma(xs), doctest::Contains("DegenerateSample"), Error);
}

TEST_CASE("fit rejects empty and non-positive samples") {
    CHECK_THROWS_WITH_AS(fit_gaussian({}), doctest::Contains("EmptySample"), Error);
    const std::vector<double> xs{1.0, -0.5};
    CHECK_THROWS_WITH_AS(fit_exponential(xs), doctest::Contains("NonPositiveSample"), Error);
    CHECK_THROWS_WITH_AS(fit_gamma(xs), doctest::Contains("NonPositiveSample"), Error);
    CHECK_THROWS_WITH_AS(fit_inverse_gaussian(xs), doctest::Contains("NonPositiveSample"), Error);
}

TEST_CASE("log densities match hand-computed values") {
    CHECK(log_pdf(GaussianParams{0.0, 1.0}, 0.0) == doctest::Approx(-0.9189385332046727));
    CHECK(log_pdf(ExponentialParams{1.0}, 0.0) == doctest::Approx(0.0));
    CHECK(log_pdf(GammaParams{2.0, 1.0}, -1.0) == -std::numeric_limits<double>::infinity());
    CHECK(log_pdf(InverseGaussianParams{1.0, 1.0}, -0.1) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("inverse-gaussian cdf matches quadrature of the pdf") {
    const InverseGaussianParams p{1.0, 1.0};
    const auto pdf = [&p](double x) { return std::exp(log_pdf(p, x)); };
    const double direct = cdf(p, 1.0);
    const double quad = oracles::integrate(pdf, 1e-12, 1.0);
    CHECK(direct == doctest::Approx(quad).epsilon(1e-6));
    CHECK(direct == doctest::Approx(0.6681).epsilon(1e-3));

    // Across a parameter grid.
    for (double mu : {0.5, 1.0, 2.0, 4.0}) {
        for (double lambda : {0.5, 1.0, 5.0, 20.0}) {
            const InverseGaussianParams q{mu, lambda};
            for (double x : {0.3 * mu, mu, 2.5 * mu}) {
                const auto qpdf = [&q](double t) { return std::exp(log_pdf(q, t)); };
                CHECK(cdf(q, x) ==
                      doctest::Approx(oracles::integrate(qpdf, 1e-13, x)).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("cdf limits and support boundaries") {
    const InverseGaussianParams ig{2.0, 5.0};
    CHECK(cdf(ig, 0.0) == 0.0);
    CHECK(cdf(ig, -1.0) == 0.0);
    CHECK(cdf(ig, 1e9) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cdf(GaussianParams{0.0, 1.0}, 1e9) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cdf(ExponentialParams{2.0}, 1e9) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cdf(GammaParams{3.0, 0.5}, 1e9) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cdf is nondecreasing") {
    const DistParams families[] = {
        DistParams{GaussianParams{0.3, 2.0}},
        DistParams{ExponentialParams{1.7}},
        DistParams{GammaParams{2.5, 0.8}},
        DistParams{InverseGaussianParams{1.2, 3.0}},
    };
    for (const auto& params : families) {
        double prev = 0.0;
        for (double x = -1.0; x < 12.0; x += 0.05) {
            const double c = cdf(params, x);
            CHECK(c >= prev - 1e-14);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            prev = c;
        }
    }
}

TEST_CASE("densities integrate to one over their support") {
    struct Case {
        DistParams params;
        double lo, hi;
    };
    const Case cases[] = {
        {DistParams{GaussianParams{0.5, 0.7}}, 0.5 - 12.0 * std::sqrt(0.7),
         0.5 + 12.0 * std::sqrt(0.7)},
        {DistParams{ExponentialParams{2.0}}, 1e-13, 25.0},
        {DistParams{GammaParams{2.5, 0.6}}, 1e-13, 40.0},
        {DistParams{InverseGaussianParams{1.5, 2.0}}, 1e-13, 200.0},
    };
    for (const auto& c : cases) {
        CHECK(cdf(c.params, c.hi) > 1.0 - 1e-9);  // the bound really covers the mass
        const auto pdf = [&c](double x) { return std::exp(log_pdf(c.params, x)); };
        CHECK(oracles::integrate(pdf, c.lo, c.hi) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("gaussian entropy closed form") {
    CHECK(gaussian_entropy(GaussianParams{0.0, 1.0 / (2.0 * M_PI * M_E)}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gaussian_entropy(GaussianParams{3.0, 1.0}) == doctest::Approx(1.4189385332046727));
    const double floored = gaussian_entropy(GaussianParams{0.0, kVarianceFloor});
    CHECK(std::isfinite(floored));
    CHECK(floored < -5.0);
}

TEST_CASE("gaussian MLE maximizes the sample likelihood") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> draw(0.4, 1.3);
    std::vector<double> xs(500);
    for (auto& x : xs) x = draw(rng);
    const auto p = fit_gaussian(xs);
    const double best = log_likelihood(DistParams{p}, xs);
    for (double dm : {-0.01, 0.01}) {
        CHECK(log_likelihood(DistParams{GaussianParams{p.mean * (1.0 + dm), p.variance}}, xs) <=
              best);
        CHECK(log_likelihood(DistParams{GaussianParams{p.mean, p.variance * (1.0 + dm)}}, xs) <=
              best);
    }
}

TEST_CASE("MLE consistency for all four families at n = 10000") {
    std::mt19937_64 rng(123456);
    std::vector<double> xs(10000);

    for (auto& x : xs) x = std::normal_distribution<double>(1.5, 0.8)(rng);
    const auto g = fit_gaussian(xs);
    CHECK(std::abs(g.mean - 1.5) / 1.5 < 0.05);
    CHECK(std::abs(g.variance - 0.64) / 0.64 < 0.05);

    for (auto& x : xs) x = std::exponential_distribution<double>(2.5)(rng);
    CHECK(std::abs(fit_exponential(xs).rate - 2.5) / 2.5 < 0.05);

    for (auto& x : xs) x = std::gamma_distribution<double>(3.0, 0.5)(rng);
    const auto gm = fit_gamma(xs);
    CHECK(std::abs(gm.shape - 3.0) / 3.0 < 0.05);
    CHECK(std::abs(gm.scale - 0.5) / 0.5 < 0.05);

    for (auto& x : xs) x = oracles::sample_inverse_gaussian(rng, 2.0, 5.0);
    const auto ig = fit_inverse_gaussian(xs);
    CHECK(std::abs(ig.mean - 2.0) / 2.0 < 0.05);
    CHECK(std::abs(ig.shape - 5.0) / 5.0 < 0.05);
}

TEST_CASE("aic formula and monotonicity") {
    CHECK(aic(0.0, 1) == doctest::Approx(2.0));
    CHECK(aic(-10.0, 2) == doctest::Approx(24.0));
    CHECK(aic(-5.0, 2) < aic(-6.0, 2));  // higher likelihood is preferred
}

TEST_CASE("select_family prefers the generating family on seeded draws") {
    static constexpr Family kAll[] = {Family::Gaussian, Family::Exponential, Family::Gamma,
                                      Family::InverseGaussian};
    std::mt19937_64 rng(2025);
    int wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xs(1000);
        for (auto& x : xs) x = oracles::sample_inverse_gaussian(rng, 2.0, 5.0);
        if (select_family(xs, kAll).family == Family::InverseGaussian) ++wins;
    }
    CHECK(wins >= 90);
}

TEST_CASE("select_family support violations and trivial candidate sets") {
    const std::vector<double> with_negative{0.5, -1.0, 2.0};
    static constexpr Family kExp[] = {Family::Exponential};
    CHECK_THROWS_WITH_AS(select_family(with_negative, kExp),
                         doctest::Contains("NoApplicableFamily"), Error);

    const std::vector<double> xs{0.5, 1.0, 2.0};
    const auto selection = select_family(xs, kExp);
    CHECK(selection.family == Family::Exponential);
    CHECK(selection.table.size() == 1);
    CHECK(selection.table[0].applicable);

    // Inapplicable candidates are recorded, not fatal.
    static constexpr Family kTwo[] = {Family::Gaussian, Family::Gamma};
    const auto mixed = select_family(with_negative, kTwo);
    CHECK(mixed.family == Family::Gaussian);
    CHECK_FALSE(mixed.table[1].applicable);
    CHECK(mixed.table[1].note == "NonPositiveSample");
}

TEST_CASE("gamma quantile inverts the cdf") {
    const GammaParams p{2.0, 0.1};
    for (double q : {0.01, 0.5, 0.99}) {
        CHECK(cdf(p, gamma_quantile(p, q)) == doctest::Approx(q).epsilon(1e-9));
    }
}

TEST_CASE("family names round-trip") {
    for (Family f : {Family::Gaussian, Family::Exponential, Family::Gamma,
                     Family::InverseGaussian}) {
        CHECK(family_from_name(family_name(f)) == f);
    }
    CHECK_THROWS_AS(family_from_name("weibull"), Error);
}
