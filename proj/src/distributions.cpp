#include "atypia/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sample_mean(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

void require_nonempty(std::span<const double> xs) {
    if (xs.empty()) throw Error("EmptySample", "fit requires a non-empty sample");
}

void require_positive(std::span<const double> xs, Family family) {
    for (double x : xs) {
        if (!(x > 0.0)) {
            throw Error("NonPositiveSample",
                        std::string(family_name(family)) +
                            " fit requires strictly positive samples, got " + std::to_string(x));
        }
    }
}

bool all_identical(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

}  // namespace

Family family_of(const DistParams& params) {
    return static_cast<Family>(params.index());
}

std::string_view family_name(Family family) {
    switch (family) {
        case Family::Gaussian: return "gaussian";
        case Family::Exponential: return "exponential";
        case Family::Gamma: return "gamma";
        case Family::InverseGaussian: return "inverse_gaussian";
    }
    return "unknown";
}

Family family_from_name(std::string_view name) {
    if (name == "gaussian") return Family::Gaussian;
    if (name == "exponential") return Family::Exponential;
    if (name == "gamma") return Family::Gamma;
    if (name == "inverse_gaussian") return Family::InverseGaussian;
    throw Error("CorruptDocument", "unknown distribution family '" + std::string(name) + "'",
                ErrorCategory::Model);
}

int param_count(Family family) {
    return family == Family::Exponential ? 1 : 2;
}

// ---------------------------------------------------------------------------
// Special functions.
// ---------------------------------------------------------------------------

double digamma(double x) {
    // Recurrence into the asymptotic regime, then the standard series.
    double acc = 0.0;
    while (x < 6.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv2 * (1.0 / 12.0 -
                inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return acc + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
    double acc = 0.0;
    while (x < 6.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return acc +
           inv * (1.0 +
                  inv * (0.5 +
                         inv * (1.0 / 6.0 -
                                inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

double log_normal_cdf(double z) {
    if (z > -30.0) {
        return std::log(normal_cdf(z));
    }
    // Deep lower tail: Phi(z) ~ phi(z)/(-z) (1 - 1/z^2 + 3/z^4 - 15/z^6).
    const double z2 = z * z;
    const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return -0.5 * z2 - 0.5 * kLogTwoPi - std::log(-z) + std::log(series);
}

double reg_lower_gamma(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        // Power series around zero.
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return std::min(1.0, sum * std::exp(-x + a * std::log(x) - std::lgamma(a)));
    }
    // Continued fraction for the upper tail (modified Lentz).
    const double fpmin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return std::clamp(1.0 - q, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Densities.
// ---------------------------------------------------------------------------

double log_pdf(const GaussianParams& p, double x) {
    const double d = x - p.mean;
    return -0.5 * (kLogTwoPi + std::log(p.variance)) - d * d / (2.0 * p.variance);
}

double log_pdf(const ExponentialParams& p, double x) {
    if (x < 0.0) return kNegInf;
    return std::log(p.rate) - p.rate * x;
}

double log_pdf(const GammaParams& p, double x) {
    if (x <= 0.0) return kNegInf;
    return (p.shape - 1.0) * std::log(x) - x / p.scale - p.shape * std::log(p.scale) -
           std::lgamma(p.shape);
}

double log_pdf(const InverseGaussianParams& p, double x) {
    if (x <= 0.0) return kNegInf;
    const double d = x - p.mean;
    return 0.5 * (std::log(p.shape) - kLogTwoPi - 3.0 * std::log(x)) -
           p.shape * d * d / (2.0 * p.mean * p.mean * x);
}

double log_pdf(const DistParams& params, double x) {
    return std::visit([x](const auto& p) { return log_pdf(p, x); }, params);
}

// ---------------------------------------------------------------------------
// CDFs.
// ---------------------------------------------------------------------------

double cdf(const GaussianParams& p, double x) {
    return normal_cdf((x - p.mean) / std::sqrt(p.variance));
}

double cdf(const ExponentialParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-p.rate * x);
}

double cdf(const GammaParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return reg_lower_gamma(p.shape, x / p.scale);
}

double cdf(const InverseGaussianParams& p, double x) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double rlx = std::sqrt(p.shape / x);
    const double xm = x / p.mean;
    const double first = normal_cdf(rlx * (xm - 1.0));
    // exp(2l/m) Phi(-b) computed as exp(2l/m + log Phi(-b)); the exponent is
    // always <= 0 analytically, so the product cannot overflow.
    const double log_second = 2.0 * p.shape / p.mean + log_normal_cdf(-rlx * (xm + 1.0));
    return std::clamp(first + std::exp(log_second), 0.0, 1.0);
}

double cdf(const DistParams& params, double x) {
    return std::visit([x](const auto& p) { return cdf(p, x); }, params);
}

double gaussian_entropy(const GaussianParams& p) {
    return 0.5 * (kLogTwoPi + 1.0 + std::log(p.variance));
}

double gamma_quantile(const GammaParams& p, double prob) {
    if (prob <= 0.0) return 0.0;
    if (prob >= 1.0) return std::numeric_limits<double>::infinity();
    double hi = p.shape * p.scale;  // mean
    while (cdf(p, hi) < prob) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(p, mid) < prob) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Maximum-likelihood fitting.
// ---------------------------------------------------------------------------

GaussianParams fit_gaussian(std::span<const double> samples) {
    require_nonempty(samples);
    const double mean = sample_mean(samples);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double variance = ss / static_cast<double>(samples.size());
    return {mean, std::max(variance, kVarianceFloor)};
}

ExponentialParams fit_exponential(std::span<const double> samples) {
    require_nonempty(samples);
    require_positive(samples, Family::Exponential);
    return {1.0 / sample_mean(samples)};
}

GammaParams fit_gamma(std::span<const double> samples) {
    require_nonempty(samples);
    require_positive(samples, Family::Gamma);
    if (samples.size() < 2 || all_identical(samples)) {
        throw Error("DegenerateSample", "gamma fit requires at least two distinct values");
    }
    const double mean = sample_mean(samples);
    double mean_log = 0.0;
    for (double x : samples) mean_log += std::log(x);
    mean_log /= static_cast<double>(samples.size());

    // s > 0 by Jensen; equality only for identical samples, excluded above.
    const double s = std::log(mean) - mean_log;
    double shape = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int i = 0; i < 50; ++i) {
        const double f = std::log(shape) - digamma(shape) - s;
        const double fprime = 1.0 / shape - trigamma(shape);
        const double step = f / fprime;
        shape -= step;
        if (shape <= 0.0) shape = 1e-8;
        if (std::abs(step) < 1e-10 * std::max(1.0, shape)) break;
    }
    return {shape, mean / shape};
}

InverseGaussianParams fit_inverse_gaussian(std::span<const double> samples) {
    require_nonempty(samples);
    require_positive(samples, Family::InverseGaussian);
    if (samples.size() < 2 || all_identical(samples)) {
        throw Error("DegenerateSample",
                    "inverse-Gaussian fit requires at least two distinct values");
    }
    const double mean = sample_mean(samples);
    double denom = 0.0;
    for (double x : samples) denom += 1.0 / x - 1.0 / mean;
    if (!(denom > 0.0)) {
        // Reciprocal-mean inequality makes denom >= 0; zero means a constant sample.
        throw Error("DegenerateSample", "inverse-Gaussian shape denominator is zero");
    }
    return {mean, static_cast<double>(samples.size()) / denom};
}

DistParams fit(Family family, std::span<const double> samples) {
    switch (family) {
        case Family::Gaussian: return fit_gaussian(samples);
        case Family::Exponential: return fit_exponential(samples);
        case Family::Gamma: return fit_gamma(samples);
        case Family::InverseGaussian: return fit_inverse_gaussian(samples);
    }
    throw Error("Internal", "unreachable family tag", ErrorCategory::Internal);
}

double log_likelihood(const DistParams& params, std::span<const double> samples) {
    double total = 0.0;
    for (double x : samples) total += log_pdf(params, x);
    return total;
}

double aic(double log_likelihood, int param_count) {
    return 2.0 * static_cast<double>(param_count) - 2.0 * log_likelihood;
}

FamilySelection select_family(std::span<const double> samples,
                              std::span<const Family> candidates) {
    FamilySelection out{Family::Gaussian, GaussianParams{}, {}};
    bool have_best = false;
    double best_aic = 0.0;
    for (Family family : candidates) {
        AicEntry entry{family, 0.0, false, ""};
        try {
            const DistParams params = fit(family, samples);
            entry.aic = aic(log_likelihood(params, samples), param_count(family));
            entry.applicable = true;
            const bool better =
                !have_best || entry.aic < best_aic ||
                (entry.aic == best_aic &&
                 (param_count(family) < param_count(out.family) ||
                  (param_count(family) == param_count(out.family) && family < out.family)));
            if (better) {
                have_best = true;
                best_aic = entry.aic;
                out.family = family;
                out.params = params;
            }
        } catch (const Error& e) {
            entry.note = e.kind();
        }
        out.table.push_back(std::move(entry));
    }
    if (!have_best) {
        throw Error("NoApplicableFamily", "no candidate family is applicable to the sample");
    }
    return out;
}

}  // namespace atypia
