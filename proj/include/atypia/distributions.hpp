#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace atypia {

// The four parametric families used throughout the engine. The enum order is
// also the deterministic tie-break order for model selection.
enum class Family { Gaussian, Exponential, Gamma, InverseGaussian };

// Gaussian variances are clamped to this floor so near-constant samples stay
// usable in -log density terms.
inline constexpr double kVarianceFloor = 1e-9;

struct GaussianParams {
    double mean = 0.0;
    double variance = 1.0;  // squared units of the variable
};

struct ExponentialParams {
    double rate = 1.0;  // > 0
};

struct GammaParams {
    double shape = 1.0;  // > 0, dimensionless
    double scale = 1.0;  // > 0, units of the variable
};

struct InverseGaussianParams {
    double mean = 1.0;   // > 0
    double shape = 1.0;  // lambda, > 0, same units as mean
};

using DistParams =
    std::variant<GaussianParams, ExponentialParams, GammaParams, InverseGaussianParams>;

Family family_of(const DistParams& params);
std::string_view family_name(Family family);
Family family_from_name(std::string_view name);
int param_count(Family family);

// Log densities in nats. Points outside the support return -infinity.
double log_pdf(const GaussianParams& p, double x);
double log_pdf(const ExponentialParams& p, double x);
double log_pdf(const GammaParams& p, double x);
double log_pdf(const InverseGaussianParams& p, double x);
double log_pdf(const DistParams& params, double x);

// Cumulative distribution functions, exact closed forms. The inverse-Gaussian
// CDF uses Phi(sqrt(l/x)(x/m-1)) + exp(2l/m) Phi(-sqrt(l/x)(x/m+1)), evaluated
// in log space so large shape/mean ratios neither overflow nor underflow.
double cdf(const GaussianParams& p, double x);
double cdf(const ExponentialParams& p, double x);
double cdf(const GammaParams& p, double x);
double cdf(const InverseGaussianParams& p, double x);
double cdf(const DistParams& params, double x);

// Differential entropy of a Gaussian, 0.5 ln(2 pi e variance), in nats.
double gaussian_entropy(const GaussianParams& p);

// Quantile of a Gamma distribution by bisection on the CDF.
double gamma_quantile(const GammaParams& p, double prob);

// Maximum-likelihood fits.
//   Gaussian: sample mean, biased (1/n) variance clamped to kVarianceFloor.
//   Exponential: rate = 1 / mean.
//   Gamma: method-of-moments start, Newton refinement of
//          ln k - psi(k) = ln(mean) - mean(ln x), <= 50 iterations, tol 1e-10.
//   Inverse-Gaussian: mean = sample mean, shape = n / sum(1/x_i - 1/mean).
// Throw Error kinds: EmptySample, NonPositiveSample, DegenerateSample.
GaussianParams fit_gaussian(std::span<const double> samples);
ExponentialParams fit_exponential(std::span<const double> samples);
GammaParams fit_gamma(std::span<const double> samples);
InverseGaussianParams fit_inverse_gaussian(std::span<const double> samples);
DistParams fit(Family family, std::span<const double> samples);

double log_likelihood(const DistParams& params, std::span<const double> samples);

// Akaike information criterion: 2k - 2 log_likelihood.
double aic(double log_likelihood, int param_count);

struct AicEntry {
    Family family;
    double aic = 0.0;       // meaningful only when applicable
    bool applicable = false;
    std::string note;       // why the family was skipped, when it was
};

struct FamilySelection {
    Family family;
    DistParams params;
    std::vector<AicEntry> table;
};

// Fits every applicable candidate and returns the AIC argmin. Candidates whose
// support the samples violate are recorded as inapplicable. Ties break toward
// fewer parameters, then toward the fixed Family order.
// Throws NoApplicableFamily when nothing fits.
FamilySelection select_family(std::span<const double> samples,
                              std::span<const Family> candidates);

// Special functions shared with the fitting code; exposed for reuse.
double digamma(double x);
double trigamma(double x);
double normal_cdf(double z);
double log_normal_cdf(double z);
double reg_lower_gamma(double a, double x);

}  // namespace atypia
