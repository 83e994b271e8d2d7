#include "atypia/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

// Value of the Platt objective at (a, b): sum of t_i f_i + log(1 + exp(-f_i))
// evaluated in the overflow-safe branch form.
double objective(std::span<const double> scores, const std::vector<double>& targets, double a,
                 double b) {
    double value = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double f = a * scores[i] + b;
        if (f >= 0.0) {
            value += targets[i] * f + std::log1p(std::exp(-f));
        } else {
            value += (targets[i] - 1.0) * f + std::log1p(std::exp(f));
        }
    }
    return value;
}

}  // namespace

PlattParams fit_platt(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error("LengthMismatch", "scores and labels differ in length");
    }
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (int y : labels) {
        (y > 0 ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw Error("SingleClassSample", "Platt fitting needs both classes");
    }

    const double t_pos = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_neg) + 2.0);
    std::vector<double> targets(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        targets[i] = labels[i] > 0 ? t_pos : t_neg;
    }

    double a = 0.0;
    double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));

    for (int iter = 0; iter < 100; ++iter) {
        // Gradient and Hessian of the objective, with a small ridge on the
        // Hessian diagonal as in the reference procedure.
        double h11 = 1e-12, h22 = 1e-12, h21 = 0.0;
        double g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double f = a * scores[i] + b;
            double p, q;
            if (f >= 0.0) {
                p = std::exp(-f) / (1.0 + std::exp(-f));
                q = 1.0 / (1.0 + std::exp(-f));
            } else {
                p = 1.0 / (1.0 + std::exp(f));
                q = std::exp(f) / (1.0 + std::exp(f));
            }
            const double pq = p * q;
            h11 += scores[i] * scores[i] * pq;
            h22 += pq;
            h21 += scores[i] * pq;
            const double d = targets[i] - p;
            g1 += scores[i] * d;
            g2 += d;
        }
        if (std::abs(g1) < 1e-10 && std::abs(g2) < 1e-10) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double slope_along = g1 * da + g2 * db;

        const double value = objective(scores, targets, a, b);
        double step = 1.0;
        while (step >= 1e-10) {
            const double na = a + step * da;
            const double nb = b + step * db;
            if (objective(scores, targets, na, nb) < value + 1e-4 * step * slope_along) {
                a = na;
                b = nb;
                break;
            }
            step *= 0.5;
        }
        if (step < 1e-10) break;  // line search failed, accept current point
    }
    return {a, b};
}

double apply_platt(const PlattParams& params, double score) {
    const double f = params.slope * score + params.intercept;
    double p;
    if (f >= 0.0) {
        const double e = std::exp(-f);
        p = e / (1.0 + e);
    } else {
        p = 1.0 / (1.0 + std::exp(f));
    }
    // Keep the open interval even where exp() saturates.
    return std::clamp(p, std::numeric_limits<double>::min(),
                      1.0 - std::numeric_limits<double>::epsilon() / 2.0);
}

}  // namespace atypia
