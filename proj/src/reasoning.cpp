#include "atypia/reasoning.hpp"

#include <algorithm>
#include <cmath>

#include "atypia/errors.hpp"

namespace atypia {

ReasoningModel fit_surprise_priors(const std::vector<SurpriseTriple>& normal_triples,
                                   const EngineConfig& config) {
    if (normal_triples.size() < 30) {
        throw Error("InsufficientData", "prior fitting needs at least 30 normal triples, got " +
                                            std::to_string(normal_triples.size()));
    }
    static constexpr Family kCandidates[] = {Family::Gaussian, Family::Exponential, Family::Gamma,
                                             Family::InverseGaussian};
    ReasoningModel model;
    model.decision_threshold = config.decision_threshold;
    for (int r = 0; r < kNumReasons; ++r) {
        std::vector<double> scores(normal_triples.size());
        for (std::size_t i = 0; i < normal_triples.size(); ++i) {
            scores[i] = normal_triples[i][static_cast<Reason>(r)];
        }
        const double lowest = *std::min_element(scores.begin(), scores.end());
        ReasonPrior& prior = model.reasons[r];
        if (lowest <= 0.0) {
            // The support margin scales with the population spread: pinning the
            // smallest score right at the support edge would hand its huge
            // reciprocal the whole shape estimate.
            const auto g = fit_gaussian(scores);
            prior.shift = -lowest + std::max(config.epsilon_shift, 0.5 * std::sqrt(g.variance));
        } else {
            prior.shift = 0.0;
        }
        for (double& s : scores) s += prior.shift;

        prior.prior = fit_inverse_gaussian(scores);
        prior.aic_report = select_family(scores, kCandidates).table;
    }
    return model;
}

NormalizedScores normalized_scores(const SurpriseTriple& triple, const ReasoningModel& model) {
    NormalizedScores out;
    for (int r = 0; r < kNumReasons; ++r) {
        const ReasonPrior& prior = model.reasons[r];
        out.values[r] = cdf(prior.prior, triple[static_cast<Reason>(r)] + prior.shift);
    }
    return out;
}

Classification classify_abnormality(const SurpriseTriple& triple, const ReasoningModel& model) {
    const NormalizedScores scores = normalized_scores(triple, model);
    const double final_score = *std::max_element(scores.values.begin(), scores.values.end());
    return {final_score > model.decision_threshold, final_score};
}

Reason reason_argmax(const NormalizedScores& scores) {
    int best = 0;
    for (int r = 1; r < kNumReasons; ++r) {
        if (scores.values[r] > scores.values[best]) best = r;  // ties keep the earlier reason
    }
    return static_cast<Reason>(best);
}

Reason reason_argmax(const SurpriseTriple& triple, const ReasoningModel& model) {
    return reason_argmax(normalized_scores(triple, model));
}

std::vector<ReasonRecord> rank_by_reason(std::vector<ReasonRecord> records, Reason reason) {
    std::stable_sort(records.begin(), records.end(),
                     [reason](const ReasonRecord& a, const ReasonRecord& b) {
                         return a.normalized[reason] > b.normalized[reason];
                     });
    return records;
}

}  // namespace atypia
