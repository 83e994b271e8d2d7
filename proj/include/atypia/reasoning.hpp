#pragma once

#include <array>
#include <string>
#include <vector>

#include "atypia/distributions.hpp"
#include "atypia/surprise.hpp"

namespace atypia {

// Per-reason prior over normal-population surprise scores. Scores are shifted
// onto positive support before the inverse-Gaussian fit; the shift is stored
// and applied identically at test time.
struct ReasonPrior {
    double shift = 0.0;
    InverseGaussianParams prior;
    std::vector<AicEntry> aic_report;
};

struct ReasoningModel {
    std::array<ReasonPrior, kNumReasons> reasons;  // indexed by Reason
    double decision_threshold = 0.95;
};

struct NormalizedScores {
    std::array<double, kNumReasons> values{};  // CDF values in [0,1], Reason order

    double operator[](Reason r) const { return values[static_cast<int>(r)]; }
};

struct Classification {
    bool abnormal = false;
    double final_score = 0.0;  // max of the normalized scores
};

// A scored image as written by the reasoning stage and consumed by ranking and
// evaluation.
struct ReasonRecord {
    std::string image_id;
    SurpriseTriple raw;
    NormalizedScores normalized;
    double final_score = 0.0;
    bool abnormal = false;
    Reason reason = Reason::Object;
};

// Fits one inverse-Gaussian prior per reason on at least 30 normal triples.
// The AIC report compares the four families on the shifted scores; the
// inverse-Gaussian is used regardless of the comparison's winner.
ReasoningModel fit_surprise_priors(const std::vector<SurpriseTriple>& normal_triples,
                                   const EngineConfig& config);

NormalizedScores normalized_scores(const SurpriseTriple& triple, const ReasoningModel& model);

Classification classify_abnormality(const SurpriseTriple& triple, const ReasoningModel& model);

// Argmax over the normalized scores; ties break object > context > scene.
Reason reason_argmax(const SurpriseTriple& triple, const ReasoningModel& model);
Reason reason_argmax(const NormalizedScores& scores);

// Descending by the named reason's normalized score, stable for equal scores.
std::vector<ReasonRecord> rank_by_reason(std::vector<ReasonRecord> records, Reason reason);

}  // namespace atypia
