#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atypia/reasoning.hpp"
#include "atypia/taxonomy.hpp"

namespace atypia {

// Ground truth for one test image: abnormal or not, the dominant reason when
// abnormal, and optionally a three-way reason-score simplex aggregated from
// fine-grained annotations.
struct TestLabel {
    std::string image_id;
    bool abnormal = false;
    std::optional<Reason> reason;
    std::optional<std::array<double, kNumReasons>> reason_scores;
};

// Mann-Whitney AUC: probability that a random positive outranks a random
// negative, ties counted one half. Throws SingleClassSample.
double auc(std::span<const double> scores, std::span<const int> labels);

// KL divergence in nats between two 3-simplices, with 0 ln(0/q) = 0. The
// second argument is expected to be smoothed away from zero by the caller.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Mean response within each coarse group of a 21-reason annotation row,
// normalized to a simplex; an all-zero row yields the uniform distribution.
std::array<double, kNumReasons> ground_truth_reason_scores(
    std::span<const double> annotation_row, const std::vector<Reason>& grouping);

// rows = predicted reason, columns = true reason.
using ConfusionMatrix = std::array<std::array<std::size_t, kNumReasons>, kNumReasons>;
ConfusionMatrix confusion_matrix(std::span<const Reason> predicted,
                                 std::span<const Reason> truth);

// Normalized CDF triple floored at eps and renormalized, so KL against a
// ground-truth simplex is always defined.
std::array<double, kNumReasons> predicted_reason_simplex(const NormalizedScores& scores,
                                                         double eps = 1e-6);

struct EvalReport {
    std::size_t num_images = 0;
    std::size_t num_abnormal = 0;
    double abnormality_auc = 0.0;
    // One-vs-rest AUC per reason: positives are that reason's abnormal images,
    // negatives all normals plus the other reasons' abnormal images.
    std::array<double, kNumReasons> per_reason_auc{};
    double reason_accuracy = 0.0;  // on abnormal images with a true reason
    ConfusionMatrix confusion{};
    std::optional<double> mean_kl;  // when labels carry reason scores
};

// Matches predictions to labels by image id and computes the full report.
EvalReport evaluate(const std::vector<ReasonRecord>& predictions,
                    const std::vector<TestLabel>& labels);

struct AblationTable {
    std::vector<AblationVariant> variants;  // column order
    // auc[reason][column]; NaN where the row failed, with the error kind in
    // row_error[reason].
    std::array<std::vector<double>, kNumReasons> auc;
    std::array<std::string, kNumReasons> row_error;
};

// Reason-specific AUC of the raw surprise scores under each requested variant,
// using the one-vs-rest positive/negative split described above.
AblationTable run_ablation(const std::vector<ImageEvidence>& evidence,
                           const std::vector<TestLabel>& labels, const TypicalityModel& model,
                           std::span<const AblationVariant> variants);

}  // namespace atypia
