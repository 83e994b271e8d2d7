#include "atypia/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "atypia/errors.hpp"

namespace atypia {

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error("LengthMismatch", "scores and labels differ in length");
    }
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) {
        throw Error("SingleClassSample", "AUC needs both classes");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midrank sum over positives; U = R+ - n+(n+1)/2.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] > 0) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

namespace {

void check_simplex(std::span<const double> p, const char* which) {
    double sum = 0.0;
    for (double v : p) {
        if (v < -1e-12) throw Error("InvalidSimplex", std::string(which) + " has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error("InvalidSimplex", std::string(which) + " does not sum to one");
    }
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error("InvalidSimplex", "p and q differ in length");
    check_simplex(p, "p");
    check_simplex(q, "q");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, kl);
}

std::array<double, kNumReasons> ground_truth_reason_scores(
    std::span<const double> annotation_row, const std::vector<Reason>& grouping) {
    if (annotation_row.size() != grouping.size()) {
        throw Error("DimensionMismatch", "annotation row does not match the reason grouping");
    }
    std::array<double, kNumReasons> sums{};
    std::array<std::size_t, kNumReasons> counts{};
    for (std::size_t i = 0; i < grouping.size(); ++i) {
        const int g = static_cast<int>(grouping[i]);
        sums[g] += annotation_row[i];
        counts[g] += 1;
    }
    std::array<double, kNumReasons> means{};
    double total = 0.0;
    for (int g = 0; g < kNumReasons; ++g) {
        means[g] = counts[g] > 0 ? sums[g] / static_cast<double>(counts[g]) : 0.0;
        total += means[g];
    }
    if (total <= 0.0) {
        means.fill(1.0 / kNumReasons);
        return means;
    }
    for (double& m : means) m /= total;
    return means;
}

ConfusionMatrix confusion_matrix(std::span<const Reason> predicted,
                                 std::span<const Reason> truth) {
    if (predicted.size() != truth.size()) {
        throw Error("LengthMismatch", "predicted and true reason lists differ in length");
    }
    ConfusionMatrix counts{};
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        counts[static_cast<int>(predicted[i])][static_cast<int>(truth[i])] += 1;
    }
    return counts;
}

std::array<double, kNumReasons> predicted_reason_simplex(const NormalizedScores& scores,
                                                         double eps) {
    std::array<double, kNumReasons> out{};
    double total = 0.0;
    for (int r = 0; r < kNumReasons; ++r) {
        out[r] = std::max(scores.values[r], eps);
        total += out[r];
    }
    for (double& v : out) v /= total;
    return out;
}

EvalReport evaluate(const std::vector<ReasonRecord>& predictions,
                    const std::vector<TestLabel>& labels) {
    std::unordered_map<std::string, const TestLabel*> by_id;
    by_id.reserve(labels.size());
    for (const auto& label : labels) by_id[label.image_id] = &label;

    EvalReport report;
    report.num_images = predictions.size();

    std::vector<double> final_scores;
    std::vector<int> abnormal_labels;
    std::array<std::vector<double>, kNumReasons> reason_scores;
    std::array<std::vector<int>, kNumReasons> reason_labels;
    std::vector<Reason> predicted_reasons;
    std::vector<Reason> true_reasons;
    double kl_sum = 0.0;
    std::size_t kl_count = 0;

    for (const auto& pred : predictions) {
        const auto it = by_id.find(pred.image_id);
        if (it == by_id.end()) {
            throw Error("LengthMismatch", "no label for image '" + pred.image_id + "'");
        }
        const TestLabel& label = *it->second;
        final_scores.push_back(pred.final_score);
        abnormal_labels.push_back(label.abnormal ? 1 : 0);
        if (label.abnormal) ++report.num_abnormal;

        for (int r = 0; r < kNumReasons; ++r) {
            reason_scores[r].push_back(pred.normalized.values[r]);
            reason_labels[r].push_back(
                label.abnormal && label.reason && *label.reason == static_cast<Reason>(r) ? 1 : 0);
        }
        if (label.abnormal && label.reason) {
            predicted_reasons.push_back(pred.reason);
            true_reasons.push_back(*label.reason);
        }
        if (label.reason_scores) {
            const auto q = predicted_reason_simplex(pred.normalized);
            kl_sum += kl_divergence(*label.reason_scores, q);
            ++kl_count;
        }
    }

    report.abnormality_auc = auc(final_scores, abnormal_labels);
    for (int r = 0; r < kNumReasons; ++r) {
        report.per_reason_auc[r] = auc(reason_scores[r], reason_labels[r]);
    }
    report.confusion = confusion_matrix(predicted_reasons, true_reasons);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted_reasons.size(); ++i) {
        if (predicted_reasons[i] == true_reasons[i]) ++correct;
    }
    report.reason_accuracy = predicted_reasons.empty()
                                 ? 0.0
                                 : static_cast<double>(correct) /
                                       static_cast<double>(predicted_reasons.size());
    if (kl_count > 0) report.mean_kl = kl_sum / static_cast<double>(kl_count);
    return report;
}

AblationTable run_ablation(const std::vector<ImageEvidence>& evidence,
                           const std::vector<TestLabel>& labels, const TypicalityModel& model,
                           std::span<const AblationVariant> variants) {
    if (evidence.size() != labels.size()) {
        throw Error("LengthMismatch", "evidence and labels differ in length");
    }
    AblationTable table;
    table.variants.assign(variants.begin(), variants.end());
    for (auto& row : table.auc) {
        row.assign(variants.size(), std::numeric_limits<double>::quiet_NaN());
    }

    for (std::size_t col = 0; col < variants.size(); ++col) {
        const AblationConfig config = ablation_config(variants[col]);
        std::vector<SurpriseTriple> triples;
        triples.reserve(evidence.size());
        for (const auto& ev : evidence) triples.push_back(score_image(ev, model, config));

        for (int r = 0; r < kNumReasons; ++r) {
            std::vector<double> scores;
            std::vector<int> positives;
            for (std::size_t i = 0; i < triples.size(); ++i) {
                scores.push_back(triples[i][static_cast<Reason>(r)]);
                positives.push_back(labels[i].abnormal && labels[i].reason &&
                                            *labels[i].reason == static_cast<Reason>(r)
                                        ? 1
                                        : 0);
            }
            try {
                table.auc[r][col] = auc(scores, positives);
            } catch (const Error& e) {
                table.row_error[r] = e.kind();
            }
        }
    }
    return table;
}

}  // namespace atypia
