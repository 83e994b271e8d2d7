#include "atypia/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Overlap of [a0, a1) with a cell [c0, c1), divided by the cell extent.
double interval_overlap(double a0, double a1, double c0, double c1) {
    const double lo = std::max(a0, c0);
    const double hi = std::min(a1, c1);
    return std::max(0.0, hi - lo) / (c1 - c0);
}

void check_record_shapes(const NormalTrainingRecord& record, const CategoryVocab& vocab) {
    const auto& ev = record.evidence;
    if (ev.scene_probs.size() != vocab.num_scenes() ||
        ev.scene_attrs.size() != vocab.num_scene_attrs()) {
        throw Error("VocabMismatch",
                    "record '" + ev.image_id + "' scene vectors do not match the vocabulary");
    }
    if (record.scene_label >= vocab.num_scenes()) {
        throw Error("VocabMismatch",
                    "record '" + ev.image_id + "' scene_label out of range");
    }
    if (!record.scene_attr_annotations.empty() &&
        record.scene_attr_annotations.size() != vocab.num_scene_attrs()) {
        throw Error("VocabMismatch",
                    "record '" + ev.image_id + "' scene attribute annotations length");
    }
    if (record.object_truth.size() != ev.objects.size()) {
        throw Error("VocabMismatch",
                    "record '" + ev.image_id + "' ground truth count != object count");
    }
    for (std::size_t k = 0; k < ev.objects.size(); ++k) {
        const auto& obj = ev.objects[k];
        const auto& truth = record.object_truth[k];
        if (obj.object_probs.size() != vocab.num_objects() ||
            obj.object_attrs.size() != vocab.num_object_attrs()) {
            throw Error("VocabMismatch",
                        "record '" + ev.image_id + "' object vectors do not match the vocabulary");
        }
        if (truth.object_label >= vocab.num_objects()) {
            throw Error("VocabMismatch",
                        "record '" + ev.image_id + "' object_label out of range");
        }
        if (!truth.attr_annotations.empty() &&
            truth.attr_annotations.size() != vocab.num_object_attrs()) {
            throw Error("VocabMismatch",
                        "record '" + ev.image_id + "' attribute annotations length");
        }
    }
}

}  // namespace

std::vector<double> cell_ratios(const BoundingBox& bbox, int grid_size) {
    const int g = grid_size;
    std::vector<double> out(static_cast<std::size_t>(g) * g, 0.0);
    const double step = 1.0 / g;
    for (int row = 0; row < g; ++row) {
        const double cy0 = row * step;
        const double cy1 = cy0 + step;
        const double fy = interval_overlap(bbox.y, bbox.y + bbox.h, cy0, cy1);
        if (fy == 0.0) continue;
        for (int col = 0; col < g; ++col) {
            const double cx0 = col * step;
            const double cx1 = cx0 + step;
            const double fx = interval_overlap(bbox.x, bbox.x + bbox.w, cx0, cx1);
            out[static_cast<std::size_t>(row) * g + col] = fx * fy;
        }
    }
    return out;
}

double scene_attr_relevance(const GaussianParams& conditional, double entropy_floor) {
    return 1.0 / std::max(gaussian_entropy(conditional), entropy_floor);
}

double object_attr_relevance(std::span<const int> annotations) {
    std::size_t present = 0;
    std::size_t positive = 0;
    for (int a : annotations) {
        if (a == kAnnotationMissing) continue;
        ++present;
        if (a > 0) ++positive;
    }
    if (present == 0) return 0.0;
    return static_cast<double>(positive) / static_cast<double>(present);
}

double attribute_reliability(std::span<const double> responses, std::span<const int> truth) {
    if (responses.size() != truth.size()) {
        throw Error("LengthMismatch", "responses and truth differ in length");
    }
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const bool predicted = responses[i] >= 0.5;
        if (truth[i] > 0) {
            (predicted ? tp : fn) += 1;
        } else {
            (predicted ? fp : tn) += 1;
        }
    }
    if (tp + fn == 0 || tn + fp == 0) return 0.5;
    const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return 0.5 * (tpr + tnr);
}

bool in_reliability_holdout(const std::string& record_id, double holdout_fraction) {
    return static_cast<double>(fnv1a(record_id) % 100000ull) <
           holdout_fraction * 100000.0;
}

TypicalityModel train(const std::vector<NormalTrainingRecord>& records,
                      const CategoryVocab& vocab, const EngineConfig& config) {
    if (records.empty()) {
        throw Error("InsufficientData", "training requires at least one record");
    }
    for (const auto& record : records) check_record_shapes(record, vocab);

    const std::size_t num_obj = vocab.num_objects();
    const std::size_t num_scn = vocab.num_scenes();
    const std::size_t n_oattr = vocab.num_object_attrs();
    const std::size_t m_sattr = vocab.num_scene_attrs();
    const int g = config.grid_size;
    const std::size_t num_cells = static_cast<std::size_t>(g) * g;

    TypicalityModel model;
    model.vocab = vocab;

    // Pass 1: bucket responses, annotations, counts, and spatial ratios.
    std::vector<std::vector<std::size_t>> scene_records(num_scn);  // record index per scene
    for (std::size_t r = 0; r < records.size(); ++r) {
        scene_records[records[r].scene_label].push_back(r);
    }
    for (std::size_t j = 0; j < num_scn; ++j) {
        if (scene_records[j].empty()) {
            throw Error("InsufficientData",
                        "scene category '" + vocab.scene_categories[j] + "' has no records");
        }
    }

    struct ObjectInstance {
        std::size_t record;
        std::size_t slot;
    };
    std::vector<std::vector<ObjectInstance>> category_instances(num_obj);
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (std::size_t k = 0; k < records[r].object_truth.size(); ++k) {
            category_instances[records[r].object_truth[k].object_label].push_back({r, k});
        }
    }
    for (std::size_t c = 0; c < num_obj; ++c) {
        if (category_instances[c].size() < 2) {
            throw Error("InsufficientData", "object category '" + vocab.object_categories[c] +
                                                "' has fewer than two instances");
        }
    }

    // Scene-attribute conditionals and relevance.
    model.scene_attr_cond.assign(m_sattr, std::vector<GaussianParams>(num_scn));
    model.scene_relevance.assign(m_sattr, std::vector<double>(num_scn, 0.0));
    std::vector<double> bucket;
    for (std::size_t i = 0; i < m_sattr; ++i) {
        for (std::size_t j = 0; j < num_scn; ++j) {
            bucket.clear();
            for (std::size_t r : scene_records[j]) {
                bucket.push_back(records[r].evidence.scene_attrs[i]);
            }
            model.scene_attr_cond[i][j] = fit_gaussian(bucket);
            model.scene_relevance[i][j] =
                scene_attr_relevance(model.scene_attr_cond[i][j], config.entropy_floor);
        }
    }

    // Object-attribute conditionals and annotation-based relevance.
    model.object_attr_cond.assign(n_oattr, std::vector<GaussianParams>(num_obj));
    model.object_relevance.assign(n_oattr, std::vector<double>(num_obj, 0.0));
    std::vector<int> ann_bucket;
    for (std::size_t i = 0; i < n_oattr; ++i) {
        for (std::size_t c = 0; c < num_obj; ++c) {
            bucket.clear();
            ann_bucket.clear();
            for (const auto& inst : category_instances[c]) {
                bucket.push_back(records[inst.record].evidence.objects[inst.slot].object_attrs[i]);
                const auto& ann = records[inst.record].object_truth[inst.slot].attr_annotations;
                ann_bucket.push_back(ann.empty() ? kAnnotationMissing : ann[i]);
            }
            model.object_attr_cond[i][c] = fit_gaussian(bucket);
            model.object_relevance[i][c] = object_attr_relevance(ann_bucket);
        }
    }

    // Reliability on the deterministic hold-out slice.
    model.scene_reliability.assign(m_sattr, 0.5);
    model.object_reliability.assign(n_oattr, 0.5);
    {
        std::vector<std::size_t> holdout;
        for (std::size_t r = 0; r < records.size(); ++r) {
            if (in_reliability_holdout(records[r].evidence.image_id, config.holdout_fraction)) {
                holdout.push_back(r);
            }
        }
        std::vector<double> responses;
        std::vector<int> truth;
        for (std::size_t i = 0; i < m_sattr; ++i) {
            responses.clear();
            truth.clear();
            for (std::size_t r : holdout) {
                const auto& ann = records[r].scene_attr_annotations;
                if (ann.empty() || ann[i] == kAnnotationMissing) continue;
                responses.push_back(records[r].evidence.scene_attrs[i]);
                truth.push_back(ann[i]);
            }
            model.scene_reliability[i] = attribute_reliability(responses, truth);
        }
        for (std::size_t i = 0; i < n_oattr; ++i) {
            responses.clear();
            truth.clear();
            for (std::size_t r : holdout) {
                for (std::size_t k = 0; k < records[r].object_truth.size(); ++k) {
                    const auto& ann = records[r].object_truth[k].attr_annotations;
                    if (ann.empty() || ann[i] == kAnnotationMissing) continue;
                    responses.push_back(records[r].evidence.objects[k].object_attrs[i]);
                    truth.push_back(ann[i]);
                }
            }
            model.object_reliability[i] = attribute_reliability(responses, truth);
        }
    }

    // Object-given-scene table with add-alpha smoothing, columns normalized.
    {
        std::vector<std::vector<double>> counts(num_obj, std::vector<double>(num_scn, 0.0));
        for (const auto& record : records) {
            for (const auto& truth : record.object_truth) {
                counts[truth.object_label][record.scene_label] += 1.0;
            }
        }
        model.object_given_scene.assign(num_obj, std::vector<double>(num_scn, 0.0));
        const double alpha = config.smoothing_alpha;
        for (std::size_t j = 0; j < num_scn; ++j) {
            double total = 0.0;
            for (std::size_t c = 0; c < num_obj; ++c) total += counts[c][j];
            const double denom = total + alpha * static_cast<double>(num_obj);
            for (std::size_t c = 0; c < num_obj; ++c) {
                model.object_given_scene[c][j] = (counts[c][j] + alpha) / denom;
            }
        }
    }

    // Zero-inflated exponential location model per (category, cell).
    model.location.grid_size = g;
    model.location.clamp_max = config.clamp_max;
    model.location.cells.assign(num_obj, std::vector<CellModel>(num_cells));
    {
        std::vector<std::vector<double>> positives(num_cells);
        for (std::size_t c = 0; c < num_obj; ++c) {
            for (auto& v : positives) v.clear();
            std::vector<std::size_t> zero_counts(num_cells, 0);
            for (const auto& inst : category_instances[c]) {
                const auto& truth = records[inst.record].object_truth[inst.slot];
                const auto& obj = records[inst.record].evidence.objects[inst.slot];
                std::vector<double> ratios;
                if (truth.cell_ratios && truth.cell_ratios->size() == num_cells) {
                    ratios = *truth.cell_ratios;
                } else {
                    ratios = cell_ratios(obj.bbox, g);
                }
                for (std::size_t cell = 0; cell < num_cells; ++cell) {
                    if (ratios[cell] > 0.0) {
                        positives[cell].push_back(ratios[cell]);
                    } else {
                        zero_counts[cell] += 1;
                    }
                }
            }
            const double total = static_cast<double>(category_instances[c].size());
            for (std::size_t cell = 0; cell < num_cells; ++cell) {
                CellModel& cm = model.location.cells[c][cell];
                cm.zero_mass = static_cast<double>(zero_counts[cell]) / total;
                if (!positives[cell].empty()) {
                    cm.positive = fit_exponential(positives[cell]);
                    cm.has_positive = true;
                }
            }
        }
    }

    // Relative-size Gamma per category.
    model.size.resize(num_obj);
    for (std::size_t c = 0; c < num_obj; ++c) {
        bucket.clear();
        for (const auto& inst : category_instances[c]) {
            bucket.push_back(records[inst.record].evidence.objects[inst.slot].relative_size);
        }
        model.size[c] = fit_gamma(bucket);
    }

    // Scene prior from label frequencies.
    model.scene_prior.assign(num_scn, 0.0);
    for (const auto& record : records) model.scene_prior[record.scene_label] += 1.0;
    for (double& p : model.scene_prior) p /= static_cast<double>(records.size());

    return model;
}

}  // namespace atypia
