#include "atypia/surprise.hpp"

#include <algorithm>
#include <cmath>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

void check_evidence_shapes(const ImageEvidence& evidence, const TypicalityModel& model) {
    const auto& vocab = model.vocab;
    if (evidence.scene_probs.size() != vocab.num_scenes() ||
        evidence.scene_attrs.size() != vocab.num_scene_attrs()) {
        throw Error("DimensionMismatch",
                    "evidence '" + evidence.image_id + "' scene vectors do not match the model");
    }
    for (const auto& obj : evidence.objects) {
        if (obj.object_probs.size() != vocab.num_objects() ||
            obj.object_attrs.size() != vocab.num_object_attrs()) {
            throw Error("DimensionMismatch",
                        "evidence '" + evidence.image_id + "' object vectors do not match the model");
        }
    }
}

// Density of the fitted relative-size Gamma at its mode; shapes at or below
// one put the mode on the support edge, so the first percentile stands in.
double modal_density(const GammaParams& p) {
    const double at = p.shape > 1.0 ? (p.shape - 1.0) * p.scale : gamma_quantile(p, 0.01);
    return std::exp(log_pdf(p, at));
}

}  // namespace

AblationConfig ablation_config(AblationVariant variant) {
    switch (variant) {
        case AblationVariant::Var1: return {false, false, false, false};
        case AblationVariant::Var2: return {false, true, false, true};
        case AblationVariant::Var3: return {true, false, true, false};
        case AblationVariant::Full: return {true, true, true, true};
    }
    return {};
}

std::string_view ablation_name(AblationVariant variant) {
    switch (variant) {
        case AblationVariant::Var1: return "var1";
        case AblationVariant::Var2: return "var2";
        case AblationVariant::Var3: return "var3";
        case AblationVariant::Full: return "full";
    }
    return "unknown";
}

AblationVariant ablation_from_name(std::string_view name) {
    if (name == "var1") return AblationVariant::Var1;
    if (name == "var2") return AblationVariant::Var2;
    if (name == "var3") return AblationVariant::Var3;
    if (name == "full") return AblationVariant::Full;
    throw Error("ParseError", "unknown ablation variant '" + std::string(name) + "'");
}

double scene_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                      const AblationConfig& ablation) {
    check_evidence_shapes(evidence, model);
    const std::size_t num_scn = model.vocab.num_scenes();
    const std::size_t m_sattr = model.vocab.num_scene_attrs();
    double score = 0.0;
    for (std::size_t j = 0; j < num_scn; ++j) {
        const double pj = evidence.scene_probs[j];
        if (pj == 0.0) continue;
        double inner = 0.0;
        for (std::size_t i = 0; i < m_sattr; ++i) {
            const double info = -log_pdf(model.scene_attr_cond[i][j], evidence.scene_attrs[i]);
            const double rel = ablation.use_reliability ? model.scene_reliability[i] : 1.0;
            const double omg = ablation.use_relevance ? model.scene_relevance[i][j] : 1.0;
            inner += info * rel * omg;
        }
        score += pj * inner;
    }
    return score;
}

double cooccurrence_term(std::span<const double> object_probs,
                         std::span<const double> scene_probs, const TypicalityModel& model) {
    double total = 0.0;
    for (std::size_t j = 0; j < scene_probs.size(); ++j) {
        const double pj = scene_probs[j];
        if (pj == 0.0) continue;
        for (std::size_t c = 0; c < object_probs.size(); ++c) {
            const double pc = object_probs[c];
            if (pc == 0.0) continue;
            total += pj * pc * -std::log(model.object_given_scene[c][j]);
        }
    }
    return total;
}

double location_information(const ObjectEvidence& object, std::size_t category,
                            const TypicalityModel& model) {
    const auto& loc = model.location;
    const auto ratios = cell_ratios(object.bbox, loc.grid_size);
    const auto& cells = loc.cells[category];
    double total = 0.0;
    for (std::size_t cell = 0; cell < ratios.size(); ++cell) {
        const CellModel& cm = cells[cell];
        double info;
        if (ratios[cell] > 0.0) {
            if (cm.has_positive && cm.zero_mass < 1.0) {
                info = -std::log1p(-cm.zero_mass) - log_pdf(cm.positive, ratios[cell]);
            } else {
                info = loc.clamp_max;
            }
        } else {
            info = cm.zero_mass > 0.0 ? -std::log(cm.zero_mass) : loc.clamp_max;
        }
        total += std::min(info, loc.clamp_max);
    }
    return total / static_cast<double>(ratios.size());
}

double size_modulation(double relative_size, std::span<const double> object_probs,
                       const TypicalityModel& model) {
    double total = 0.0;
    for (std::size_t c = 0; c < object_probs.size(); ++c) {
        const double pc = object_probs[c];
        if (pc == 0.0) continue;
        const double density = std::exp(log_pdf(model.size[c], relative_size));
        total += pc * density / modal_density(model.size[c]);
    }
    return std::clamp(total, 0.0, 1.0);
}

double context_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                        const AblationConfig& ablation) {
    check_evidence_shapes(evidence, model);
    double score = 0.0;
    for (const auto& obj : evidence.objects) {
        const double co = cooccurrence_term(obj.object_probs, evidence.scene_probs, model);
        double loc = 0.0;
        if (ablation.use_location) {
            for (std::size_t c = 0; c < obj.object_probs.size(); ++c) {
                if (obj.object_probs[c] == 0.0) continue;
                loc += obj.object_probs[c] * location_information(obj, c, model);
            }
        }
        const double lambda = ablation.use_size_modulation
                                  ? size_modulation(obj.relative_size, obj.object_probs, model)
                                  : 1.0;
        score += lambda * (co + loc);
    }
    return score;
}

double object_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                       const AblationConfig& ablation) {
    check_evidence_shapes(evidence, model);
    const std::size_t n_oattr = model.vocab.num_object_attrs();
    double score = 0.0;
    for (const auto& obj : evidence.objects) {
        for (std::size_t c = 0; c < obj.object_probs.size(); ++c) {
            const double pc = obj.object_probs[c];
            if (pc == 0.0) continue;
            double inner = 0.0;
            for (std::size_t i = 0; i < n_oattr; ++i) {
                const double info = -log_pdf(model.object_attr_cond[i][c], obj.object_attrs[i]);
                const double rel = ablation.use_reliability ? model.object_reliability[i] : 1.0;
                const double omg = ablation.use_relevance ? model.object_relevance[i][c] : 1.0;
                inner += info * rel * omg;
            }
            score += pc * inner;
        }
    }
    return score;
}

SurpriseTriple score_image(const ImageEvidence& evidence, const TypicalityModel& model,
                           const AblationConfig& ablation) {
    return {object_surprise(evidence, model, ablation),
            context_surprise(evidence, model, ablation),
            scene_surprise(evidence, model, ablation)};
}

}  // namespace atypia
