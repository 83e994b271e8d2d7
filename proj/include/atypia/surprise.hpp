#pragma once

#include <span>

#include "atypia/typicality.hpp"

namespace atypia {

// Raw surprise scores in nats, one per abnormality reason. The values are
// expectations of -log density terms and may be negative; positivity for CDF
// normalization is handled by the reasoning module's shift.
struct SurpriseTriple {
    double object = 0.0;
    double context = 0.0;
    double scene = 0.0;

    double operator[](Reason r) const {
        switch (r) {
            case Reason::Object: return object;
            case Reason::Context: return context;
            case Reason::Scene: return scene;
        }
        return 0.0;
    }
};

// Scoring-term toggles. Disabled multiplicative factors are replaced with one,
// disabled additive terms with zero.
struct AblationConfig {
    bool use_relevance = true;
    bool use_reliability = true;
    bool use_location = true;
    bool use_size_modulation = true;
};

enum class AblationVariant { Var1, Var2, Var3, Full };

// Preset flag combinations matching the standard ablation columns:
//   var1  bare information terms only
//   var2  reliability / size modulation on, relevance / location off
//   var3  relevance / location on, reliability / size modulation off
//   full  everything on
AblationConfig ablation_config(AblationVariant variant);
std::string_view ablation_name(AblationVariant variant);
AblationVariant ablation_from_name(std::string_view name);

// Expectation over scenes of the reliability- and relevance-weighted
// information content of scene-attribute responses.
double scene_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                      const AblationConfig& ablation = {});

// Co-occurrence information: sum over scenes and categories of
// P(S_j) P(O=c) (-log P(O=c | S_j)).
double cooccurrence_term(std::span<const double> object_probs,
                         std::span<const double> scene_probs, const TypicalityModel& model);

// Mean over grid cells of the clamped -log probability of the box's per-cell
// coverage under the category's zero-inflated cell models.
double location_information(const ObjectEvidence& object, std::size_t category,
                            const TypicalityModel& model);

// Bounded size factor: expectation over categories of the relative-size Gamma
// density normalized by its modal value.
double size_modulation(double relative_size, std::span<const double> object_probs,
                       const TypicalityModel& model);

// Per-object sum of the size-modulated co-occurrence and location terms.
double context_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                        const AblationConfig& ablation = {});

// Expectation over each object's category simplex of the weighted
// attribute-information sum, added up over objects.
double object_surprise(const ImageEvidence& evidence, const TypicalityModel& model,
                       const AblationConfig& ablation = {});

SurpriseTriple score_image(const ImageEvidence& evidence, const TypicalityModel& model,
                           const AblationConfig& ablation = {});

}  // namespace atypia
