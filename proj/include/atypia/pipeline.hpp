#pragma once

#include "atypia/reasoning.hpp"
#include "atypia/typicality.hpp"

namespace atypia {

// Everything the score/reason stages need, shipped as one versioned document.
struct ModelBundle {
    EngineConfig config;
    TypicalityModel typicality;
    ReasoningModel reasoning;
};

// Trains the typicality model, scores the training records under the full
// configuration, and fits the surprise priors on those normal-population
// triples.
ModelBundle train_bundle(const std::vector<NormalTrainingRecord>& records,
                         const CategoryVocab& vocab, const EngineConfig& config);

// Scores a batch and attaches classification and reason labels.
std::vector<ReasonRecord> reason_batch(const std::vector<ImageEvidence>& evidence,
                                       const ModelBundle& bundle,
                                       const AblationConfig& ablation = {});

}  // namespace atypia
