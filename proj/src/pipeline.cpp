#include "atypia/pipeline.hpp"

namespace atypia {

ModelBundle train_bundle(const std::vector<NormalTrainingRecord>& records,
                         const CategoryVocab& vocab, const EngineConfig& config) {
    ModelBundle bundle;
    bundle.config = config;
    bundle.typicality = train(records, vocab, config);
    std::vector<SurpriseTriple> triples;
    triples.reserve(records.size());
    for (const auto& record : records) {
        triples.push_back(score_image(record.evidence, bundle.typicality));
    }
    bundle.reasoning = fit_surprise_priors(triples, config);
    return bundle;
}

std::vector<ReasonRecord> reason_batch(const std::vector<ImageEvidence>& evidence,
                                       const ModelBundle& bundle,
                                       const AblationConfig& ablation) {
    std::vector<ReasonRecord> out;
    out.reserve(evidence.size());
    for (const auto& ev : evidence) {
        ReasonRecord record;
        record.image_id = ev.image_id;
        record.raw = score_image(ev, bundle.typicality, ablation);
        record.normalized = normalized_scores(record.raw, bundle.reasoning);
        const Classification cls = classify_abnormality(record.raw, bundle.reasoning);
        record.final_score = cls.final_score;
        record.abnormal = cls.abnormal;
        record.reason = reason_argmax(record.normalized);
        out.push_back(std::move(record));
    }
    return out;
}

}  // namespace atypia
