#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "atypia/evaluation.hpp"
#include "atypia/pipeline.hpp"
#include "atypia/synthetic.hpp"
#include "atypia/taxonomy.hpp"

namespace atypia {

inline constexpr std::string_view kModelSchemaVersion = "1.0.0";

// One raw score line: {image_id, surprise_object, surprise_context, surprise_scene}.
struct ScoreRecord {
    std::string image_id;
    SurpriseTriple surprise;
};

// --- model document -------------------------------------------------------
// A single versioned JSON document holding config, vocabulary, typicality
// model, and reasoning model. Numeric fields round-trip exactly.
std::string serialize_model(const ModelBundle& bundle);
ModelBundle deserialize_model(const std::string& text);
void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

// --- vocabulary -----------------------------------------------------------
CategoryVocab parse_vocab(std::istream& in);
void write_vocab(std::ostream& out, const CategoryVocab& vocab);

// --- evidence and training records (one JSON object per line) --------------
// Channels shipping raw classifier scores are calibrated on ingestion when the
// vocabulary carries sigmoid coefficients for them. Simplices within 1e-6 of
// summing to one are renormalized; anything further off is rejected.
std::vector<ImageEvidence> parse_evidence(std::istream& in, const CategoryVocab& vocab);
std::vector<NormalTrainingRecord> parse_training_records(std::istream& in,
                                                         const CategoryVocab& vocab);
void write_evidence(std::ostream& out, std::span<const ImageEvidence> images);
void write_training_records(std::ostream& out, std::span<const NormalTrainingRecord> records);

// --- score, reason, and label records --------------------------------------
void write_score_records(std::ostream& out, std::span<const ScoreRecord> records);
std::vector<ScoreRecord> parse_score_records(std::istream& in);

void write_reason_records(std::ostream& out, std::span<const ReasonRecord> records);
std::vector<ReasonRecord> parse_reason_records(std::istream& in);

void write_labels(std::ostream& out, std::span<const TestLabel> labels);
std::vector<TestLabel> parse_labels(std::istream& in);

// --- taxonomy -------------------------------------------------------------
// Delimited table, header "image_id" plus one column per reason; tab or comma
// separated.
AnnotationMatrix parse_annotation_matrix(std::istream& in);
void write_dendrogram(std::ostream& out, const Dendrogram& dendrogram);
void write_taxonomy_groups(std::ostream& out, const AnnotationMatrix& matrix,
                           const std::vector<int>& image_clusters,
                           const std::vector<int>& reason_groups);

// --- evaluation reports -----------------------------------------------------
void write_eval_report(std::ostream& out, const EvalReport& report,
                       const AblationTable* ablation = nullptr);
void write_eval_summary(std::ostream& out, const EvalReport& report,
                        const AblationTable* ablation = nullptr);

// --- configuration ----------------------------------------------------------
// Missing fields keep the values already present in `base`.
EngineConfig parse_config(std::istream& in, EngineConfig base = {});
SyntheticSpec parse_synth_spec(std::istream& in, SyntheticSpec base = {});

}  // namespace atypia
