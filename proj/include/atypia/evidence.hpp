#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atypia/calibration.hpp"

namespace atypia {

// Category and attribute channel names. Object and scene attributes are two
// disjoint channel sets; each channel may carry sigmoid calibration
// coefficients applied when evidence ships raw classifier scores.
struct AttributeChannel {
    std::string name;
    std::optional<PlattParams> platt;
};

struct CategoryVocab {
    std::vector<std::string> object_categories;  // V
    std::vector<std::string> scene_categories;   // J
    std::vector<AttributeChannel> object_attributes;  // n
    std::vector<AttributeChannel> scene_attributes;   // m

    std::size_t num_objects() const { return object_categories.size(); }
    std::size_t num_scenes() const { return scene_categories.size(); }
    std::size_t num_object_attrs() const { return object_attributes.size(); }
    std::size_t num_scene_attrs() const { return scene_attributes.size(); }
};

// Axis-aligned box in normalized image coordinates, origin at the top left.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
};

struct ObjectEvidence {
    std::vector<double> object_probs;  // V-simplex from low-level features
    std::vector<double> object_attrs;  // n calibrated probabilities in [0,1]
    BoundingBox bbox;                  // within the unit square
    double relative_size = 0.0;        // box area / image area, in (0,1]
};

struct ImageEvidence {
    std::string image_id;
    std::vector<double> scene_probs;  // J-simplex
    std::vector<double> scene_attrs;  // m calibrated probabilities in [0,1]
    std::vector<ObjectEvidence> objects;  // K >= 0
};

// Ternary attribute annotation: 1 present, 0 absent-as-annotated, -1 not
// annotated (excluded from relevance/reliability denominators).
inline constexpr int kAnnotationMissing = -1;

struct ObjectGroundTruth {
    std::size_t object_label = 0;        // index into vocab.object_categories
    std::vector<int> attr_annotations;   // n entries in {-1, 0, 1}
    // Per-cell fraction of the object's pixels, row-major G x G; when absent
    // the training code falls back to box-rectangle coverage.
    std::optional<std::vector<double>> cell_ratios;
};

struct NormalTrainingRecord {
    ImageEvidence evidence;
    std::size_t scene_label = 0;  // index into vocab.scene_categories
    std::vector<ObjectGroundTruth> object_truth;      // one per evidence object
    std::vector<int> scene_attr_annotations;          // m entries in {-1,0,1}; may be empty
};

// Reasons in the fixed order used by score triples and reports.
enum class Reason : int { Object = 0, Context = 1, Scene = 2 };

inline constexpr int kNumReasons = 3;

std::string_view reason_name(Reason reason);
Reason reason_from_name(std::string_view name);

// Tunables threaded through training, scoring, and the pipeline. Persisted
// inside the model document so scoring always sees the training-time values.
struct EngineConfig {
    int grid_size = 8;                 // G cells per side
    double smoothing_alpha = 0.5;      // add-alpha for P(O|S)
    double entropy_floor = 0.05;       // nats, floor for 1/H relevance
    double clamp_max = 30.0;           // nats, per-cell location cap
    double epsilon_shift = 1e-3;       // added after min-shift of surprise scores
    double decision_threshold = 0.95;  // abnormal iff max normalized score exceeds it
    double holdout_fraction = 0.2;     // reliability hold-out share
    std::uint64_t seed = 0;            // mandatory for any stochastic operation
};

}  // namespace atypia
