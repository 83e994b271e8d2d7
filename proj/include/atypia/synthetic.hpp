#pragma once

#include <cstdint>

#include "atypia/evaluation.hpp"

namespace atypia {

// Parameters of the planted world used for end-to-end validation. Anomaly
// magnitudes of zero make the "abnormal" sets statistically indistinguishable
// from the normal ones.
struct SyntheticSpec {
    // Vocabulary dimensions.
    std::size_t num_object_categories = 6;
    std::size_t num_scene_categories = 4;
    std::size_t num_object_attrs = 8;
    std::size_t num_scene_attrs = 8;
    int grid_size = 8;       // reference grid for location displacement
    int min_objects = 1;     // objects per image, inclusive bounds
    int max_objects = 3;

    // Set sizes.
    std::size_t normal_train = 500;
    std::size_t normal_test = 200;
    std::size_t abnormal_per_reason = 100;

    // Anomaly magnitudes.
    double attribute_displacement_sigma = 3.0;  // in planted channel sigmas
    double cooccurrence_inversion = 1.0;        // probability of an against-the-table category
    double location_displacement_cells = 3.0;   // box center shift in grid cells
};

struct SynthDataset {
    CategoryVocab vocab;
    std::vector<NormalTrainingRecord> train;
    std::vector<ImageEvidence> test;
    std::vector<TestLabel> labels;  // aligned with test
};

// Deterministic per (spec, seed). Training records come with full ground
// truth; test evidence is normals followed by object-, context-, and
// scene-centric anomalies, labeled accordingly.
SynthDataset synth_generate(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace atypia
