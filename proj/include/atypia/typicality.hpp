#pragma once

#include <span>
#include <vector>

#include "atypia/distributions.hpp"
#include "atypia/evidence.hpp"

namespace atypia {

// Zero-inflated exponential over per-cell object pixel ratios: a point mass at
// ratio zero plus an exponential density on the positives. Cells that never saw
// a positive ratio keep has_positive = false and contribute the clamp value.
struct CellModel {
    double zero_mass = 1.0;  // pi0
    ExponentialParams positive{1.0};
    bool has_positive = false;
};

struct LocationModel {
    int grid_size = 8;        // G, cells per side
    double clamp_max = 30.0;  // nats, cap for -log p of a single cell
    // cells[category][row * G + col]
    std::vector<std::vector<CellModel>> cells;
};

// Everything learned from normal images: attribute conditionals, the
// object-given-scene table, relevance and reliability weights, per-cell
// location models, relative-size models, and the scene prior.
struct TypicalityModel {
    CategoryVocab vocab;
    // Gaussian conditionals, indexed [attribute][category].
    std::vector<std::vector<GaussianParams>> object_attr_cond;  // n x V
    std::vector<std::vector<GaussianParams>> scene_attr_cond;   // m x J
    // P(O = k | S = j), column j sums to one; indexed [k][j].
    std::vector<std::vector<double>> object_given_scene;  // V x J
    std::vector<std::vector<double>> scene_relevance;     // m x J, >= 0
    std::vector<std::vector<double>> object_relevance;    // n x V, in [0,1]
    std::vector<double> scene_reliability;  // m, in [0,1]
    std::vector<double> object_reliability; // n, in [0,1]
    LocationModel location;
    std::vector<GammaParams> size;   // V relative-size models
    std::vector<double> scene_prior; // J-simplex
};

// Per-cell coverage of a box rectangle on a G x G grid, row-major from the top
// left; each entry is the fraction of that cell the box covers.
std::vector<double> cell_ratios(const BoundingBox& bbox, int grid_size);

// Relevance of a scene attribute for a scene category: reciprocal conditional
// entropy, floored so near-deterministic conditionals stay finite.
double scene_attr_relevance(const GaussianParams& conditional, double entropy_floor);

// Fraction of annotated records marked positive; entries of -1 are excluded
// from the denominator, and an all-missing column yields zero.
double object_attr_relevance(std::span<const int> annotations);

// Balanced accuracy of thresholding calibrated responses at 0.5 against binary
// ground truth; 0.5 when only one class is present.
double attribute_reliability(std::span<const double> responses, std::span<const int> truth);

// Deterministic hold-out membership by FNV-1a hash of the record id.
bool in_reliability_holdout(const std::string& record_id, double holdout_fraction);

// Batch training on normal-only records. Requires at least two object
// instances per object category and at least one record per scene category.
TypicalityModel train(const std::vector<NormalTrainingRecord>& records,
                      const CategoryVocab& vocab, const EngineConfig& config);

}  // namespace atypia
