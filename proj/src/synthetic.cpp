#include "atypia/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine);
    }
    double normal(double mean, double sd) {
        return std::normal_distribution<double>(mean, sd)(engine);
    }
    double gamma(double shape) {
        return std::gamma_distribution<double>(shape, 1.0)(engine);
    }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
    }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }

    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform(0.0, total);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u <= 0.0) return i;
        }
        return weights.size() - 1;
    }
};

// One attribute classifier channel: base noise plus a junk rate, the fraction
// of responses that come out as uninformative uniform draws.
struct Channel {
    double sigma = 0.05;
    double junk_rate = 0.0;
};

// Per (channel, category) cell of the planted response model.
enum class CellKind {
    Applies,  // attribute present: responses near mu_hi
    Absent,   // attribute reliably absent: responses near mu_lo
    Junk,     // concept inapplicable: the classifier emits noise
};

struct AttrCell {
    CellKind kind = CellKind::Junk;
    double mu_hi = 0.7;
    double mu_lo = 0.3;
};

struct PlantedWorld {
    std::vector<double> scene_prior;
    std::vector<std::vector<double>> object_given_scene;  // [category][scene]
    std::vector<Channel> scene_channels;
    std::vector<Channel> object_channels;
    std::vector<std::vector<AttrCell>> scene_cells;   // [attr][scene]
    std::vector<std::vector<AttrCell>> object_cells;  // [attr][category]
    std::vector<double> home_x, home_y;  // typical box center per category
    std::vector<double> base_w, base_h;  // typical box dimensions per category
};

std::vector<Channel> plant_channels(Rng& rng, std::size_t count) {
    std::vector<Channel> channels(count);
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng.engine);
    const std::size_t bad = std::max<std::size_t>(1, count / 4);
    for (std::size_t i = 0; i < count; ++i) {
        if (i < bad) {
            channels[order[i]] = {rng.uniform(0.05, 0.09), rng.uniform(0.6, 0.8)};
        } else {
            channels[order[i]] = {rng.uniform(0.04, 0.08), 0.0};
        }
    }
    return channels;
}

// Scene cells mix all three kinds; object cells are either present or junk so
// annotation-derived relevance masks exactly the noisy cells.
std::vector<std::vector<AttrCell>> plant_cells(Rng& rng, std::size_t attrs,
                                               std::size_t categories, bool with_absent) {
    std::vector<std::vector<AttrCell>> cells(attrs, std::vector<AttrCell>(categories));
    for (auto& row : cells) {
        for (auto& cell : row) {
            if (rng.chance(0.3)) {
                cell.kind = CellKind::Junk;
            } else if (with_absent && rng.chance(0.5)) {
                cell.kind = CellKind::Absent;
            } else {
                cell.kind = CellKind::Applies;
            }
            cell.mu_hi = rng.uniform(0.6, 0.85);
            cell.mu_lo = rng.uniform(0.15, 0.4);
        }
    }
    // Every attribute is present somewhere and noise somewhere.
    for (auto& row : cells) {
        row.front().kind = CellKind::Applies;
        row.back().kind = CellKind::Junk;
    }
    // And every category keeps at least three informative cells, so anomalies
    // that perturb informative responses always have somewhere to show up.
    for (std::size_t c = 0; c < categories; ++c) {
        std::size_t informative = 0;
        for (const auto& row : cells) {
            if (row[c].kind != CellKind::Junk) ++informative;
        }
        for (std::size_t i = 0; informative < 3 && i < attrs; ++i) {
            if (cells[i][c].kind == CellKind::Junk) {
                cells[i][c].kind = CellKind::Applies;
                ++informative;
            }
        }
    }
    return cells;
}

PlantedWorld plant_world(Rng& rng, const SyntheticSpec& spec) {
    PlantedWorld world;
    const std::size_t num_obj = spec.num_object_categories;
    const std::size_t num_scn = spec.num_scene_categories;

    world.scene_prior.resize(num_scn);
    for (auto& p : world.scene_prior) p = rng.gamma(5.0);
    double total = 0.0;
    for (double p : world.scene_prior) total += p;
    for (auto& p : world.scene_prior) p /= total;

    // Sparse columns: each scene strongly prefers one or two categories.
    world.object_given_scene.assign(num_obj, std::vector<double>(num_scn, 0.0));
    for (std::size_t j = 0; j < num_scn; ++j) {
        std::vector<double> column(num_obj);
        double sum = 0.0;
        for (auto& w : column) {
            w = rng.gamma(0.15);
            sum += w;
        }
        for (std::size_t c = 0; c < num_obj; ++c) {
            world.object_given_scene[c][j] =
                0.99 * column[c] / sum + 0.01 / static_cast<double>(num_obj);
        }
    }

    world.scene_channels = plant_channels(rng, spec.num_scene_attrs);
    world.object_channels = plant_channels(rng, spec.num_object_attrs);
    world.scene_cells = plant_cells(rng, spec.num_scene_attrs, num_scn, true);
    world.object_cells = plant_cells(rng, spec.num_object_attrs, num_obj, false);

    world.home_x.resize(num_obj);
    world.home_y.resize(num_obj);
    world.base_w.resize(num_obj);
    world.base_h.resize(num_obj);
    for (std::size_t c = 0; c < num_obj; ++c) {
        world.home_x[c] = rng.uniform(0.25, 0.75);
        world.home_y[c] = rng.uniform(0.25, 0.75);
        world.base_w[c] = rng.uniform(0.15, 0.30);
        world.base_h[c] = rng.uniform(0.15, 0.30);
    }
    return world;
}

double clamp_unit(double v) { return std::clamp(v, 0.001, 0.999); }

// Category drawn against the grain of the co-occurrence column: uniform over
// the least likely third of the categories for the scene.
std::size_t inverted_category(Rng& rng, const std::vector<double>& column) {
    std::vector<std::size_t> order(column.size());
    for (std::size_t c = 0; c < column.size(); ++c) order[c] = c;
    std::sort(order.begin(), order.end(),
              [&column](std::size_t a, std::size_t b) { return column[a] < column[b]; });
    return order[rng.index(std::max<std::size_t>(1, column.size() / 3))];
}

// Simplex concentrated on one index; the remainder spreads over the rest.
std::vector<double> concentrated_simplex(Rng& rng, std::size_t size, std::size_t peak) {
    std::vector<double> out(size, 0.0);
    if (size == 1) {
        out[0] = 1.0;
        return out;
    }
    const double mass = rng.uniform(0.93, 0.96);
    out[peak] = mass;
    double rest = 0.0;
    std::vector<double> raw(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
        if (i == peak) continue;
        raw[i] = rng.uniform(0.2, 1.0);
        rest += raw[i];
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (i == peak) continue;
        out[i] = (1.0 - mass) * raw[i] / rest;
    }
    return out;
}

double attr_response(Rng& rng, const Channel& channel, const AttrCell& cell) {
    if (cell.kind == CellKind::Junk || rng.chance(channel.junk_rate)) {
        return rng.uniform(0.01, 0.99);
    }
    const double mu = cell.kind == CellKind::Applies ? cell.mu_hi : cell.mu_lo;
    return clamp_unit(rng.normal(mu, channel.sigma));
}

// Annotation ground truth for a cell: junk concepts stay unannotated.
int cell_annotation(const AttrCell& cell, bool object_side) {
    switch (cell.kind) {
        case CellKind::Applies: return 1;
        case CellKind::Absent: return 0;
        case CellKind::Junk: return object_side ? 0 : kAnnotationMissing;
    }
    return kAnnotationMissing;
}

BoundingBox place_box(Rng& rng, const PlantedWorld& world, std::size_t category,
                      bool shrink) {
    double w = world.base_w[category] * (1.0 + rng.uniform(-0.08, 0.08));
    double h = world.base_h[category] * (1.0 + rng.uniform(-0.08, 0.08));
    // Shrunken rather than oversized: big boxes would teach the location model
    // that far-away cells are ordinary.
    if (shrink) {
        const double factor = rng.uniform(0.25, 0.45);
        w *= factor;
        h *= factor;
    }
    double cx = world.home_x[category] + rng.normal(0.0, 0.02);
    double cy = world.home_y[category] + rng.normal(0.0, 0.02);
    cx = std::clamp(cx, w / 2.0, 1.0 - w / 2.0);
    cy = std::clamp(cy, h / 2.0, 1.0 - h / 2.0);
    return {cx - w / 2.0, cy - h / 2.0, w, h};
}

struct DrawnObject {
    ObjectEvidence evidence;
    ObjectGroundTruth truth;
    bool clutter = false;
};

DrawnObject draw_object(Rng& rng, const PlantedWorld& world, const SyntheticSpec& spec,
                        std::size_t category, bool clutter = false) {
    DrawnObject out;
    out.clutter = clutter;
    out.truth.object_label = category;
    out.evidence.object_probs =
        concentrated_simplex(rng, spec.num_object_categories, category);
    out.evidence.bbox = place_box(rng, world, category, clutter);
    out.evidence.relative_size = out.evidence.bbox.area();
    out.evidence.object_attrs.resize(spec.num_object_attrs);
    out.truth.attr_annotations.resize(spec.num_object_attrs);
    for (std::size_t i = 0; i < spec.num_object_attrs; ++i) {
        const AttrCell& cell = world.object_cells[i][category];
        out.evidence.object_attrs[i] = attr_response(rng, world.object_channels[i], cell);
        out.truth.attr_annotations[i] =
            rng.chance(0.1) ? kAnnotationMissing : cell_annotation(cell, true);
    }
    return out;
}

NormalTrainingRecord draw_image(Rng& rng, const PlantedWorld& world, const SyntheticSpec& spec,
                                std::size_t scene, std::size_t num_objects,
                                bool allow_clutter = true) {
    NormalTrainingRecord record;
    record.scene_label = scene;
    record.evidence.scene_probs =
        concentrated_simplex(rng, spec.num_scene_categories, scene);
    record.evidence.scene_attrs.resize(spec.num_scene_attrs);
    record.scene_attr_annotations.resize(spec.num_scene_attrs);
    for (std::size_t i = 0; i < spec.num_scene_attrs; ++i) {
        const AttrCell& cell = world.scene_cells[i][scene];
        record.evidence.scene_attrs[i] = attr_response(rng, world.scene_channels[i], cell);
        record.scene_attr_annotations[i] =
            rng.chance(0.1) ? kAnnotationMissing : cell_annotation(cell, false);
    }
    std::vector<double> column(spec.num_object_categories);
    for (std::size_t c = 0; c < spec.num_object_categories; ++c) {
        column[c] = world.object_given_scene[c][scene];
    }
    // A slice of images carries one piece of incidental clutter: a tiny object
    // of a category foreign to the scene. Its co-occurrence term is noise that
    // only the size modulation can tell apart from a genuine context anomaly.
    // Clutter never stands alone, so it cannot zero out a whole image.
    bool clutter_used = false;
    for (std::size_t k = 0; k < num_objects; ++k) {
        const bool clutter = allow_clutter && k > 0 && !clutter_used && rng.chance(0.1);
        clutter_used = clutter_used || clutter;
        const std::size_t category =
            clutter ? inverted_category(rng, column) : rng.categorical(column);
        DrawnObject obj = draw_object(rng, world, spec, category, clutter);
        record.evidence.objects.push_back(std::move(obj.evidence));
        record.object_truth.push_back(std::move(obj.truth));
    }
    return record;
}

std::size_t objects_per_image(Rng& rng, const SyntheticSpec& spec) {
    const int lo = spec.min_objects;
    const int hi = std::max(spec.max_objects, lo);
    return static_cast<std::size_t>(lo) + rng.index(static_cast<std::size_t>(hi - lo + 1));
}

void displace_attrs(Rng& rng, std::vector<double>& attrs,
                    const std::vector<Channel>& channels,
                    const std::vector<std::vector<AttrCell>>& cells, std::size_t category,
                    double sigmas) {
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (cells[i][category].kind == CellKind::Junk) continue;
        const double sign = rng.chance(0.5) ? 1.0 : -1.0;
        attrs[i] = clamp_unit(attrs[i] + sign * sigmas * channels[i].sigma);
    }
}

}  // namespace

SynthDataset synth_generate(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.num_object_categories < 2 || spec.num_scene_categories < 1 ||
        spec.num_object_attrs < 1 || spec.num_scene_attrs < 1 || spec.min_objects < 1 ||
        spec.grid_size < 1) {
        throw Error("ParseError", "synthetic spec out of range");
    }
    Rng rng(seed);
    const PlantedWorld world = plant_world(rng, spec);

    SynthDataset data;
    data.vocab.object_categories.resize(spec.num_object_categories);
    for (std::size_t c = 0; c < spec.num_object_categories; ++c) {
        data.vocab.object_categories[c] = "object_" + std::to_string(c);
    }
    data.vocab.scene_categories.resize(spec.num_scene_categories);
    for (std::size_t j = 0; j < spec.num_scene_categories; ++j) {
        data.vocab.scene_categories[j] = "scene_" + std::to_string(j);
    }
    data.vocab.object_attributes.resize(spec.num_object_attrs);
    for (std::size_t i = 0; i < spec.num_object_attrs; ++i) {
        data.vocab.object_attributes[i].name = "oattr_" + std::to_string(i);
    }
    data.vocab.scene_attributes.resize(spec.num_scene_attrs);
    for (std::size_t i = 0; i < spec.num_scene_attrs; ++i) {
        data.vocab.scene_attributes[i].name = "sattr_" + std::to_string(i);
    }

    char id_buf[32];

    // Training records. The first few images cycle scene labels, and a slice
    // of them injects one object per category in rotation so every category
    // has enough instances for stable conditional and size fits.
    for (std::size_t i = 0; i < spec.normal_train; ++i) {
        const std::size_t scene = i < 2 * spec.num_scene_categories
                                      ? i % spec.num_scene_categories
                                      : rng.categorical(world.scene_prior);
        NormalTrainingRecord record =
            draw_image(rng, world, spec, scene, objects_per_image(rng, spec));
        if (i < 12 * spec.num_object_categories) {
            DrawnObject forced =
                draw_object(rng, world, spec, i % spec.num_object_categories);
            record.evidence.objects.push_back(std::move(forced.evidence));
            record.object_truth.push_back(std::move(forced.truth));
        }
        std::snprintf(id_buf, sizeof(id_buf), "train_%05zu", i);
        record.evidence.image_id = id_buf;
        data.train.push_back(std::move(record));
    }

    auto push_test = [&data](ImageEvidence evidence, TestLabel label) {
        label.image_id = evidence.image_id;
        data.test.push_back(std::move(evidence));
        data.labels.push_back(std::move(label));
    };

    for (std::size_t i = 0; i < spec.normal_test; ++i) {
        NormalTrainingRecord record = draw_image(
            rng, world, spec, rng.categorical(world.scene_prior), objects_per_image(rng, spec));
        std::snprintf(id_buf, sizeof(id_buf), "normal_%05zu", i);
        record.evidence.image_id = id_buf;
        push_test(std::move(record.evidence), TestLabel{"", false, std::nullopt, std::nullopt});
    }

    // Object-centric anomalies: the distinguishing attributes of each object
    // are displaced away from their planted means.
    for (std::size_t i = 0; i < spec.abnormal_per_reason; ++i) {
        NormalTrainingRecord record = draw_image(
            rng, world, spec, rng.categorical(world.scene_prior), objects_per_image(rng, spec));
        for (std::size_t k = 0; k < record.evidence.objects.size(); ++k) {
            displace_attrs(rng, record.evidence.objects[k].object_attrs, world.object_channels,
                           world.object_cells, record.object_truth[k].object_label,
                           spec.attribute_displacement_sigma);
        }
        std::snprintf(id_buf, sizeof(id_buf), "obj_%05zu", i);
        record.evidence.image_id = id_buf;
        push_test(std::move(record.evidence),
                  TestLabel{"", true, Reason::Object,
                            std::array<double, kNumReasons>{1.0, 0.0, 0.0}});
    }

    // Context-centric anomalies: categories resampled against the
    // co-occurrence table, or boxes displaced off their home cells.
    for (std::size_t i = 0; i < spec.abnormal_per_reason; ++i) {
        const std::size_t scene = rng.categorical(world.scene_prior);
        // Typically sized objects only: a size outlier would modulate the
        // planted contextual anomaly away.
        NormalTrainingRecord record =
            draw_image(rng, world, spec, scene, objects_per_image(rng, spec), false);
        const bool can_swap = spec.cooccurrence_inversion > 0.0;
        const bool can_displace = spec.location_displacement_cells > 0.0;
        const bool swap = can_swap && (!can_displace || rng.chance(0.5));
        if (swap) {
            std::vector<double> column(spec.num_object_categories);
            for (std::size_t c = 0; c < spec.num_object_categories; ++c) {
                column[c] = world.object_given_scene[c][scene];
            }
            for (std::size_t k = 0; k < record.evidence.objects.size(); ++k) {
                if (!rng.chance(spec.cooccurrence_inversion)) continue;
                DrawnObject replacement =
                    draw_object(rng, world, spec, inverted_category(rng, column));
                record.evidence.objects[k] = std::move(replacement.evidence);
                record.object_truth[k] = std::move(replacement.truth);
            }
        } else if (can_displace) {
            const double shift =
                spec.location_displacement_cells / static_cast<double>(spec.grid_size);
            for (auto& obj : record.evidence.objects) {
                const double angle = rng.uniform(0.0, 2.0 * kPi);
                double cx = obj.bbox.x + obj.bbox.w / 2.0 + shift * std::cos(angle);
                double cy = obj.bbox.y + obj.bbox.h / 2.0 + shift * std::sin(angle);
                cx = std::clamp(cx, obj.bbox.w / 2.0, 1.0 - obj.bbox.w / 2.0);
                cy = std::clamp(cy, obj.bbox.h / 2.0, 1.0 - obj.bbox.h / 2.0);
                obj.bbox.x = cx - obj.bbox.w / 2.0;
                obj.bbox.y = cy - obj.bbox.h / 2.0;
            }
        }
        std::snprintf(id_buf, sizeof(id_buf), "ctx_%05zu", i);
        record.evidence.image_id = id_buf;
        push_test(std::move(record.evidence),
                  TestLabel{"", true, Reason::Context,
                            std::array<double, kNumReasons>{0.0, 1.0, 0.0}});
    }

    // Scene-centric anomalies: scene attribute responses displaced.
    for (std::size_t i = 0; i < spec.abnormal_per_reason; ++i) {
        const std::size_t scene = rng.categorical(world.scene_prior);
        NormalTrainingRecord record =
            draw_image(rng, world, spec, scene, objects_per_image(rng, spec));
        displace_attrs(rng, record.evidence.scene_attrs, world.scene_channels, world.scene_cells,
                       scene, spec.attribute_displacement_sigma);
        std::snprintf(id_buf, sizeof(id_buf), "scn_%05zu", i);
        record.evidence.image_id = id_buf;
        push_test(std::move(record.evidence),
                  TestLabel{"", true, Reason::Scene,
                            std::array<double, kNumReasons>{0.0, 0.0, 1.0}});
    }

    return data;
}

}  // namespace atypia
