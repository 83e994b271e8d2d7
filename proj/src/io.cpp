#include "atypia/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "atypia/errors.hpp"

namespace atypia {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error("ParseError", "line " + std::to_string(line) + ": " + what);
}

// --- distribution records ---------------------------------------------------

Json dist_to_json(const DistParams& params) {
    Json j;
    j["family"] = std::string(family_name(family_of(params)));
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianParams>) {
                j["params"] = {p.mean, p.variance};
            } else if constexpr (std::is_same_v<T, ExponentialParams>) {
                j["params"] = {p.rate};
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                j["params"] = {p.shape, p.scale};
            } else {
                j["params"] = {p.mean, p.shape};
            }
        },
        params);
    return j;
}

DistParams dist_from_json(const Json& j) {
    const Family family = family_from_name(j.at("family").get<std::string>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != static_cast<std::size_t>(param_count(family))) {
        throw Error("CorruptDocument", "distribution parameter count mismatch",
                    ErrorCategory::Model);
    }
    switch (family) {
        case Family::Gaussian: return GaussianParams{params[0], params[1]};
        case Family::Exponential: return ExponentialParams{params[0]};
        case Family::Gamma: return GammaParams{params[0], params[1]};
        case Family::InverseGaussian: return InverseGaussianParams{params[0], params[1]};
    }
    throw Error("CorruptDocument", "bad family tag", ErrorCategory::Model);
}

Json gaussian_to_json(const GaussianParams& p) { return dist_to_json(DistParams{p}); }

GaussianParams gaussian_from_json(const Json& j) {
    return std::get<GaussianParams>(dist_from_json(j));
}

Json aic_table_to_json(const std::vector<AicEntry>& table) {
    Json arr = Json::array();
    for (const auto& entry : table) {
        Json e;
        e["family"] = std::string(family_name(entry.family));
        e["applicable"] = entry.applicable;
        if (entry.applicable) {
            e["aic"] = entry.aic;
        } else {
            e["note"] = entry.note;
        }
        arr.push_back(std::move(e));
    }
    return arr;
}

std::vector<AicEntry> aic_table_from_json(const Json& arr) {
    std::vector<AicEntry> table;
    for (const auto& e : arr) {
        AicEntry entry;
        entry.family = family_from_name(e.at("family").get<std::string>());
        entry.applicable = e.at("applicable").get<bool>();
        if (entry.applicable) entry.aic = e.at("aic").get<double>();
        if (e.contains("note")) entry.note = e.at("note").get<std::string>();
        table.push_back(std::move(entry));
    }
    return table;
}

// --- vocabulary -------------------------------------------------------------

Json channels_to_json(const std::vector<AttributeChannel>& channels) {
    Json arr = Json::array();
    for (const auto& channel : channels) {
        Json c;
        c["name"] = channel.name;
        if (channel.platt) {
            c["platt"] = {{"slope", channel.platt->slope},
                          {"intercept", channel.platt->intercept}};
        }
        arr.push_back(std::move(c));
    }
    return arr;
}

std::vector<AttributeChannel> channels_from_json(const Json& arr) {
    std::vector<AttributeChannel> channels;
    for (const auto& c : arr) {
        AttributeChannel channel;
        if (c.is_string()) {
            channel.name = c.get<std::string>();
        } else {
            channel.name = c.at("name").get<std::string>();
            if (c.contains("platt")) {
                channel.platt = PlattParams{c.at("platt").at("slope").get<double>(),
                                            c.at("platt").at("intercept").get<double>()};
            }
        }
        channels.push_back(std::move(channel));
    }
    return channels;
}

Json vocab_to_json(const CategoryVocab& vocab) {
    Json j;
    j["object_categories"] = vocab.object_categories;
    j["scene_categories"] = vocab.scene_categories;
    j["object_attributes"] = channels_to_json(vocab.object_attributes);
    j["scene_attributes"] = channels_to_json(vocab.scene_attributes);
    return j;
}

CategoryVocab vocab_from_json(const Json& j) {
    CategoryVocab vocab;
    vocab.object_categories = j.at("object_categories").get<std::vector<std::string>>();
    vocab.scene_categories = j.at("scene_categories").get<std::vector<std::string>>();
    vocab.object_attributes = channels_from_json(j.at("object_attributes"));
    vocab.scene_attributes = channels_from_json(j.at("scene_attributes"));
    if (vocab.object_categories.empty() || vocab.scene_categories.empty() ||
        vocab.object_attributes.empty() || vocab.scene_attributes.empty()) {
        throw Error("VocabMismatch", "vocabulary lists must be non-empty");
    }
    return vocab;
}

// --- evidence ---------------------------------------------------------------

// Validates and renormalizes a probability simplex in place.
void ingest_simplex(std::vector<double>& probs, std::size_t expected, std::size_t line,
                    const char* field) {
    if (probs.size() != expected) {
        throw Error("VocabMismatch", "line " + std::to_string(line) + ": " + field + " has " +
                                         std::to_string(probs.size()) + " entries, expected " +
                                         std::to_string(expected));
    }
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) {
            throw Error("SimplexViolation",
                        "line " + std::to_string(line) + ": " + field + " has a negative entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw Error("SimplexViolation", "line " + std::to_string(line) + ": " + field +
                                            " sums to " + std::to_string(sum));
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        for (double& p : probs) p /= sum;
    }
}

void ingest_unit_interval(std::vector<double>& values, std::size_t expected, std::size_t line,
                          const char* field) {
    if (values.size() != expected) {
        throw Error("VocabMismatch", "line " + std::to_string(line) + ": " + field + " has " +
                                         std::to_string(values.size()) + " entries, expected " +
                                         std::to_string(expected));
    }
    for (double& v : values) {
        if (v < -1e-9 || v > 1.0 + 1e-9) {
            parse_fail(line, std::string(field) + " entry " + std::to_string(v) +
                                 " outside [0,1]");
        }
        v = std::clamp(v, 0.0, 1.0);
    }
}

// Reads either calibrated probabilities or raw scores for one channel set.
std::vector<double> ingest_attrs(const Json& j, const char* attr_field, const char* score_field,
                                 const std::vector<AttributeChannel>& channels,
                                 std::size_t line) {
    const bool has_attrs = j.contains(attr_field);
    const bool has_scores = j.contains(score_field);
    if (has_attrs == has_scores) {
        parse_fail(line, std::string("exactly one of ") + attr_field + " / " + score_field +
                             " must be present");
    }
    if (has_attrs) {
        auto values = j.at(attr_field).get<std::vector<double>>();
        ingest_unit_interval(values, channels.size(), line, attr_field);
        return values;
    }
    auto scores = j.at(score_field).get<std::vector<double>>();
    if (scores.size() != channels.size()) {
        throw Error("VocabMismatch",
                    "line " + std::to_string(line) + ": " + score_field + " length mismatch");
    }
    std::vector<double> values(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!channels[i].platt) {
            parse_fail(line, "raw scores for channel '" + channels[i].name +
                                 "' but the vocabulary has no calibration for it");
        }
        values[i] = apply_platt(*channels[i].platt, scores[i]);
    }
    return values;
}

std::vector<int> ingest_annotations(const Json& j, const char* field, std::size_t expected,
                                    std::size_t line) {
    auto values = j.at(field).get<std::vector<int>>();
    if (values.size() != expected) {
        throw Error("VocabMismatch",
                    "line " + std::to_string(line) + ": " + field + " length mismatch");
    }
    for (int v : values) {
        if (v < -1 || v > 1) parse_fail(line, std::string(field) + " entries must be -1, 0, or 1");
    }
    return values;
}

ObjectEvidence object_from_json(const Json& j, const CategoryVocab& vocab, std::size_t line) {
    ObjectEvidence obj;
    obj.object_probs = j.at("object_probs").get<std::vector<double>>();
    ingest_simplex(obj.object_probs, vocab.num_objects(), line, "object_probs");
    obj.object_attrs =
        ingest_attrs(j, "object_attrs", "object_attr_scores", vocab.object_attributes, line);

    const auto box = j.at("bbox").get<std::vector<double>>();
    if (box.size() != 4) parse_fail(line, "bbox must be [x, y, w, h]");
    obj.bbox = {box[0], box[1], box[2], box[3]};
    if (obj.bbox.x < -1e-9 || obj.bbox.y < -1e-9 || obj.bbox.w < 0.0 || obj.bbox.h < 0.0 ||
        obj.bbox.x + obj.bbox.w > 1.0 + 1e-9 || obj.bbox.y + obj.bbox.h > 1.0 + 1e-9) {
        parse_fail(line, "bbox outside the unit square");
    }
    if (j.contains("relative_size")) {
        obj.relative_size = j.at("relative_size").get<double>();
        if (std::abs(obj.relative_size - obj.bbox.area()) > 1e-6) {
            parse_fail(line, "relative_size inconsistent with bbox area");
        }
    } else {
        obj.relative_size = obj.bbox.area();
    }
    return obj;
}

ImageEvidence evidence_from_json(const Json& j, const CategoryVocab& vocab, std::size_t line) {
    ImageEvidence ev;
    ev.image_id = j.at("image_id").get<std::string>();
    ev.scene_probs = j.at("scene_probs").get<std::vector<double>>();
    ingest_simplex(ev.scene_probs, vocab.num_scenes(), line, "scene_probs");
    ev.scene_attrs =
        ingest_attrs(j, "scene_attrs", "scene_attr_scores", vocab.scene_attributes, line);
    if (j.contains("objects")) {
        for (const auto& obj : j.at("objects")) {
            ev.objects.push_back(object_from_json(obj, vocab, line));
        }
    }
    return ev;
}

NormalTrainingRecord training_record_from_json(const Json& j, const CategoryVocab& vocab,
                                               std::size_t line) {
    NormalTrainingRecord record;
    record.evidence = evidence_from_json(j, vocab, line);
    record.scene_label = j.at("scene_label").get<std::size_t>();
    if (record.scene_label >= vocab.num_scenes()) {
        throw Error("VocabMismatch",
                    "line " + std::to_string(line) + ": scene_label out of range");
    }
    if (j.contains("scene_attr_annotations")) {
        record.scene_attr_annotations =
            ingest_annotations(j, "scene_attr_annotations", vocab.num_scene_attrs(), line);
    }
    const Json& objects = j.at("objects");
    for (std::size_t k = 0; k < record.evidence.objects.size(); ++k) {
        const Json& oj = objects.at(k);
        ObjectGroundTruth truth;
        truth.object_label = oj.at("object_label").get<std::size_t>();
        if (truth.object_label >= vocab.num_objects()) {
            throw Error("VocabMismatch",
                        "line " + std::to_string(line) + ": object_label out of range");
        }
        if (oj.contains("attr_annotations")) {
            truth.attr_annotations =
                ingest_annotations(oj, "attr_annotations", vocab.num_object_attrs(), line);
        }
        if (oj.contains("cell_ratios")) {
            auto ratios = oj.at("cell_ratios").get<std::vector<double>>();
            for (double r : ratios) {
                if (r < 0.0 || r > 1.0 + 1e-9) parse_fail(line, "cell_ratios outside [0,1]");
            }
            truth.cell_ratios = std::move(ratios);
        }
        record.object_truth.push_back(std::move(truth));
    }
    return record;
}

Json object_to_json(const ObjectEvidence& obj, const ObjectGroundTruth* truth) {
    Json j;
    j["object_probs"] = obj.object_probs;
    j["object_attrs"] = obj.object_attrs;
    j["bbox"] = {obj.bbox.x, obj.bbox.y, obj.bbox.w, obj.bbox.h};
    j["relative_size"] = obj.relative_size;
    if (truth != nullptr) {
        j["object_label"] = truth->object_label;
        if (!truth->attr_annotations.empty()) j["attr_annotations"] = truth->attr_annotations;
        if (truth->cell_ratios) j["cell_ratios"] = *truth->cell_ratios;
    }
    return j;
}

Json evidence_to_json(const ImageEvidence& ev, const NormalTrainingRecord* record) {
    Json j;
    j["image_id"] = ev.image_id;
    j["scene_probs"] = ev.scene_probs;
    j["scene_attrs"] = ev.scene_attrs;
    if (record != nullptr) {
        j["scene_label"] = record->scene_label;
        if (!record->scene_attr_annotations.empty()) {
            j["scene_attr_annotations"] = record->scene_attr_annotations;
        }
    }
    Json objects = Json::array();
    for (std::size_t k = 0; k < ev.objects.size(); ++k) {
        objects.push_back(
            object_to_json(ev.objects[k], record != nullptr ? &record->object_truth[k] : nullptr));
    }
    j["objects"] = std::move(objects);
    return j;
}

// Parses one JSON value per line, reporting 1-based line numbers on failure.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            parse_fail(lineno, e.what());
        }
        try {
            fn(j, lineno);
        } catch (const Json::exception& e) {
            parse_fail(lineno, e.what());
        }
    }
}

}  // namespace

// --- model document ---------------------------------------------------------

std::string serialize_model(const ModelBundle& bundle) {
    Json j;
    j["schema_version"] = std::string(kModelSchemaVersion);

    Json config;
    config["grid_size"] = bundle.config.grid_size;
    config["smoothing_alpha"] = bundle.config.smoothing_alpha;
    config["entropy_floor"] = bundle.config.entropy_floor;
    config["clamp_max"] = bundle.config.clamp_max;
    config["epsilon_shift"] = bundle.config.epsilon_shift;
    config["decision_threshold"] = bundle.config.decision_threshold;
    config["holdout_fraction"] = bundle.config.holdout_fraction;
    config["seed"] = bundle.config.seed;
    j["config"] = std::move(config);

    j["vocab"] = vocab_to_json(bundle.typicality.vocab);

    const TypicalityModel& model = bundle.typicality;
    Json typ;
    auto gaussian_grid = [](const std::vector<std::vector<GaussianParams>>& grid) {
        Json rows = Json::array();
        for (const auto& row : grid) {
            Json cells = Json::array();
            for (const auto& cell : row) cells.push_back(gaussian_to_json(cell));
            rows.push_back(std::move(cells));
        }
        return rows;
    };
    typ["object_attr_cond"] = gaussian_grid(model.object_attr_cond);
    typ["scene_attr_cond"] = gaussian_grid(model.scene_attr_cond);
    typ["object_given_scene"] = model.object_given_scene;
    typ["scene_relevance"] = model.scene_relevance;
    typ["object_relevance"] = model.object_relevance;
    typ["scene_reliability"] = model.scene_reliability;
    typ["object_reliability"] = model.object_reliability;

    Json location;
    location["grid_size"] = model.location.grid_size;
    location["clamp_max"] = model.location.clamp_max;
    Json categories = Json::array();
    for (const auto& cells : model.location.cells) {
        Json row = Json::array();
        for (const auto& cell : cells) {
            Json c;
            c["zero_mass"] = cell.zero_mass;
            if (cell.has_positive) {
                c["positive"] = dist_to_json(DistParams{cell.positive});
            } else {
                c["positive"] = nullptr;
            }
            row.push_back(std::move(c));
        }
        categories.push_back(std::move(row));
    }
    location["cells"] = std::move(categories);
    typ["location"] = std::move(location);

    Json sizes = Json::array();
    for (const auto& gamma : model.size) sizes.push_back(dist_to_json(DistParams{gamma}));
    typ["size"] = std::move(sizes);
    typ["scene_prior"] = model.scene_prior;
    j["typicality"] = std::move(typ);

    Json reasoning;
    reasoning["decision_threshold"] = bundle.reasoning.decision_threshold;
    Json reasons;
    for (int r = 0; r < kNumReasons; ++r) {
        const ReasonPrior& prior = bundle.reasoning.reasons[r];
        Json p;
        p["shift"] = prior.shift;
        p["prior"] = dist_to_json(DistParams{prior.prior});
        p["aic_report"] = aic_table_to_json(prior.aic_report);
        reasons[std::string(reason_name(static_cast<Reason>(r)))] = std::move(p);
    }
    reasoning["reasons"] = std::move(reasons);
    j["reasoning"] = std::move(reasoning);

    return j.dump(2) + "\n";
}

ModelBundle deserialize_model(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error("CorruptDocument", std::string("model document: ") + e.what(),
                    ErrorCategory::Model);
    }
    try {
        const auto version = j.at("schema_version").get<std::string>();
        if (version != kModelSchemaVersion) {
            throw Error("UnsupportedVersion",
                        "model schema_version '" + version + "' is not supported",
                        ErrorCategory::Model);
        }

        ModelBundle bundle;
        const Json& config = j.at("config");
        bundle.config.grid_size = config.at("grid_size").get<int>();
        bundle.config.smoothing_alpha = config.at("smoothing_alpha").get<double>();
        bundle.config.entropy_floor = config.at("entropy_floor").get<double>();
        bundle.config.clamp_max = config.at("clamp_max").get<double>();
        bundle.config.epsilon_shift = config.at("epsilon_shift").get<double>();
        bundle.config.decision_threshold = config.at("decision_threshold").get<double>();
        bundle.config.holdout_fraction = config.at("holdout_fraction").get<double>();
        bundle.config.seed = config.at("seed").get<std::uint64_t>();

        TypicalityModel& model = bundle.typicality;
        model.vocab = vocab_from_json(j.at("vocab"));

        const Json& typ = j.at("typicality");
        auto gaussian_grid = [](const Json& rows) {
            std::vector<std::vector<GaussianParams>> grid;
            for (const auto& row : rows) {
                std::vector<GaussianParams> cells;
                for (const auto& cell : row) cells.push_back(gaussian_from_json(cell));
                grid.push_back(std::move(cells));
            }
            return grid;
        };
        model.object_attr_cond = gaussian_grid(typ.at("object_attr_cond"));
        model.scene_attr_cond = gaussian_grid(typ.at("scene_attr_cond"));
        model.object_given_scene =
            typ.at("object_given_scene").get<std::vector<std::vector<double>>>();
        model.scene_relevance = typ.at("scene_relevance").get<std::vector<std::vector<double>>>();
        model.object_relevance =
            typ.at("object_relevance").get<std::vector<std::vector<double>>>();
        model.scene_reliability = typ.at("scene_reliability").get<std::vector<double>>();
        model.object_reliability = typ.at("object_reliability").get<std::vector<double>>();

        const Json& location = typ.at("location");
        model.location.grid_size = location.at("grid_size").get<int>();
        model.location.clamp_max = location.at("clamp_max").get<double>();
        for (const auto& row : location.at("cells")) {
            std::vector<CellModel> cells;
            for (const auto& c : row) {
                CellModel cell;
                cell.zero_mass = c.at("zero_mass").get<double>();
                if (!c.at("positive").is_null()) {
                    cell.positive = std::get<ExponentialParams>(dist_from_json(c.at("positive")));
                    cell.has_positive = true;
                }
                cells.push_back(cell);
            }
            model.location.cells.push_back(std::move(cells));
        }

        for (const auto& g : typ.at("size")) {
            model.size.push_back(std::get<GammaParams>(dist_from_json(g)));
        }
        model.scene_prior = typ.at("scene_prior").get<std::vector<double>>();

        const Json& reasoning = j.at("reasoning");
        bundle.reasoning.decision_threshold = reasoning.at("decision_threshold").get<double>();
        for (int r = 0; r < kNumReasons; ++r) {
            const Json& p = reasoning.at("reasons").at(
                std::string(reason_name(static_cast<Reason>(r))));
            ReasonPrior& prior = bundle.reasoning.reasons[r];
            prior.shift = p.at("shift").get<double>();
            prior.prior = std::get<InverseGaussianParams>(dist_from_json(p.at("prior")));
            prior.aic_report = aic_table_from_json(p.at("aic_report"));
        }
        return bundle;
    } catch (const Json::exception& e) {
        throw Error("CorruptDocument", std::string("model document: ") + e.what(),
                    ErrorCategory::Model);
    } catch (const std::bad_variant_access&) {
        throw Error("CorruptDocument", "model document: unexpected distribution family",
                    ErrorCategory::Model);
    }
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("Internal", "cannot open '" + path.string() + "' for writing",
                    ErrorCategory::Internal);
    }
    out << serialize_model(bundle);
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("MissingModel", "cannot open model document '" + path.string() + "'",
                    ErrorCategory::Model);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

// --- vocabulary --------------------------------------------------------------

CategoryVocab parse_vocab(std::istream& in) {
    Json j;
    try {
        j = Json::parse(in);
        return vocab_from_json(j);
    } catch (const Json::exception& e) {
        throw Error("ParseError", std::string("vocabulary: ") + e.what());
    }
}

void write_vocab(std::ostream& out, const CategoryVocab& vocab) {
    out << vocab_to_json(vocab).dump(2) << "\n";
}

// --- evidence ----------------------------------------------------------------

std::vector<ImageEvidence> parse_evidence(std::istream& in, const CategoryVocab& vocab) {
    std::vector<ImageEvidence> out;
    for_each_line(in, [&](const Json& j, std::size_t line) {
        out.push_back(evidence_from_json(j, vocab, line));
    });
    return out;
}

std::vector<NormalTrainingRecord> parse_training_records(std::istream& in,
                                                         const CategoryVocab& vocab) {
    std::vector<NormalTrainingRecord> out;
    for_each_line(in, [&](const Json& j, std::size_t line) {
        out.push_back(training_record_from_json(j, vocab, line));
    });
    return out;
}

void write_evidence(std::ostream& out, std::span<const ImageEvidence> images) {
    for (const auto& ev : images) out << evidence_to_json(ev, nullptr).dump() << "\n";
}

void write_training_records(std::ostream& out, std::span<const NormalTrainingRecord> records) {
    for (const auto& record : records) {
        out << evidence_to_json(record.evidence, &record).dump() << "\n";
    }
}

// --- score, reason, and label records -----------------------------------------

void write_score_records(std::ostream& out, std::span<const ScoreRecord> records) {
    for (const auto& record : records) {
        Json j;
        j["image_id"] = record.image_id;
        j["surprise_object"] = record.surprise.object;
        j["surprise_context"] = record.surprise.context;
        j["surprise_scene"] = record.surprise.scene;
        out << j.dump() << "\n";
    }
}

std::vector<ScoreRecord> parse_score_records(std::istream& in) {
    std::vector<ScoreRecord> out;
    for_each_line(in, [&out](const Json& j, std::size_t) {
        ScoreRecord record;
        record.image_id = j.at("image_id").get<std::string>();
        record.surprise.object = j.at("surprise_object").get<double>();
        record.surprise.context = j.at("surprise_context").get<double>();
        record.surprise.scene = j.at("surprise_scene").get<double>();
        out.push_back(std::move(record));
    });
    return out;
}

void write_reason_records(std::ostream& out, std::span<const ReasonRecord> records) {
    for (const auto& record : records) {
        Json j;
        j["image_id"] = record.image_id;
        j["surprise_object"] = record.raw.object;
        j["surprise_context"] = record.raw.context;
        j["surprise_scene"] = record.raw.scene;
        j["normalized_object"] = record.normalized.values[0];
        j["normalized_context"] = record.normalized.values[1];
        j["normalized_scene"] = record.normalized.values[2];
        j["final_score"] = record.final_score;
        j["abnormal"] = record.abnormal;
        j["reason"] = std::string(reason_name(record.reason));
        out << j.dump() << "\n";
    }
}

std::vector<ReasonRecord> parse_reason_records(std::istream& in) {
    std::vector<ReasonRecord> out;
    for_each_line(in, [&out](const Json& j, std::size_t) {
        ReasonRecord record;
        record.image_id = j.at("image_id").get<std::string>();
        record.raw.object = j.at("surprise_object").get<double>();
        record.raw.context = j.at("surprise_context").get<double>();
        record.raw.scene = j.at("surprise_scene").get<double>();
        record.normalized.values[0] = j.at("normalized_object").get<double>();
        record.normalized.values[1] = j.at("normalized_context").get<double>();
        record.normalized.values[2] = j.at("normalized_scene").get<double>();
        record.final_score = j.at("final_score").get<double>();
        record.abnormal = j.at("abnormal").get<bool>();
        record.reason = reason_from_name(j.at("reason").get<std::string>());
        out.push_back(std::move(record));
    });
    return out;
}

void write_labels(std::ostream& out, std::span<const TestLabel> labels) {
    for (const auto& label : labels) {
        Json j;
        j["image_id"] = label.image_id;
        j["abnormal"] = label.abnormal;
        if (label.reason) j["reason"] = std::string(reason_name(*label.reason));
        if (label.reason_scores) {
            j["reason_scores"] = std::vector<double>(label.reason_scores->begin(),
                                                     label.reason_scores->end());
        }
        out << j.dump() << "\n";
    }
}

std::vector<TestLabel> parse_labels(std::istream& in) {
    std::vector<TestLabel> out;
    for_each_line(in, [&out](const Json& j, std::size_t line) {
        TestLabel label;
        label.image_id = j.at("image_id").get<std::string>();
        label.abnormal = j.at("abnormal").get<bool>();
        if (j.contains("reason")) {
            label.reason = reason_from_name(j.at("reason").get<std::string>());
        }
        if (j.contains("reason_scores")) {
            const auto scores = j.at("reason_scores").get<std::vector<double>>();
            if (scores.size() != kNumReasons) parse_fail(line, "reason_scores must have 3 entries");
            std::array<double, kNumReasons> arr{};
            std::copy(scores.begin(), scores.end(), arr.begin());
            label.reason_scores = arr;
        }
        out.push_back(std::move(label));
    });
    return out;
}

// --- taxonomy -----------------------------------------------------------------

AnnotationMatrix parse_annotation_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw Error("ParseError", "annotation matrix is empty");
    }
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

    auto split = [delim](const std::string& text) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(text);
        while (std::getline(ss, field, delim)) fields.push_back(field);
        return fields;
    };

    AnnotationMatrix matrix;
    const auto head = split(header);
    if (head.size() < 2) throw Error("ParseError", "annotation matrix header needs reason columns");
    matrix.reason_names.assign(head.begin() + 1, head.end());

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split(line);
        if (fields.size() != head.size()) {
            parse_fail(lineno, "expected " + std::to_string(head.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        }
        matrix.image_ids.push_back(fields[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            try {
                v = std::stod(fields[i]);
            } catch (const std::exception&) {
                parse_fail(lineno, "bad number '" + fields[i] + "'");
            }
            if (v < 0.0 || v > 1.0) parse_fail(lineno, "responses must lie in [0,1]");
            row.push_back(v);
        }
        matrix.values.push_back(std::move(row));
    }
    return matrix;
}

void write_dendrogram(std::ostream& out, const Dendrogram& dendrogram) {
    Json j;
    j["num_leaves"] = dendrogram.num_leaves;
    Json merges = Json::array();
    for (const auto& m : dendrogram.merges) {
        Json e;
        e["left"] = m.left;
        e["right"] = m.right;
        e["height"] = m.height;
        e["size"] = m.size;
        merges.push_back(std::move(e));
    }
    j["merges"] = std::move(merges);
    out << j.dump(2) << "\n";
}

void write_taxonomy_groups(std::ostream& out, const AnnotationMatrix& matrix,
                           const std::vector<int>& image_clusters,
                           const std::vector<int>& reason_groups) {
    Json j;
    Json images = Json::array();
    for (std::size_t i = 0; i < matrix.image_ids.size(); ++i) {
        images.push_back({{"image_id", matrix.image_ids[i]}, {"cluster", image_clusters[i]}});
    }
    j["image_clusters"] = std::move(images);
    Json reasons = Json::array();
    for (std::size_t i = 0; i < matrix.reason_names.size(); ++i) {
        reasons.push_back({{"reason", matrix.reason_names[i]}, {"cluster", reason_groups[i]}});
    }
    j["reason_groups"] = std::move(reasons);
    out << j.dump(2) << "\n";
}

// --- evaluation reports ---------------------------------------------------------

namespace {

Json ablation_to_json(const AblationTable& ablation) {
    Json j;
    Json variants = Json::array();
    for (auto v : ablation.variants) variants.push_back(std::string(ablation_name(v)));
    j["variants"] = std::move(variants);
    Json rows;
    for (int r = 0; r < kNumReasons; ++r) {
        const std::string key(reason_name(static_cast<Reason>(r)));
        if (!ablation.row_error[r].empty()) {
            rows[key] = {{"error", ablation.row_error[r]}};
            continue;
        }
        Json values = Json::array();
        for (double v : ablation.auc[r]) values.push_back(v);
        rows[key] = {{"auc", std::move(values)}};
    }
    j["rows"] = std::move(rows);
    return j;
}

}  // namespace

void write_eval_report(std::ostream& out, const EvalReport& report,
                       const AblationTable* ablation) {
    Json j;
    j["images"] = report.num_images;
    j["abnormal_images"] = report.num_abnormal;
    j["abnormality"] = {{"auc", report.abnormality_auc}};
    Json per_reason;
    for (int r = 0; r < kNumReasons; ++r) {
        per_reason[std::string(reason_name(static_cast<Reason>(r)))] = report.per_reason_auc[r];
    }
    j["per_reason_auc"] = std::move(per_reason);
    Json confusion = Json::array();
    for (const auto& row : report.confusion) {
        confusion.push_back(std::vector<std::size_t>(row.begin(), row.end()));
    }
    j["reasoning"] = {{"accuracy", report.reason_accuracy}, {"confusion", std::move(confusion)}};
    if (report.mean_kl) j["kl"] = {{"mean", *report.mean_kl}};
    if (ablation != nullptr) j["ablation"] = ablation_to_json(*ablation);
    out << j.dump(2) << "\n";
}

void write_eval_summary(std::ostream& out, const EvalReport& report,
                        const AblationTable* ablation) {
    out << "abnormality_auc\t" << report.abnormality_auc << "\n";
    for (int r = 0; r < kNumReasons; ++r) {
        out << "auc_" << reason_name(static_cast<Reason>(r)) << "\t" << report.per_reason_auc[r]
            << "\n";
    }
    out << "reason_accuracy\t" << report.reason_accuracy << "\n";
    if (report.mean_kl) out << "mean_kl\t" << *report.mean_kl << "\n";
    if (ablation != nullptr) {
        for (int r = 0; r < kNumReasons; ++r) {
            for (std::size_t col = 0; col < ablation->variants.size(); ++col) {
                out << "ablation_" << reason_name(static_cast<Reason>(r)) << "_"
                    << ablation_name(ablation->variants[col]) << "\t";
                if (ablation->row_error[r].empty()) {
                    out << ablation->auc[r][col];
                } else {
                    out << ablation->row_error[r];
                }
                out << "\n";
            }
        }
    }
}

// --- configuration ----------------------------------------------------------------

EngineConfig parse_config(std::istream& in, EngineConfig base) {
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error("ParseError", std::string("config: ") + e.what());
    }
    if (j.contains("grid_size")) base.grid_size = j.at("grid_size").get<int>();
    if (j.contains("smoothing_alpha")) base.smoothing_alpha = j.at("smoothing_alpha").get<double>();
    if (j.contains("entropy_floor")) base.entropy_floor = j.at("entropy_floor").get<double>();
    if (j.contains("clamp_max")) base.clamp_max = j.at("clamp_max").get<double>();
    if (j.contains("epsilon_shift")) base.epsilon_shift = j.at("epsilon_shift").get<double>();
    if (j.contains("decision_threshold")) {
        base.decision_threshold = j.at("decision_threshold").get<double>();
    }
    if (j.contains("holdout_fraction")) {
        base.holdout_fraction = j.at("holdout_fraction").get<double>();
    }
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (base.grid_size < 1 || base.smoothing_alpha <= 0.0 || base.entropy_floor <= 0.0 ||
        base.clamp_max <= 0.0 || base.epsilon_shift <= 0.0 || base.decision_threshold <= 0.0 ||
        base.decision_threshold >= 1.0 || base.holdout_fraction < 0.0 ||
        base.holdout_fraction >= 1.0) {
        throw Error("ParseError", "config value out of range");
    }
    return base;
}

SyntheticSpec parse_synth_spec(std::istream& in, SyntheticSpec base) {
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error("ParseError", std::string("synthetic spec: ") + e.what());
    }
    auto get_size = [&j](const char* key, std::size_t& field) {
        if (j.contains(key)) field = j.at(key).get<std::size_t>();
    };
    auto get_int = [&j](const char* key, int& field) {
        if (j.contains(key)) field = j.at(key).get<int>();
    };
    auto get_real = [&j](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get_size("num_object_categories", base.num_object_categories);
    get_size("num_scene_categories", base.num_scene_categories);
    get_size("num_object_attrs", base.num_object_attrs);
    get_size("num_scene_attrs", base.num_scene_attrs);
    get_int("grid_size", base.grid_size);
    get_int("min_objects", base.min_objects);
    get_int("max_objects", base.max_objects);
    get_size("normal_train", base.normal_train);
    get_size("normal_test", base.normal_test);
    get_size("abnormal_per_reason", base.abnormal_per_reason);
    get_real("attribute_displacement_sigma", base.attribute_displacement_sigma);
    get_real("cooccurrence_inversion", base.cooccurrence_inversion);
    get_real("location_displacement_cells", base.location_displacement_cells);
    if (base.attribute_displacement_sigma < 0.0 || base.cooccurrence_inversion < 0.0 ||
        base.cooccurrence_inversion > 1.0 || base.location_displacement_cells < 0.0) {
        throw Error("ParseError", "synthetic spec magnitude out of range");
    }
    return base;
}

}  // namespace atypia
