#include "flowsynth/data/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flowsynth/util/binio.hpp"
#include "flowsynth/util/errors.hpp"

namespace flowsynth::data {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

std::map<std::string, std::uint64_t> EncodedDataset::class_counts() const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& name : class_names) out[name] = 0;
    for (std::uint32_t l : labels) out[class_names.at(l)] += 1;
    return out;
}

std::uint32_t EncodedDataset::class_index(const std::string& name) const {
    for (std::size_t i = 0; i < class_names.size(); ++i)
        if (class_names[i] == name) return static_cast<std::uint32_t>(i);
    throw DataError("class '" + name + "' not present");
}

const ClassPlan* AugmentationPlan::find(const std::string& class_name) const {
    for (const auto& e : entries)
        if (e.class_name == class_name) return &e;
    return nullptr;
}

std::uint64_t AugmentationPlan::total_synthetic() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.target_count - e.original_count;
    return n;
}

void AugmentationPlan::validate() const {
    for (const auto& e : entries)
        if (e.target_count < e.original_count)
            throw ConfigError("augmentation plan: target below original for class '" + e.class_name + "'");
}

RawDataset load_flow_table(const std::string& path, const FeatureSchema& schema, char delimiter,
                           const std::string& split_tag) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open flow table: " + path);

    std::string line;
    if (!std::getline(f, line)) throw DataError("empty file: " + path);
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM

    auto header = split_line(line, delimiter);
    std::map<std::string, std::size_t> col_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = normalize_token(header[i]);
        if (!name.empty() && col_of.find(name) == col_of.end()) col_of[name] = i;
    }

    auto require_col = [&](const std::string& field) {
        auto it = col_of.find(normalize_token(field));
        if (it == col_of.end())
            throw DataError("schema error: column '" + field + "' missing from header of " + path);
        return it->second;
    };

    std::vector<std::size_t> feature_cols;
    for (const auto& fspec : schema.features()) feature_cols.push_back(require_col(fspec.name));
    std::size_t label_col = require_col(schema.label_field().name);

    RawDataset ds;
    ds.schema = schema;
    ds.split_tag = split_tag;
    ds.str_cols.resize(schema.discrete_count());
    ds.num_cols.resize(schema.continuous_count());

    std::size_t row_idx = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line, delimiter);
        ++row_idx;
        if (cells.size() <= label_col)
            throw DataError("row " + std::to_string(row_idx) + ": too few columns in " + path);

        auto mapped = schema.map_label(cells[label_col]);
        if (!mapped) continue;  // label mapped to drop

        for (std::size_t i = 0; i < feature_cols.size(); ++i) {
            const auto& fspec = schema.features()[i];
            std::size_t col = feature_cols[i];
            if (cells.size() <= col)
                throw DataError("row " + std::to_string(row_idx) + ": too few columns in " + path);
            std::string cell = trim(cells[col]);
            if (fspec.kind == FieldKind::discrete) {
                ds.str_cols[schema.slot(i)].push_back(cell);
            } else {
                char* end = nullptr;
                double v = std::strtod(cell.c_str(), &end);
                if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
                    throw DataError("row " + std::to_string(row_idx) + ": cannot parse numeric cell '" +
                                    cell + "' in column '" + fspec.name + "'");
                ds.num_cols[schema.slot(i)].push_back(v);
            }
        }
        ds.labels.push_back(*mapped);
    }
    if (ds.labels.empty()) throw DataError("empty dataset: " + path);
    return ds;
}

std::vector<Codebook> fit_codebooks(const RawDataset& train) {
    const auto& schema = train.schema;
    std::vector<Codebook> out;
    for (std::size_t i = 0; i < schema.features().size(); ++i) {
        const auto& fspec = schema.features()[i];
        if (fspec.kind != FieldKind::discrete) continue;
        const auto& col = train.str_cols[schema.slot(i)];
        std::set<std::string> distinct(col.begin(), col.end());
        if (distinct.empty())
            throw DataError("discrete field '" + fspec.name + "' has zero observed values");

        Codebook cb;
        cb.field_name = fspec.name;
        cb.legal_values.assign(distinct.begin(), distinct.end());
        const std::size_t k = cb.legal_values.size();
        // K evenly spaced codes over [-1, 1]; single category sits at 0.
        // Codes are rounded to f32 so containers hold them exactly.
        for (std::size_t j = 0; j < k; ++j) {
            double c = (k == 1) ? 0.0 : -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(k - 1);
            cb.codes.push_back(to_f32(c));
        }
        if (k == 1) {
            cb.oov_code = to_f32(0.5);
        } else {
            std::size_t gi = 0;
            double best = 0.0;
            for (std::size_t j = 0; j + 1 < k; ++j) {
                double gap = cb.codes[j + 1] - cb.codes[j];
                if (gap > best) {
                    best = gap;
                    gi = j;
                }
            }
            cb.oov_code = to_f32(0.5 * (cb.codes[gi] + cb.codes[gi + 1]));
        }
        cb.validate();
        out.push_back(std::move(cb));
    }
    return out;
}

std::vector<Scaler> fit_scalers(const RawDataset& train) {
    const auto& schema = train.schema;
    std::vector<Scaler> out;
    for (std::size_t i = 0; i < schema.features().size(); ++i) {
        const auto& fspec = schema.features()[i];
        if (fspec.kind != FieldKind::continuous) continue;
        const auto& col = train.num_cols[schema.slot(i)];
        Scaler s;
        s.field_name = fspec.name;
        s.raw_min = *std::min_element(col.begin(), col.end());
        s.raw_max = *std::max_element(col.begin(), col.end());
        out.push_back(s);
    }
    return out;
}

CodecModel fit_codec(const RawDataset& train) {
    if (train.split_tag != "train")
        throw DataError("codec fitting requires the training split, got split_tag='" + train.split_tag +
                        "' (leakage guard)");
    CodecModel m;
    m.schema = train.schema;
    m.codebooks = fit_codebooks(train);
    m.scalers = fit_scalers(train);
    std::set<std::string> classes(train.labels.begin(), train.labels.end());
    m.class_names.assign(classes.begin(), classes.end());
    return m;
}

EncodedDataset encode(const RawDataset& raw, const CodecModel& codec) {
    const auto& schema = codec.schema;
    const Eigen::Index n = static_cast<Eigen::Index>(raw.n_rows());
    const Eigen::Index F = schema.feature_count();

    EncodedDataset out;
    out.features.resize(n, F);
    out.labels.reserve(n);
    out.class_names = codec.class_names;
    out.provenance.assign(static_cast<std::size_t>(n), Provenance::real);
    out.split_tag = raw.split_tag;
    for (const auto& f : schema.features()) out.feature_names.push_back(f.name);

    // discrete slot -> codebook, continuous slot -> scaler (both already in slot order)
    for (Eigen::Index j = 0; j < F; ++j) {
        const auto& fspec = schema.features()[static_cast<std::size_t>(j)];
        std::size_t slot = schema.slot(static_cast<std::size_t>(j));
        if (fspec.kind == FieldKind::discrete) {
            const auto& cb = codec.codebooks.at(slot);
            const auto& col = raw.str_cols.at(slot);
            for (Eigen::Index i = 0; i < n; ++i)
                out.features(i, j) = cb.encode_value(col[static_cast<std::size_t>(i)]);
        } else {
            const auto& sc = codec.scalers.at(slot);
            const auto& col = raw.num_cols.at(slot);
            for (Eigen::Index i = 0; i < n; ++i)
                out.features(i, j) = sc.encode_value(col[static_cast<std::size_t>(i)]);
        }
    }

    std::map<std::string, std::uint32_t> class_index;
    for (std::size_t i = 0; i < codec.class_names.size(); ++i)
        class_index[codec.class_names[i]] = static_cast<std::uint32_t>(i);
    for (const auto& l : raw.labels) {
        auto it = class_index.find(l);
        if (it == class_index.end())
            throw DataError("label '" + l + "' not seen when the codec was fitted");
        out.labels.push_back(it->second);
    }
    return out;
}

RawDataset decode(const EncodedDataset& encoded, const CodecModel& codec) {
    const auto& schema = codec.schema;
    const Eigen::Index n = encoded.n_rows();

    RawDataset out;
    out.schema = schema;
    out.split_tag = encoded.split_tag;
    out.str_cols.resize(schema.discrete_count());
    out.num_cols.resize(schema.continuous_count());

    for (Eigen::Index j = 0; j < schema.feature_count(); ++j) {
        const auto& fspec = schema.features()[static_cast<std::size_t>(j)];
        std::size_t slot = schema.slot(static_cast<std::size_t>(j));
        if (fspec.kind == FieldKind::discrete) {
            const auto& cb = codec.codebooks.at(slot);
            auto& col = out.str_cols[slot];
            col.reserve(n);
            for (Eigen::Index i = 0; i < n; ++i) col.push_back(cb.decode_code(encoded.features(i, j)));
        } else {
            const auto& sc = codec.scalers.at(slot);
            auto& col = out.num_cols[slot];
            col.reserve(n);
            for (Eigen::Index i = 0; i < n; ++i) col.push_back(sc.decode_value(encoded.features(i, j)));
        }
    }
    for (std::uint32_t l : encoded.labels) out.labels.push_back(encoded.class_names.at(l));
    return out;
}

EncodedDataset collapse_binary(const EncodedDataset& ds, const std::string& normal_class) {
    std::uint32_t normal_idx = ds.class_index(normal_class);  // throws if absent
    EncodedDataset out = ds;
    out.class_names = {"normal", "abnormal"};
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        out.labels[i] = (ds.labels[i] == normal_idx) ? 0u : 1u;
    return out;
}

AugmentationPlan build_augmentation_plan(const std::map<std::string, std::uint64_t>& class_counts,
                                         const std::map<std::string, std::uint64_t>& targets) {
    AugmentationPlan plan;
    for (const auto& [name, original] : class_counts) {
        ClassPlan e;
        e.class_name = name;
        e.original_count = original;
        auto it = targets.find(name);
        e.target_count = (it == targets.end()) ? original : it->second;
        plan.entries.push_back(std::move(e));
    }
    plan.validate();
    return plan;
}

AugmentationPlan build_scaled_plan(const std::map<std::string, std::uint64_t>& class_counts,
                                   const std::vector<std::string>& classes, double factor,
                                   std::uint64_t cap) {
    std::map<std::string, std::uint64_t> targets;
    for (const auto& name : classes) {
        auto it = class_counts.find(name);
        if (it == class_counts.end()) throw ConfigError("scaled plan: class '" + name + "' not in counts");
        auto scaled = static_cast<std::uint64_t>(std::llround(factor * static_cast<double>(it->second)));
        targets[name] = std::max(it->second, std::min(scaled, cap));
    }
    return build_augmentation_plan(class_counts, targets);
}

LoaoSplit make_loao_split(const EncodedDataset& train, const EncodedDataset& test,
                          const std::string& unknown_class) {
    std::uint32_t unknown_idx;
    try {
        unknown_idx = train.class_index(unknown_class);
    } catch (const DataError&) {
        throw DataError("LOAO: unknown class '" + unknown_class + "' missing from the training split");
    }
    test.class_index(unknown_class);  // must also exist in the fixed test set

    LoaoSplit out;
    out.unknown_class = unknown_class;
    out.test = test;  // "the test set remains fixed across all conditions"

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < train.n_rows(); ++i)
        if (train.labels[static_cast<std::size_t>(i)] != unknown_idx) keep.push_back(i);

    EncodedDataset& tr = out.train;
    tr.features.resize(static_cast<Eigen::Index>(keep.size()), train.feature_count());
    tr.class_names = train.class_names;
    tr.split_tag = train.split_tag;
    tr.feature_names = train.feature_names;
    tr.generator_ids = train.generator_ids;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        tr.features.row(static_cast<Eigen::Index>(r)) = train.features.row(keep[r]);
        tr.labels.push_back(train.labels[static_cast<std::size_t>(keep[r])]);
        tr.provenance.push_back(train.provenance[static_cast<std::size_t>(keep[r])]);
    }
    return out;
}

void validate_encoded(const EncodedDataset& ds, const CodecModel& codec, double range_eps) {
    const auto& schema = codec.schema;
    if (ds.feature_count() != schema.feature_count())
        throw DataError("validate: feature width mismatch");
    for (Eigen::Index j = 0; j < ds.feature_count(); ++j) {
        const auto& fspec = schema.features()[static_cast<std::size_t>(j)];
        const Codebook* cb = fspec.kind == FieldKind::discrete
                                 ? &codec.codebooks.at(schema.slot(static_cast<std::size_t>(j)))
                                 : nullptr;
        for (Eigen::Index i = 0; i < ds.n_rows(); ++i) {
            double v = ds.features(i, j);
            if (!(v >= -1.0 - range_eps && v <= 1.0 + range_eps))
                throw DataError("validate: value out of range at (" + std::to_string(i) + "," +
                                std::to_string(j) + "): " + std::to_string(v));
            if (cb) {
                bool legal = (v == cb->oov_code);
                for (double c : cb->codes) legal = legal || (v == c);
                if (!legal)
                    throw DataError("validate: illegal discrete code at (" + std::to_string(i) + "," +
                                    std::to_string(j) + "): " + std::to_string(v));
            }
        }
    }
    for (std::uint32_t l : ds.labels)
        if (l >= ds.class_names.size()) throw DataError("validate: label index out of range");
    if (static_cast<Eigen::Index>(ds.labels.size()) != ds.n_rows() ||
        static_cast<Eigen::Index>(ds.provenance.size()) != ds.n_rows())
        throw DataError("validate: per-row vectors inconsistent with row count");
}

std::string CodecModel::to_json_text() const {
    json j;
    j["schema"] = json::parse(schema.to_json_text());
    j["class_names"] = class_names;
    j["codebooks"] = json::array();
    for (const auto& cb : codebooks)
        j["codebooks"].push_back({{"field", cb.field_name},
                                  {"values", cb.legal_values},
                                  {"codes", cb.codes},
                                  {"oov_code", cb.oov_code}});
    j["scalers"] = json::array();
    for (const auto& s : scalers)
        j["scalers"].push_back({{"field", s.field_name}, {"min", s.raw_min}, {"max", s.raw_max}});
    return j.dump(2);
}

CodecModel CodecModel::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("codec: invalid JSON: ") + e.what());
    }
    CodecModel m;
    m.schema = FeatureSchema::from_json_text(j.at("schema").dump());
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& jc : j.at("codebooks")) {
        Codebook cb;
        cb.field_name = jc.at("field").get<std::string>();
        cb.legal_values = jc.at("values").get<std::vector<std::string>>();
        cb.codes = jc.at("codes").get<std::vector<double>>();
        cb.oov_code = jc.at("oov_code").get<double>();
        cb.validate();
        m.codebooks.push_back(std::move(cb));
    }
    for (const auto& js : j.at("scalers")) {
        Scaler s;
        s.field_name = js.at("field").get<std::string>();
        s.raw_min = js.at("min").get<double>();
        s.raw_max = js.at("max").get<double>();
        m.scalers.push_back(s);
    }
    return m;
}

}  // namespace flowsynth::data
