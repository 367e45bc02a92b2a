#include "flowsynth/data/schema.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "flowsynth/util/binio.hpp"
#include "flowsynth/util/errors.hpp"

namespace flowsynth::data {

using nlohmann::json;

std::string normalize_token(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

FeatureSchema::FeatureSchema(std::vector<FieldSpec> fields) {
    bool label_seen = false;
    std::set<std::string> names;
    for (auto& f : fields) {
        if (f.name.empty()) throw ConfigError("schema: field with empty name");
        if (!names.insert(f.name).second)
            throw ConfigError("schema: duplicate field name '" + f.name + "'");
        if (f.role == FieldRole::label) {
            if (label_seen) throw ConfigError("schema: more than one label field");
            label_seen = true;
            label_ = f;
        } else {
            features_.push_back(f);
        }
    }
    if (!label_seen) throw ConfigError("schema: no label field declared");
    if (features_.empty()) throw ConfigError("schema: no feature fields declared");
    index();
}

void FeatureSchema::index() {
    slots_.clear();
    discrete_count_ = 0;
    std::size_t cont = 0;
    for (const auto& f : features_) {
        if (f.kind == FieldKind::discrete) {
            slots_.push_back(discrete_count_++);
        } else {
            slots_.push_back(cont++);
        }
    }
}

std::optional<std::string> FeatureSchema::map_label(const std::string& raw) const {
    std::string norm = normalize_token(raw);
    auto it = label_map.find(norm);
    if (it != label_map.end()) {
        if (it->second.empty()) return std::nullopt;  // mapped to drop
        return it->second;
    }
    switch (unmapped_policy) {
        case UnmappedPolicy::keep: return norm;
        case UnmappedPolicy::drop: return std::nullopt;
        case UnmappedPolicy::error:
            throw DataError("label '" + norm + "' has no mapping and unmapped_policy is error");
    }
    return norm;
}

FeatureSchema FeatureSchema::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!j.contains("fields") || !j["fields"].is_array())
        throw ConfigError("schema: missing 'fields' array");
    std::vector<FieldSpec> fields;
    for (const auto& jf : j["fields"]) {
        FieldSpec f;
        f.name = jf.at("name").get<std::string>();
        std::string role = jf.value("role", "feature");
        if (role == "label") {
            f.role = FieldRole::label;
        } else if (role == "feature") {
            f.role = FieldRole::feature;
            std::string kind = jf.value("kind", "");
            if (kind == "discrete") f.kind = FieldKind::discrete;
            else if (kind == "continuous") f.kind = FieldKind::continuous;
            else throw ConfigError("schema: field '" + f.name + "' needs kind discrete|continuous");
        } else {
            throw ConfigError("schema: field '" + f.name + "' has unknown role '" + role + "'");
        }
        fields.push_back(std::move(f));
    }
    FeatureSchema schema(std::move(fields));
    if (j.contains("label_map")) {
        for (auto it = j["label_map"].begin(); it != j["label_map"].end(); ++it)
            schema.label_map[normalize_token(it.key())] = normalize_token(it.value().get<std::string>());
    }
    std::string policy = j.value("unmapped_policy", "keep");
    if (policy == "keep") schema.unmapped_policy = UnmappedPolicy::keep;
    else if (policy == "drop") schema.unmapped_policy = UnmappedPolicy::drop;
    else if (policy == "error") schema.unmapped_policy = UnmappedPolicy::error;
    else throw ConfigError("schema: unknown unmapped_policy '" + policy + "'");
    return schema;
}

FeatureSchema FeatureSchema::from_json_file(const std::string& path) {
    return from_json_text(read_text_file(path));
}

std::string FeatureSchema::to_json_text() const {
    json j;
    j["fields"] = json::array();
    for (const auto& f : features_) {
        j["fields"].push_back({{"name", f.name},
                               {"kind", f.kind == FieldKind::discrete ? "discrete" : "continuous"},
                               {"role", "feature"}});
    }
    j["fields"].push_back({{"name", label_.name}, {"role", "label"}});
    if (!label_map.empty()) {
        json m = json::object();
        for (const auto& [k, v] : label_map) m[k] = v;
        j["label_map"] = m;
    }
    switch (unmapped_policy) {
        case UnmappedPolicy::keep: j["unmapped_policy"] = "keep"; break;
        case UnmappedPolicy::drop: j["unmapped_policy"] = "drop"; break;
        case UnmappedPolicy::error: j["unmapped_policy"] = "error"; break;
    }
    return j.dump(2);
}

double Codebook::encode_value(const std::string& raw) const {
    auto it = std::lower_bound(legal_values.begin(), legal_values.end(), raw);
    if (it != legal_values.end() && *it == raw)
        return codes[static_cast<std::size_t>(it - legal_values.begin())];
    return oov_code;
}

const std::string& Codebook::decode_code(double code) const {
    static const std::string oov_token = kOovToken;
    double best_dist = std::abs(code - oov_code);
    std::size_t best = legal_values.size();  // sentinel slot = oov
    for (std::size_t i = 0; i < codes.size(); ++i) {
        double d = std::abs(code - codes[i]);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best == legal_values.size() ? oov_token : legal_values[best];
}

void Codebook::validate() const {
    if (legal_values.empty() || legal_values.size() != codes.size())
        throw DataError("codebook '" + field_name + "': value/code count mismatch");
    for (std::size_t i = 1; i < codes.size(); ++i)
        if (!(codes[i] > codes[i - 1]))
            throw DataError("codebook '" + field_name + "': codes not strictly increasing");
    for (double c : codes)
        if (c == oov_code) throw DataError("codebook '" + field_name + "': oov_code collides with a code");
}

double Scaler::encode_value(double raw) const {
    if (raw_max <= raw_min) return 0.0;  // constant training column
    double e = 2.0 * (raw - raw_min) / (raw_max - raw_min) - 1.0;
    return std::clamp(e, -1.0, 1.0);
}

double Scaler::decode_value(double enc) const {
    return (enc + 1.0) * 0.5 * (raw_max - raw_min) + raw_min;
}

}  // namespace flowsynth::data
