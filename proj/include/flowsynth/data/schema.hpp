#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flowsynth::data {

enum class FieldKind { discrete, continuous };
enum class FieldRole { feature, label };

struct FieldSpec {
    std::string name;
    FieldKind kind = FieldKind::continuous;
    FieldRole role = FieldRole::feature;
};

// Declares the feature layout of a flow table: which columns are discrete,
// which are continuous, and which single column carries the class label.
// Optionally carries a raw-label -> class mapping (dataset releases label at
// different granularities).
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<FieldSpec> fields);

    static FeatureSchema from_json_text(const std::string& text);
    static FeatureSchema from_json_file(const std::string& path);
    std::string to_json_text() const;

    const std::vector<FieldSpec>& features() const { return features_; }
    const FieldSpec& label_field() const { return label_; }
    Eigen::Index feature_count() const { return static_cast<Eigen::Index>(features_.size()); }
    std::size_t discrete_count() const { return discrete_count_; }
    std::size_t continuous_count() const { return features_.size() - discrete_count_; }

    // per-feature slot within its kind (discrete ordinal or continuous ordinal)
    std::size_t slot(std::size_t feature_idx) const { return slots_[feature_idx]; }

    // raw label -> canonical class, after normalization; empty optional = drop row
    std::optional<std::string> map_label(const std::string& raw) const;

    std::map<std::string, std::string> label_map;  // normalized raw -> class
    enum class UnmappedPolicy { keep, drop, error };
    UnmappedPolicy unmapped_policy = UnmappedPolicy::keep;

private:
    void index();

    std::vector<FieldSpec> features_;
    FieldSpec label_;
    std::vector<std::size_t> slots_;
    std::size_t discrete_count_ = 0;
};

// case/whitespace normalization applied to labels and header names at load
std::string normalize_token(const std::string& s);

// Per-field lookup table between raw category strings and fixed scalar codes.
struct Codebook {
    std::string field_name;
    std::vector<std::string> legal_values;  // sorted distinct training values
    std::vector<double> codes;              // strictly increasing, f32-representable
    double oov_code = 0.5;

    static constexpr const char* kOovToken = "<oov>";

    double encode_value(const std::string& raw) const;
    const std::string& decode_code(double code) const;  // nearest code wins
    void validate() const;
};

// Per-field min-max scaler onto [-1, 1]; out-of-range values are clamped.
struct Scaler {
    std::string field_name;
    double raw_min = 0.0;
    double raw_max = 0.0;

    double encode_value(double raw) const;
    double decode_value(double enc) const;
};

}  // namespace flowsynth::data
