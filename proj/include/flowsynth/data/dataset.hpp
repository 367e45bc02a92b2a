#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsynth/data/schema.hpp"

namespace flowsynth::data {

enum class Provenance : std::uint8_t { real = 0, synthetic = 1 };

// Raw rows as read from a flow table, stored per column in schema feature
// order (discrete columns keep strings, continuous columns parsed doubles).
struct RawDataset {
    FeatureSchema schema;
    std::vector<std::vector<std::string>> str_cols;  // one per discrete feature
    std::vector<std::vector<double>> num_cols;       // one per continuous feature
    std::vector<std::string> labels;                 // mapped class names
    std::string split_tag;

    std::size_t n_rows() const { return labels.size(); }
};

// Model-space dataset: every feature in [-1, 1], integer class labels.
struct EncodedDataset {
    Eigen::MatrixXd features;  // n_rows x F
    std::vector<std::uint32_t> labels;
    std::vector<std::string> class_names;
    std::vector<Provenance> provenance;
    std::string split_tag;
    std::vector<std::string> feature_names;
    std::map<std::string, std::string> generator_ids;  // class -> checkpoint digest

    Eigen::Index n_rows() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }
    std::map<std::string, std::uint64_t> class_counts() const;
    std::uint32_t class_index(const std::string& name) const;  // throws DataError if absent
};

struct ClassPlan {
    std::string class_name;
    std::uint64_t original_count = 0;
    std::uint64_t target_count = 0;
};

// Per-class synthesis targets; classes with target == original get no
// synthetic rows.
struct AugmentationPlan {
    std::vector<ClassPlan> entries;

    const ClassPlan* find(const std::string& class_name) const;
    std::uint64_t total_synthetic() const;
    void validate() const;
};

}  // namespace flowsynth::data
