#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowsynth/data/dataset.hpp"
#include "flowsynth/data/schema.hpp"

namespace flowsynth::data {

// Codebooks, scalers, and the class-name table, fitted on the training split
// only. Immutable once fitted; safe to share across threads.
struct CodecModel {
    FeatureSchema schema;
    std::vector<Codebook> codebooks;  // one per discrete feature, schema order
    std::vector<Scaler> scalers;      // one per continuous feature, schema order
    std::vector<std::string> class_names;

    std::string to_json_text() const;
    static CodecModel from_json_text(const std::string& text);
};

// Reads a delimiter-separated flow table with a header row. Every schema
// field must appear in the header; extra columns are ignored.
RawDataset load_flow_table(const std::string& path, const FeatureSchema& schema,
                           char delimiter = ',', const std::string& split_tag = "train");

std::vector<Codebook> fit_codebooks(const RawDataset& train);
std::vector<Scaler> fit_scalers(const RawDataset& train);
// full fit; rejects datasets not tagged as the training split (leakage guard)
CodecModel fit_codec(const RawDataset& train);

EncodedDataset encode(const RawDataset& raw, const CodecModel& codec);
RawDataset decode(const EncodedDataset& encoded, const CodecModel& codec);

// collapses every class except normal_class into a single abnormal class
EncodedDataset collapse_binary(const EncodedDataset& ds, const std::string& normal_class);

AugmentationPlan build_augmentation_plan(const std::map<std::string, std::uint64_t>& class_counts,
                                         const std::map<std::string, std::uint64_t>& targets);
// targets = min(factor * original, cap) for the listed classes
AugmentationPlan build_scaled_plan(const std::map<std::string, std::uint64_t>& class_counts,
                                   const std::vector<std::string>& classes, double factor,
                                   std::uint64_t cap);

struct LoaoSplit {
    EncodedDataset train;  // unknown class removed
    EncodedDataset test;   // fixed original test set
    std::string unknown_class;
};

LoaoSplit make_loao_split(const EncodedDataset& train, const EncodedDataset& test,
                          const std::string& unknown_class);

// range/legal-code invariants; throws DataError on the first violation
void validate_encoded(const EncodedDataset& ds, const CodecModel& codec, double range_eps = 1e-9);

}  // namespace flowsynth::data
