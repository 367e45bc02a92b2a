#pragma once

#include <string>

#include "flowsynth/data/dataset.hpp"

namespace flowsynth::data {

// "FSE1" encoded-dataset container, little-endian:
//   magic "FSE1", u32 n_rows, u32 F, f32 feature matrix row-major,
//   u32 labels, then a JSON text footer (class names, provenance flags,
//   split tag, feature names, generator ids).
void save_encoded(const EncodedDataset& ds, const std::string& path);
EncodedDataset load_encoded(const std::string& path);

}  // namespace flowsynth::data
