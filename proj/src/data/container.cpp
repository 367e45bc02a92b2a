#include "flowsynth/data/container.hpp"

#include <json.hpp>

#include "flowsynth/util/binio.hpp"
#include "flowsynth/util/errors.hpp"

namespace flowsynth::data {

using nlohmann::json;

void save_encoded(const EncodedDataset& ds, const std::string& path) {
    const auto n = static_cast<std::uint32_t>(ds.n_rows());
    const auto F = static_cast<std::uint32_t>(ds.feature_count());
    if (ds.labels.size() != n || ds.provenance.size() != n)
        throw DataError("save_encoded: per-row vectors inconsistent with row count");

    BinWriter w;
    w.raw("FSE1", 4);
    w.u32(n);
    w.u32(F);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < F; ++j) w.f32(static_cast<float>(ds.features(i, j)));
    for (std::uint32_t l : ds.labels) w.u32(l);

    std::string prov;
    prov.reserve(n);
    for (Provenance p : ds.provenance) prov.push_back(p == Provenance::real ? 'r' : 's');
    json footer;
    footer["class_names"] = ds.class_names;
    footer["split_tag"] = ds.split_tag;
    footer["provenance"] = prov;
    footer["feature_names"] = ds.feature_names;
    if (!ds.generator_ids.empty()) {
        json g = json::object();
        for (const auto& [k, v] : ds.generator_ids) g[k] = v;
        footer["generator_ids"] = g;
    }
    std::string text = footer.dump();
    w.raw(text.data(), text.size());
    w.save(path);
}

EncodedDataset load_encoded(const std::string& path) {
    BinReader r = BinReader::from_file(path);
    char magic[4];
    r.raw(magic, 4);
    if (std::string(magic, 4) != "FSE1") throw DataError("not an FSE1 container: " + path);
    const std::uint32_t n = r.u32();
    const std::uint32_t F = r.u32();

    EncodedDataset ds;
    ds.features.resize(n, F);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < F; ++j) ds.features(i, j) = static_cast<double>(r.f32());
    ds.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) ds.labels[i] = r.u32();

    std::string text(r.remaining(), '\0');
    if (!text.empty()) r.raw(text.data(), text.size());
    json footer;
    try {
        footer = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("FSE1 footer: invalid JSON: ") + e.what());
    }
    ds.class_names = footer.at("class_names").get<std::vector<std::string>>();
    ds.split_tag = footer.value("split_tag", "");
    std::string prov = footer.at("provenance").get<std::string>();
    if (prov.size() != n) throw DataError("FSE1 footer: provenance length mismatch");
    for (char c : prov) ds.provenance.push_back(c == 's' ? Provenance::synthetic : Provenance::real);
    if (footer.contains("feature_names"))
        ds.feature_names = footer["feature_names"].get<std::vector<std::string>>();
    if (footer.contains("generator_ids"))
        for (auto it = footer["generator_ids"].begin(); it != footer["generator_ids"].end(); ++it)
            ds.generator_ids[it.key()] = it.value().get<std::string>();

    for (std::uint32_t l : ds.labels)
        if (l >= ds.class_names.size()) throw DataError("FSE1: label index out of range");
    return ds;
}

}  // namespace flowsynth::data
