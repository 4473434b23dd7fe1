#include "gt/dataset.hpp"

#include <cmath>

#include "gt/binary_io.hpp"
#include "gt/error.hpp"

namespace gt {

void Dataset::validate() const {
    if (pairs.empty()) {
        throw ValidationError("dataset is empty");
    }
    if (action_horizon * action_dim != chunk_dim) {
        throw DimensionError("dataset: action_horizon * action_dim != chunk_dim");
    }
    for (const auto& p : pairs) {
        if (p.cond.size() != cond_dim || p.chunk.size() != chunk_dim) {
            throw DimensionError("dataset: pair widths disagree with header");
        }
        for (float v : p.cond) {
            if (!std::isfinite(v)) {
                throw ValidationError("dataset: non-finite condition");
            }
        }
        for (float v : p.chunk) {
            if (!std::isfinite(v)) {
                throw ValidationError("dataset: non-finite chunk");
            }
        }
    }
}

// Layout (little-endian): "GTDS", u32 version, u32 env_id length, env_id
// bytes, u64 seed, u32 cond_dim, u32 chunk_dim, u32 action_horizon,
// u32 action_dim, u32 pair count, then per pair: u8 style, u32 episode,
// f32 cond[cond_dim], f32 chunk[chunk_dim].
std::string encode_dataset(const Dataset& ds) {
    ByteWriter w;
    w.bytes(kDatasetMagic);
    w.u32(kDatasetVersion);
    w.u32(static_cast<std::uint32_t>(ds.env_id.size()));
    w.bytes(ds.env_id);
    w.u64(ds.seed);
    w.u32(ds.cond_dim);
    w.u32(ds.chunk_dim);
    w.u32(ds.action_horizon);
    w.u32(ds.action_dim);
    w.u32(static_cast<std::uint32_t>(ds.pairs.size()));
    for (const auto& p : ds.pairs) {
        w.u8(p.style);
        w.u32(p.episode);
        w.f32s(p.cond);
        w.f32s(p.chunk);
    }
    return w.data();
}

Dataset decode_dataset(std::string_view bytes) {
    ByteReader r(bytes, "dataset");
    if (bytes.size() < 4 || r.bytes(4) != kDatasetMagic) {
        throw ArtifactError("bad dataset header: magic bytes are not GTDS");
    }
    if (r.u32() != kDatasetVersion) {
        throw ArtifactError("bad dataset header: unsupported version");
    }
    Dataset ds;
    const auto id_len = r.u32();
    ds.env_id = std::string(r.bytes(id_len));
    ds.seed = r.u64();
    ds.cond_dim = r.u32();
    ds.chunk_dim = r.u32();
    ds.action_horizon = r.u32();
    ds.action_dim = r.u32();
    const auto n = r.u32();
    ds.pairs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        DataPair p;
        p.style = r.u8();
        p.episode = r.u32();
        p.cond = r.f32s(ds.cond_dim);
        p.chunk = r.f32s(ds.chunk_dim);
        ds.pairs.push_back(std::move(p));
    }
    if (!r.at_end()) {
        throw ArtifactError("dataset: trailing bytes");
    }
    return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) { write_file_atomic(path, encode_dataset(ds)); }

Dataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

} // namespace gt
