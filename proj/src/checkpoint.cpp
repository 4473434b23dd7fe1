#include "gt/checkpoint.hpp"

#include <cmath>

#include "gt/binary_io.hpp"
#include "gt/error.hpp"

namespace gt {

std::string encode_checkpoint(const MlpParams& params, const CheckpointTrailer& trailer) {
    if (trailer.cond_offset.size() != trailer.cond_dim || trailer.cond_scale.size() != trailer.cond_dim) {
        throw DimensionError("checkpoint trailer: normalization length != cond_dim");
    }
    ByteWriter w;
    w.bytes(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& layer : params.layers) {
        w.u32(static_cast<std::uint32_t>(layer.in_dim()));
        w.u32(static_cast<std::uint32_t>(layer.out_dim()));
        w.f32s(layer.weight.values);
        w.f32s(layer.bias);
    }
    w.bytes(kTrailerMagic);
    w.u32(trailer.chunk_dim);
    w.u32(trailer.cond_dim);
    w.u32(trailer.action_horizon);
    w.u32(trailer.action_dim);
    w.u32(trailer.default_num_steps);
    w.f32s(trailer.cond_offset);
    w.f32s(trailer.cond_scale);
    w.u64(trailer.config_digest);
    return w.data();
}

DecodedCheckpoint decode_checkpoint(std::string_view bytes) {
    ByteReader r(bytes, "checkpoint");
    if (bytes.size() < 4 || r.bytes(4) != kCheckpointMagic) {
        throw ArtifactError("bad checkpoint header: magic bytes are not GTCK");
    }
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        throw ArtifactError("bad checkpoint header: unsupported version " + std::to_string(version));
    }
    DecodedCheckpoint out;
    const auto n_layers = r.u32();
    if (n_layers == 0 || n_layers > 64) {
        throw ArtifactError("bad checkpoint header: implausible layer count " + std::to_string(n_layers));
    }
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const auto in = r.u32();
        const auto out_dim = r.u32();
        if (in == 0 || out_dim == 0 || static_cast<std::uint64_t>(in) * out_dim > (1ULL << 28)) {
            throw ArtifactError("checkpoint: implausible layer shape at layer " + std::to_string(l));
        }
        if (l > 0 && out.params.layers.back().out_dim() != in) {
            throw ArtifactError("checkpoint: layer " + std::to_string(l) + " input width does not chain");
        }
        DenseLayer layer;
        layer.weight.rows = in;
        layer.weight.cols = out_dim;
        layer.weight.values = r.f32s(static_cast<std::size_t>(in) * out_dim);
        layer.bias = r.f32s(out_dim);
        out.params.layers.push_back(std::move(layer));
    }
    if (r.bytes(4) != kTrailerMagic) {
        throw ArtifactError("checkpoint: missing trailer");
    }
    auto& t = out.trailer;
    t.chunk_dim = r.u32();
    t.cond_dim = r.u32();
    t.action_horizon = r.u32();
    t.action_dim = r.u32();
    t.default_num_steps = r.u32();
    if (t.cond_dim > (1u << 20)) {
        throw ArtifactError("checkpoint: implausible cond_dim");
    }
    t.cond_offset = r.f32s(t.cond_dim);
    t.cond_scale = r.f32s(t.cond_dim);
    t.config_digest = r.u64();
    if (!r.at_end()) {
        throw ArtifactError("checkpoint: trailing bytes after trailer");
    }
    if (out.params.input_dim() != static_cast<std::size_t>(t.chunk_dim) + t.cond_dim + 1 ||
        out.params.output_dim() != t.chunk_dim || t.action_horizon * t.action_dim != t.chunk_dim) {
        throw ArtifactError("checkpoint: trailer dimensions disagree with network shape");
    }
    for (const auto& layer : out.params.layers) {
        for (float v : layer.weight.values) {
            if (!std::isfinite(v)) {
                throw ArtifactError("checkpoint: non-finite weight");
            }
        }
    }
    return out;
}

void save_checkpoint(const std::string& path, const MlpParams& params, const CheckpointTrailer& trailer) {
    write_file_atomic(path, encode_checkpoint(params, trailer));
}

DecodedCheckpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

} // namespace gt
