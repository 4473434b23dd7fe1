#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gt/nn.hpp"

namespace gt {

inline constexpr std::string_view kCheckpointMagic = "GTCK";
inline constexpr std::string_view kTrailerMagic = "GTTR";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Model metadata stored after the layer blocks. See docs/checkpoint_format.md.
struct CheckpointTrailer {
    std::uint32_t chunk_dim = 0;      // flattened action chunk width D
    std::uint32_t cond_dim = 0;       // observation width C
    std::uint32_t action_horizon = 0; // H steps per chunk
    std::uint32_t action_dim = 0;     // per-step action width, H * action_dim == D
    std::uint32_t default_num_steps = 8;
    std::vector<float> cond_offset;   // C entries; normalized = (obs - offset) / scale
    std::vector<float> cond_scale;    // C entries
    std::uint64_t config_digest = 0;

    bool operator==(const CheckpointTrailer&) const = default;
};

std::string encode_checkpoint(const MlpParams& params, const CheckpointTrailer& trailer);

struct DecodedCheckpoint {
    MlpParams params;
    CheckpointTrailer trailer;
};

/// Throws ArtifactError ("bad checkpoint header", truncation, inconsistent dims).
DecodedCheckpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::string& path, const MlpParams& params, const CheckpointTrailer& trailer);
DecodedCheckpoint load_checkpoint(const std::string& path);

} // namespace gt
