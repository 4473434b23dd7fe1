#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gt {

/// (observation, next-H-actions) pair. `style` and `episode` record provenance.
struct DataPair {
    std::vector<float> cond;
    std::vector<float> chunk;
    std::uint8_t style = 0;
    std::uint32_t episode = 0;

    bool operator==(const DataPair&) const = default;
};

struct Dataset {
    std::string env_id;
    std::uint64_t seed = 0;
    std::uint32_t cond_dim = 0;
    std::uint32_t chunk_dim = 0;
    std::uint32_t action_horizon = 0;
    std::uint32_t action_dim = 0;
    std::vector<DataPair> pairs;

    /// Throws ValidationError when empty or any pair has the wrong widths.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

inline constexpr std::string_view kDatasetMagic = "GTDS";
inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

} // namespace gt
