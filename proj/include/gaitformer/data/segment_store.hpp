#pragma once

#include "gaitformer/data/segmentation.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gaitformer::data {

inline constexpr std::uint32_t kSegmentStoreVersion = 1;

// Columnar binary cache of segments; layout in docs/FORMATS.md.
void write_segment_store(const std::filesystem::path& path, std::span<const Segment> segments);
std::vector<Segment> read_segment_store(const std::filesystem::path& path);

} // namespace gaitformer::data
