#pragma once

#include "gaitformer/data/walk.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gaitformer::data {

// One window of a walk, channel-major: values[c * length + t].
struct Segment {
    std::vector<double> values;
    std::size_t channels = kChannelCount;
    std::size_t length = 0;
    int label = 0; // 1 Parkinson, 0 control
    std::string walk_ref;
    std::string subject_ref;
    std::size_t start_sample = 0;
};

// floor((T - window) / stride) + 1 for T >= window, else 0.
std::size_t segment_count(std::size_t total, std::size_t window, std::size_t stride);

// Windows starting at 0, stride, 2*stride, ...; a trailing partial window is
// dropped. Throws DataError unless window >= 1 and 1 <= stride <= window.
std::vector<Segment> segment_walk(const WalkRecord& walk, std::size_t window, std::size_t stride);

std::vector<Segment> segment_walks(std::span<const WalkRecord> walks, std::size_t window,
                                   std::size_t stride);

} // namespace gaitformer::data
