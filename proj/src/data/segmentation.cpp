#include "gaitformer/data/segmentation.hpp"

#include "gaitformer/errors.hpp"

namespace gaitformer::data {

namespace {

void check_geometry(std::size_t window, std::size_t stride) {
    if (window < 1 || stride < 1 || stride > window) {
        throw DataError("invalid segmentation: window " + std::to_string(window) + ", stride " +
                        std::to_string(stride) + " (need window >= 1, 1 <= stride <= window)");
    }
}

} // namespace

std::size_t segment_count(std::size_t total, std::size_t window, std::size_t stride) {
    check_geometry(window, stride);
    return total < window ? 0 : (total - window) / stride + 1;
}

std::vector<Segment> segment_walk(const WalkRecord& walk, std::size_t window, std::size_t stride) {
    const std::size_t count = segment_count(walk.duration_samples(), window, stride);
    std::vector<Segment> segments;
    segments.reserve(count);
    const std::string walk_ref = walk.walk_id();
    for (std::size_t s = 0; s < count; ++s) {
        Segment seg;
        seg.channels = walk.channels.size();
        seg.length = window;
        seg.label = walk.label();
        seg.walk_ref = walk_ref;
        seg.subject_ref = walk.subject_id;
        seg.start_sample = s * stride;
        seg.values.resize(seg.channels * window);
        for (std::size_t c = 0; c < seg.channels; ++c) {
            const auto& ch = walk.channels[c];
            std::copy_n(ch.begin() + static_cast<std::ptrdiff_t>(seg.start_sample), window,
                        seg.values.begin() + static_cast<std::ptrdiff_t>(c * window));
        }
        segments.push_back(std::move(seg));
    }
    return segments;
}

std::vector<Segment> segment_walks(std::span<const WalkRecord> walks, std::size_t window,
                                   std::size_t stride) {
    std::vector<Segment> out;
    for (const auto& w : walks) {
        auto segs = segment_walk(w, window, stride);
        out.insert(out.end(), std::make_move_iterator(segs.begin()),
                   std::make_move_iterator(segs.end()));
    }
    return out;
}

} // namespace gaitformer::data
