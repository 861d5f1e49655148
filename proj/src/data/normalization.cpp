#include "gaitformer/data/normalization.hpp"

#include "gaitformer/errors.hpp"

#include <algorithm>
#include <limits>

namespace gaitformer::data {

NormalizationStats fit_normalization(std::span<const WalkRecord> train_walks) {
    if (train_walks.empty()) {
        throw DataError("cannot fit normalization on an empty training set");
    }
    NormalizationStats stats;
    stats.min.assign(kChannelCount, std::numeric_limits<double>::infinity());
    stats.max.assign(kChannelCount, -std::numeric_limits<double>::infinity());
    for (const auto& walk : train_walks) {
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            for (const double v : walk.channels[c]) {
                stats.min[c] = std::min(stats.min[c], v);
                stats.max[c] = std::max(stats.max[c], v);
            }
        }
    }
    return stats;
}

WalkRecord apply_normalization(const WalkRecord& walk, const NormalizationStats& stats) {
    if (stats.min.size() != kChannelCount || stats.max.size() != kChannelCount) {
        throw DataError("normalization statistics must cover 18 channels");
    }
    WalkRecord out = walk;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const double range = stats.max[c] - stats.min[c];
        for (auto& v : out.channels[c]) {
            v = range > 0.0 ? (v - stats.min[c]) / range : 0.0;
        }
    }
    return out;
}

} // namespace gaitformer::data
