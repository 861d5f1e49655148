#pragma once

#include "gaitformer/data/walk.hpp"

#include <span>
#include <vector>

namespace gaitformer::data {

// Per-channel range observed on a training split.
struct NormalizationStats {
    std::vector<double> min;
    std::vector<double> max;

    bool empty() const { return min.empty(); }
};

// Throws DataError on an empty training set.
NormalizationStats fit_normalization(std::span<const WalkRecord> train_walks);

// (x - min) / (max - min) per channel; constant channels map to 0. Values
// outside the training range are passed through unclamped.
WalkRecord apply_normalization(const WalkRecord& walk, const NormalizationStats& stats);

} // namespace gaitformer::data
