#pragma once

#include "gaitformer/data/walk.hpp"
#include "gaitformer/random.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gaitformer::data {

struct SynthOptions {
    std::size_t subjects_per_class = 8;
    double duration_s = 30.0;
    std::uint64_t seed = 0;
    // 0 gives statistically identical classes; 1 gives clearly separated ones.
    double separation = 1.0;
};

// Subject-level gait parameters drawn by the generator.
struct SynthGait {
    double stride_period_s = 1.1;
    double stance_fraction = 0.6;
    double flatness = 0.0; // 0 heel-to-toe roll, 1 flat foot strike
    double body_weight_n = 700.0;
};

// One walk per subject. Studies cycle Ga, Ju, Si so every walk has a
// convention file name. Each foot carries 8 pressure sensors loaded in
// half-sine stance bursts that roll from heel to toe, plus the two foot
// totals; Gaussian noise is added and forces are rectified. The Parkinson
// class gets a shorter stride period, a longer stance fraction and a flatter
// strike, each shifted in proportion to `separation`.
std::vector<WalkRecord> synth_dataset(const SynthOptions& options);

SynthGait draw_synth_gait(Group group, double separation, Rng& rng);

} // namespace gaitformer::data
