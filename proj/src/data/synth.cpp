#include "gaitformer/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace gaitformer::data {

namespace {

constexpr std::size_t kSensorsPerFoot = 8;

// Share of body weight carried by each sensor, heel (0) to toe (7).
constexpr std::array<double, kSensorsPerFoot> kSensorShare = {0.16, 0.14, 0.10, 0.10,
                                                              0.12, 0.14, 0.14, 0.10};
constexpr double kNoiseN = 4.0;
constexpr double kStrideJitter = 0.02;

// Vertical load over one stance phase, progress in [0, 1). A toe-off hump
// on top of the half-sine fades out as the strike flattens; never negative.
double stance_load(double progress, double flatness) {
    const double a = 0.25 * (1.0 - flatness);
    return std::sin(std::numbers::pi * progress) + a * std::sin(3.0 * std::numbers::pi * progress);
}

struct Foot {
    std::vector<double> stride_starts;
    std::vector<double> stride_periods;
};

Foot plan_strides(double first_strike_s, double period_s, double duration_s, Rng& rng) {
    Foot foot;
    double t = first_strike_s - period_s; // cover samples before the first strike
    while (t < duration_s) {
        const double p = period_s * (1.0 + kStrideJitter * rng.normal());
        foot.stride_starts.push_back(t);
        foot.stride_periods.push_back(p);
        t += p;
    }
    return foot;
}

WalkRecord generate_walk(const SynthGait& gait, Study study, Group group, int subject,
                         double duration_s, Rng& rng) {
    WalkRecord walk;
    walk.study = study;
    walk.group = group;
    char id[16];
    std::snprintf(id, sizeof id, "%02d", subject);
    walk.subject_id = std::string(study_code(study)) + std::string(group_code(group)) + id;
    walk.walk_index = 1;
    const auto samples = static_cast<std::size_t>(std::llround(duration_s * kSampleRateHz));
    walk.channels.assign(kChannelCount, std::vector<double>(samples, 0.0));

    std::array<double, kSensorsPerFoot> share{};
    std::array<double, kSensorsPerFoot> centre{};
    for (std::size_t j = 0; j < kSensorsPerFoot; ++j) {
        share[j] = kSensorShare[j] * rng.uniform(0.85, 1.15);
        const double rolling = 0.15 + 0.7 * static_cast<double>(j) / (kSensorsPerFoot - 1);
        centre[j] = 0.5 + (rolling - 0.5) * (1.0 - 0.8 * gait.flatness);
    }
    const double width = 0.18 + 0.25 * gait.flatness;

    const double first = rng.uniform(0.0, gait.stride_period_s);
    std::array<Foot, 2> feet = {
        plan_strides(first, gait.stride_period_s, duration_s, rng),
        plan_strides(first + 0.5 * gait.stride_period_s, gait.stride_period_s, duration_s, rng)};

    for (std::size_t f = 0; f < 2; ++f) {
        const Foot& foot = feet[f];
        std::size_t stride = 0;
        for (std::size_t t = 0; t < samples; ++t) {
            const double time = static_cast<double>(t) / kSampleRateHz;
            while (stride + 1 < foot.stride_starts.size() && foot.stride_starts[stride + 1] <= time) {
                ++stride;
            }
            const double phase = (time - foot.stride_starts[stride]) / foot.stride_periods[stride];
            double total = 0.0;
            for (std::size_t j = 0; j < kSensorsPerFoot; ++j) {
                double force = 0.0;
                if (phase >= 0.0 && phase < gait.stance_fraction) {
                    const double progress = phase / gait.stance_fraction;
                    const double z = (progress - centre[j]) / width;
                    force = gait.body_weight_n * share[j] * stance_load(progress, gait.flatness) *
                            std::exp(-z * z);
                }
                total += force;
                walk.channels[f * kSensorsPerFoot + j][t] =
                    std::max(0.0, force + kNoiseN * rng.normal());
            }
            walk.channels[2 * kSensorsPerFoot + f][t] = std::max(0.0, total + kNoiseN * rng.normal());
        }
    }
    return walk;
}

} // namespace

SynthGait draw_synth_gait(Group group, double separation, Rng& rng) {
    SynthGait gait;
    gait.stride_period_s = rng.uniform(1.04, 1.16);
    gait.stance_fraction = rng.uniform(0.58, 0.64);
    gait.flatness = rng.uniform(0.0, 0.15);
    gait.body_weight_n = rng.uniform(600.0, 800.0);
    if (group == Group::parkinson) {
        gait.stride_period_s *= 1.0 - 0.15 * separation;
        gait.stance_fraction = std::min(0.9, gait.stance_fraction + 0.10 * separation);
        gait.flatness = std::min(1.0, gait.flatness + 0.7 * separation);
    }
    return gait;
}

std::vector<WalkRecord> synth_dataset(const SynthOptions& options) {
    constexpr std::array<Study, 3> studies = {Study::Ga, Study::Ju, Study::Si};
    Rng rng(derive_seed(options.seed, "data.synth"));
    const double separation = std::max(0.0, options.separation);
    std::vector<WalkRecord> walks;
    for (const Group group : {Group::parkinson, Group::control}) {
        for (std::size_t i = 1; i <= options.subjects_per_class; ++i) {
            const SynthGait gait = draw_synth_gait(group, separation, rng);
            walks.push_back(generate_walk(gait, studies[(i - 1) % studies.size()], group,
                                          static_cast<int>(i), options.duration_s, rng));
        }
    }
    return walks;
}

} // namespace gaitformer::data
