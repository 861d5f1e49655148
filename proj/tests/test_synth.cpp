#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/data/synth.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace gaitformer;
using namespace gaitformer::data;

TEST(Synth, ShapeAndIdentity) {
    SynthOptions o;
    o.subjects_per_class = 4;
    o.duration_s = 10;
    o.seed = 1;
    const auto walks = synth_dataset(o);
    ASSERT_EQ(walks.size(), 8u);
    std::set<std::string> ids;
    int pd = 0;
    for (const auto& w : walks) {
        EXPECT_EQ(w.duration_samples(), 1000u);
        EXPECT_EQ(w.channels.size(), 18u);
        EXPECT_TRUE(is_walk_filename(w.walk_id() + ".txt"));
        ids.insert(w.subject_id);
        pd += w.label();
        for (const auto& ch : w.channels) {
            for (const double v : ch) EXPECT_GE(v, 0.0);
        }
    }
    EXPECT_EQ(ids.size(), 8u);
    EXPECT_EQ(pd, 4);
}

TEST(Synth, DeterministicBySeed) {
    SynthOptions o;
    o.subjects_per_class = 2;
    o.duration_s = 5;
    o.seed = 9;
    const auto a = synth_dataset(o), b = synth_dataset(o);
    EXPECT_EQ(a[1].channels, b[1].channels);
    o.seed = 10;
    EXPECT_NE(a[1].channels, synth_dataset(o)[1].channels);
}

TEST(Synth, TotalsTrackFootSensorSums) {
    SynthOptions o;
    o.subjects_per_class = 1;
    o.duration_s = 20;
    const auto w = synth_dataset(o)[0];
    for (std::size_t f = 0; f < 2; ++f) {
        double sensors = 0, total = 0;
        for (std::size_t t = 0; t < w.duration_samples(); ++t) {
            for (std::size_t j = 0; j < 8; ++j) sensors += w.channels[f * 8 + j][t];
            total += w.channels[16 + f][t];
        }
        EXPECT_NEAR(total / sensors, 1.0, 0.05);
    }
}

TEST(Synth, SeparationShiftsGaitParameters) {
    Rng rng(3);
    double pd_period = 0, co_period = 0, pd_stance = 0, co_stance = 0;
    for (int i = 0; i < 200; ++i) {
        const auto pd = draw_synth_gait(Group::parkinson, 1.0, rng);
        const auto co = draw_synth_gait(Group::control, 1.0, rng);
        pd_period += pd.stride_period_s;
        co_period += co.stride_period_s;
        pd_stance += pd.stance_fraction;
        co_stance += co.stance_fraction;
    }
    EXPECT_LT(pd_period, co_period);
    EXPECT_GT(pd_stance, co_stance);
    Rng r1(4), r2(4);
    const auto a = draw_synth_gait(Group::parkinson, 0.0, r1);
    const auto b = draw_synth_gait(Group::control, 0.0, r2);
    EXPECT_EQ(a.stride_period_s, b.stride_period_s);
    EXPECT_EQ(a.flatness, b.flatness);
}

TEST(Synth, ThirtySecondWalkSegmentCount) {
    SynthOptions o;
    o.subjects_per_class = 1;
    const auto walks = synth_dataset(o);
    EXPECT_EQ(segment_walk(walks[0], 100, 50).size(), 59u);
}
