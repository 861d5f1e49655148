#include "gaitformer/data/segment_store.hpp"
#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace gaitformer;
using namespace gaitformer::data;

namespace {

WalkRecord ramp_walk(std::size_t samples, Group group = Group::parkinson) {
    WalkRecord w;
    w.subject_id = group == Group::parkinson ? "GaPt01" : "GaCo01";
    w.group = group;
    w.walk_index = 1;
    w.channels.assign(kChannelCount, std::vector<double>(samples));
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        for (std::size_t t = 0; t < samples; ++t) w.channels[c][t] = static_cast<double>(c * 100000 + t);
    }
    return w;
}

// Counts window starts by walking every start position.
std::size_t enumerate_windows(std::size_t total, std::size_t window, std::size_t stride) {
    std::size_t n = 0;
    for (std::size_t start = 0; start + window <= total; start += stride) ++n;
    return n;
}

} // namespace

TEST(Segmentation, CountFormula) {
    EXPECT_EQ(segment_count(1000, 100, 50), 19u);
    EXPECT_EQ(segment_count(99, 100, 50), 0u);
    EXPECT_EQ(segment_count(100, 100, 50), 1u);
    EXPECT_EQ(segment_count(149, 100, 50), 1u);
    EXPECT_EQ(segment_count(150, 100, 50), 2u);
}

TEST(Segmentation, CountMatchesEnumerationForRandomTriples) {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        const std::size_t window = 1 + rng.below(200);
        const std::size_t stride = 1 + rng.below(window);
        const std::size_t total = rng.below(2000);
        ASSERT_EQ(segment_count(total, window, stride), enumerate_windows(total, window, stride))
            << total << " " << window << " " << stride;
    }
}

TEST(Segmentation, WindowsAreChannelMajorSlices) {
    const auto segs = segment_walk(ramp_walk(260), 100, 50);
    ASSERT_EQ(segs.size(), 4u);
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        EXPECT_EQ(s.start_sample, 50 * k);
        EXPECT_EQ(s.length, 100u);
        EXPECT_EQ(s.label, 1);
        EXPECT_EQ(s.walk_ref, "GaPt01_01");
        EXPECT_EQ(s.subject_ref, "GaPt01");
        for (const std::size_t c : {0u, 7u, 17u}) {
            for (const std::size_t t : {0u, 42u, 99u}) {
                EXPECT_EQ(s.values[c * 100 + t], static_cast<double>(c * 100000 + s.start_sample + t));
            }
        }
    }
}

TEST(Segmentation, RejectsBadGeometry) {
    const auto w = ramp_walk(300);
    EXPECT_THROW(segment_walk(w, 0, 1), DataError);
    EXPECT_THROW(segment_walk(w, 100, 0), DataError);
    EXPECT_THROW(segment_walk(w, 100, 101), DataError);
}

TEST(Segmentation, ShortWalkGivesNothing) { EXPECT_TRUE(segment_walk(ramp_walk(60), 100, 50).empty()); }

TEST(Segmentation, MultipleWalksConcatenate) {
    const std::vector<WalkRecord> walks{ramp_walk(300), ramp_walk(200, Group::control)};
    const auto segs = segment_walks(walks, 100, 50);
    EXPECT_EQ(segs.size(), 5u + 3u);
    EXPECT_EQ(segs.back().label, 0);
}

TEST(SegmentStore, RoundTrip) {
    const auto segs = segment_walk(ramp_walk(400), 100, 50);
    const auto path = std::filesystem::temp_directory_path() / "gaitformer_segments.bin";
    write_segment_store(path, segs);
    const auto back = read_segment_store(path);
    ASSERT_EQ(back.size(), segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        EXPECT_EQ(back[i].values, segs[i].values);
        EXPECT_EQ(back[i].walk_ref, segs[i].walk_ref);
        EXPECT_EQ(back[i].subject_ref, segs[i].subject_ref);
        EXPECT_EQ(back[i].start_sample, segs[i].start_sample);
        EXPECT_EQ(back[i].label, segs[i].label);
    }
}

TEST(SegmentStore, RejectsForeignFile) {
    const auto path = std::filesystem::temp_directory_path() / "gaitformer_not_segments.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a segment store";
    }
    EXPECT_THROW(read_segment_store(path), Error);
}
