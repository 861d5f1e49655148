#include "gaitformer/data/synth.hpp"
#include "gaitformer/errors.hpp"
#include "gaitformer/eval.hpp"
#include "gaitformer/random.hpp"

#include "json.hpp"
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace gaitformer;
using namespace gaitformer::eval;

namespace {

std::vector<SegmentResult> results(std::initializer_list<double> probs) {
    std::vector<SegmentResult> out;
    for (const double p : probs) out.push_back({p, segment_vote(p)});
    return out;
}

data::Segment seg(const std::string& walk, int label) {
    data::Segment s;
    s.walk_ref = walk;
    s.subject_ref = walk.substr(0, 6);
    s.label = label;
    return s;
}

FoldResult fold_with(std::size_t fold, ConfusionCounts c) {
    FoldResult f;
    f.fold = fold;
    f.counts = c;
    f.metrics = metrics(c);
    f.test_segments = 10;
    f.correct_segments = 7;
    f.segment_accuracy = 0.7;
    return f;
}

} // namespace

TEST(Vote, ThresholdIsInclusive) {
    EXPECT_EQ(segment_vote(0.5), 1);
    EXPECT_EQ(segment_vote(std::nextafter(0.5, 0.0)), 0);
}

TEST(Vote, MajorityAndTieRule) {
    EXPECT_EQ(majority_vote(results({0.9, 0.8, 0.1})), 1);
    EXPECT_EQ(majority_vote(results({0.9, 0.1})), 1);
    EXPECT_EQ(majority_vote(results({0.6, 0.2})), 0);
    EXPECT_EQ(majority_vote(results({0.2, 0.3, 0.9})), 0);
    EXPECT_EQ(majority_vote(results({0.5, 0.5})), 1);
    EXPECT_THROW(majority_vote(results({})), DataError);
}

TEST(Metrics, WorkedExamples) {
    const auto perfect = metrics({214, 0, 92, 0});
    EXPECT_EQ(perfect.sensitivity, 1.0);
    EXPECT_EQ(perfect.specificity, 1.0);
    EXPECT_EQ(perfect.accuracy, 1.0);
    const auto m = metrics({9, 1, 8, 2});
    EXPECT_DOUBLE_EQ(*m.sensitivity, 0.9);
    EXPECT_DOUBLE_EQ(*m.specificity, 0.8);
    EXPECT_DOUBLE_EQ(*m.accuracy, 0.85);
}

TEST(Metrics, UndefinedRatiosAreAbsent) {
    const auto only_controls = metrics({0, 0, 5, 1});
    EXPECT_FALSE(only_controls.sensitivity.has_value());
    EXPECT_DOUBLE_EQ(*only_controls.specificity, 5.0 / 6.0);
    const auto nothing = metrics({});
    EXPECT_FALSE(nothing.sensitivity || nothing.specificity || nothing.accuracy);
}

TEST(Metrics, RandomPredictionsMatchBruteForce) {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<int> truth(n), pred(n);
        ConfusionCounts c;
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.below(2));
            pred[i] = static_cast<int>(rng.below(2));
            c.add(truth[i], pred[i]);
        }
        std::size_t pos = 0, hit_pos = 0, neg = 0, hit_neg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            (truth[i] ? pos : neg)++;
            if (truth[i] && pred[i]) ++hit_pos;
            if (!truth[i] && !pred[i]) ++hit_neg;
        }
        const auto m = metrics(c);
        ASSERT_EQ(c.total(), n);
        ASSERT_EQ(m.sensitivity.has_value(), pos > 0);
        ASSERT_EQ(m.specificity.has_value(), neg > 0);
        if (pos) {
            ASSERT_DOUBLE_EQ(*m.sensitivity, static_cast<double>(hit_pos) / pos);
        }
        if (neg) {
            ASSERT_DOUBLE_EQ(*m.specificity, static_cast<double>(hit_neg) / neg);
        }
        ASSERT_EQ(std::llround(*m.accuracy * static_cast<double>(n)), static_cast<long long>(hit_pos + hit_neg));
        if (pos && neg) {
            ASSERT_NEAR(*m.accuracy, (*m.sensitivity * pos + *m.specificity * neg) / n, 1e-15);
        }

        // Order of predictions does not matter.
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm.begin(), perm.end());
        ConfusionCounts shuffled;
        for (const auto i : perm) shuffled.add(truth[i], pred[i]);
        ASSERT_EQ(shuffled, c);
    }
}

TEST(Walks, GroupedInFirstAppearanceOrder) {
    const std::vector<data::Segment> segs{seg("GaPt01_01", 1), seg("GaCo02_01", 0), seg("GaPt01_01", 1),
                                          seg("GaCo02_01", 0), seg("GaPt01_01", 1)};
    const std::vector<double> probs{0.9, 0.2, 0.4, 0.6, 0.7};
    const auto walks = vote_walks(segs, probs);
    ASSERT_EQ(walks.size(), 2u);
    EXPECT_EQ(walks[0].walk_id, "GaPt01_01");
    EXPECT_EQ(walks[0].segments, 3u);
    EXPECT_EQ(walks[0].positive_votes, 2u);
    EXPECT_EQ(walks[0].predicted, 1);
    EXPECT_EQ(walks[0].truth, 1);
    EXPECT_EQ(walks[1].predicted, 0); // tie, mean 0.4
    EXPECT_NEAR(walks[1].mean_probability, 0.4, 1e-15);
    EXPECT_THROW(vote_walks(segs, std::vector<double>{0.5}), Error);
}

TEST(Aggregate, MeanSdOverDefinedFolds) {
    EvalReport r;
    r.folds = {fold_with(0, {9, 1, 8, 2}), fold_with(1, {10, 0, 10, 0}), fold_with(2, {0, 0, 4, 1})};
    aggregate_folds(r);
    EXPECT_EQ(r.sensitivity.n, 2u);
    EXPECT_DOUBLE_EQ(r.sensitivity.mean, 0.95);
    EXPECT_NEAR(r.sensitivity.sd, 0.05, 1e-15);
    EXPECT_EQ(r.accuracy.n, 3u);
    EXPECT_EQ(r.pooled, (ConfusionCounts{19, 1, 22, 3}));
    EXPECT_DOUBLE_EQ(r.pooled_segment_accuracy, 0.7);
    const auto none = mean_sd(std::vector<double>{});
    EXPECT_TRUE(std::isnan(none.mean));
}

TEST(Report, JsonIsParseableWithNullForUndefined) {
    EvalReport r;
    r.variant = "C";
    r.k = 2;
    r.folds = {fold_with(0, {0, 0, 4, 1}), fold_with(1, {3, 1, 2, 0})};
    aggregate_folds(r);
    const auto text = report_json(r);
    EXPECT_EQ(text, report_json(r));
    const auto j = nlohmann::json::parse(text);
    EXPECT_TRUE(j["folds"][0]["sensitivity"].is_null());
    EXPECT_DOUBLE_EQ(j["folds"][1]["sensitivity"].get<double>(), 0.75);
    EXPECT_NE(report_table(r).find("Se%"), std::string::npos);
}

TEST(CrossVal, TinyRunIsReproducibleAndLeakFree) {
    data::SynthOptions o;
    o.subjects_per_class = 3;
    o.duration_s = 3;
    o.seed = 4;
    const auto walks = data::synth_dataset(o);
    CrossValOptions opt;
    opt.variant = model::Variant::C;
    opt.k = 3;
    opt.seed = 11;
    opt.train.max_epochs = 2;
    opt.train.early_stop_patience = 2;
    const auto a = cross_validate(walks, opt);
    const auto b = cross_validate(walks, opt);
    EXPECT_EQ(report_json(a), report_json(b));
    ASSERT_EQ(a.folds.size(), 3u);
    std::vector<std::string> tested;
    for (const auto& f : a.folds) {
        EXPECT_EQ(f.counts.total(), 2u);
        tested.insert(tested.end(), f.test_subjects.begin(), f.test_subjects.end());
    }
    std::sort(tested.begin(), tested.end());
    EXPECT_EQ(std::adjacent_find(tested.begin(), tested.end()), tested.end());
    EXPECT_EQ(tested.size(), 6u);
    opt.k = 1;
    EXPECT_THROW(cross_validate(walks, opt), ConfigError);
}
