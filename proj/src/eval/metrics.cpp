#include "gaitformer/errors.hpp"
#include "gaitformer/eval.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace gaitformer::eval {

int segment_vote(double probability) { return probability >= 0.5 ? 1 : 0; }

SegmentResult classify_segment(const model::GaitformerModel& model, const data::Segment& segment) {
    if (segment.channels != model::kSensors || segment.length != model.segment_length() ||
        segment.values.size() != segment.channels * segment.length) {
        throw ShapeError("segment of " + std::to_string(segment.channels) + "x" + std::to_string(segment.length) +
                         " does not fit a model expecting 18x" + std::to_string(model.segment_length()));
    }
    const auto p = train::predict_probabilities(model, std::span(&segment, 1), 1);
    return {p[0], segment_vote(p[0])};
}

int majority_vote(std::span<const SegmentResult> results) {
    if (results.empty()) {
        throw DataError("majority vote over zero segments");
    }
    std::size_t positive = 0;
    double sum = 0.0;
    for (const auto& r : results) {
        positive += static_cast<std::size_t>(r.vote == 1);
        sum += r.probability;
    }
    const std::size_t negative = results.size() - positive;
    if (positive != negative) {
        return positive > negative ? 1 : 0;
    }
    return sum / static_cast<double>(results.size()) >= 0.5 ? 1 : 0;
}

void ConfusionCounts::add(int truth, int predicted) {
    if (truth == 1) {
        ++(predicted == 1 ? tp : fn);
    } else {
        ++(predicted == 1 ? fp : tn);
    }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
}

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    if (c.tp + c.fn > 0) {
        m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (c.tn + c.fp > 0) {
        m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    }
    if (c.total() > 0) {
        m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    }
    return m;
}

std::vector<WalkPrediction> vote_walks(std::span<const data::Segment> segments,
                                       std::span<const double> probabilities) {
    if (segments.size() != probabilities.size()) {
        throw ShapeError("vote_walks: " + std::to_string(segments.size()) + " segments, " +
                         std::to_string(probabilities.size()) + " probabilities");
    }
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<SegmentResult>> per_walk;
    std::vector<WalkPrediction> out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        auto [it, inserted] = index.try_emplace(s.walk_ref, out.size());
        if (inserted) {
            WalkPrediction w;
            w.walk_id = s.walk_ref;
            w.subject_id = s.subject_ref;
            w.truth = s.label;
            out.push_back(w);
            per_walk.emplace_back();
        } else if (out[it->second].truth != s.label) {
            throw DataError("walk " + s.walk_ref + " has segments with different labels");
        }
        per_walk[it->second].push_back({probabilities[i], segment_vote(probabilities[i])});
    }
    for (std::size_t w = 0; w < out.size(); ++w) {
        const auto& results = per_walk[w];
        double sum = 0.0;
        for (const auto& r : results) {
            sum += r.probability;
            out[w].positive_votes += static_cast<std::size_t>(r.vote);
        }
        out[w].segments = results.size();
        out[w].mean_probability = sum / static_cast<double>(results.size());
        out[w].predicted = majority_vote(results);
    }
    return out;
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd r;
    r.n = values.size();
    if (values.empty()) {
        r.mean = r.sd = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    double sum = 0.0;
    for (const double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(sq / static_cast<double>(values.size()));
    return r;
}

void aggregate_folds(EvalReport& report) {
    std::vector<double> se;
    std::vector<double> sp;
    std::vector<double> acc;
    report.pooled = {};
    std::size_t segments = 0;
    std::size_t correct = 0;
    for (const auto& f : report.folds) {
        if (f.metrics.sensitivity) se.push_back(*f.metrics.sensitivity);
        if (f.metrics.specificity) sp.push_back(*f.metrics.specificity);
        if (f.metrics.accuracy) acc.push_back(*f.metrics.accuracy);
        report.pooled += f.counts;
        segments += f.test_segments;
        correct += f.correct_segments;
    }
    report.sensitivity = mean_sd(se);
    report.specificity = mean_sd(sp);
    report.accuracy = mean_sd(acc);
    report.pooled_segment_accuracy =
        segments == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : static_cast<double>(correct) / static_cast<double>(segments);
}

} // namespace gaitformer::eval
