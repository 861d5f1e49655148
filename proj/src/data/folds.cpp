#include "gaitformer/data/folds.hpp"

#include "gaitformer/errors.hpp"
#include "gaitformer/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace gaitformer::data {

namespace {

std::vector<std::string> ids_in_class(std::span<const SubjectInfo> subjects, Group group) {
    std::vector<std::string> ids;
    for (const auto& s : subjects) {
        if (s.group == group) {
            ids.push_back(s.id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

constexpr std::array<Group, 2> kClassOrder = {Group::parkinson, Group::control};

} // namespace

std::vector<SubjectInfo> subjects_of(std::span<const WalkRecord> walks) {
    std::map<std::string, Group> groups;
    for (const auto& w : walks) {
        const auto [it, inserted] = groups.emplace(w.subject_id, w.group);
        if (!inserted && it->second != w.group) {
            throw DataError("subject " + w.subject_id + " has walks in both groups");
        }
    }
    std::vector<SubjectInfo> out;
    out.reserve(groups.size());
    for (const auto& [id, group] : groups) {
        out.push_back({id, group});
    }
    return out;
}

std::vector<std::string> FoldPlan::fold_subjects(std::size_t fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : assignments) {
        if (f == fold) {
            out.push_back(id);
        }
    }
    return out;
}

FoldPlan build_folds(std::span<const SubjectInfo> subjects, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw DataError("need at least 2 folds, got " + std::to_string(k));
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    Rng rng(derive_seed(seed, "data.folds"));
    std::size_t deal = 0;
    for (const Group group : kClassOrder) {
        auto ids = ids_in_class(subjects, group);
        if (ids.size() < k) {
            throw DataError("class " + std::string(group_code(group)) + " has " +
                            std::to_string(ids.size()) + " subjects, fewer than " +
                            std::to_string(k) + " folds");
        }
        rng.shuffle(ids.begin(), ids.end());
        for (const auto& id : ids) {
            plan.assignments[id] = deal % k;
            ++deal;
        }
    }
    return plan;
}

ValidationSplit validation_split(std::span<const SubjectInfo> subjects, double fraction,
                                 std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DataError("validation fraction must be in (0, 1)");
    }
    std::array<std::vector<std::string>, 2> ids;
    for (std::size_t c = 0; c < 2; ++c) {
        ids[c] = ids_in_class(subjects, kClassOrder[c]);
        if (ids[c].size() < 2) {
            throw DataError("validation split needs at least 2 subjects of class " +
                            std::string(group_code(kClassOrder[c])) + ", got " +
                            std::to_string(ids[c].size()));
        }
    }
    const double total_subjects = static_cast<double>(ids[0].size() + ids[1].size());
    const auto target = static_cast<std::size_t>(std::lround(fraction * total_subjects));

    // Largest-remainder apportionment of `target` between the classes.
    std::array<std::size_t, 2> count{};
    std::array<double, 2> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        const double quota = static_cast<double>(target) * static_cast<double>(ids[c].size()) /
                             total_subjects;
        count[c] = static_cast<std::size_t>(std::floor(quota));
        remainder[c] = quota - std::floor(quota);
        assigned += count[c];
    }
    if (assigned < target) {
        count[remainder[1] > remainder[0] ? 1 : 0] += target - assigned;
    }
    for (std::size_t c = 0; c < 2; ++c) {
        count[c] = std::clamp<std::size_t>(count[c], 1, ids[c].size() - 1);
    }

    ValidationSplit split;
    Rng rng(derive_seed(seed, "data.validation"));
    for (std::size_t c = 0; c < 2; ++c) {
        rng.shuffle(ids[c].begin(), ids[c].end());
        for (std::size_t i = 0; i < ids[c].size(); ++i) {
            SubjectInfo info{ids[c][i], kClassOrder[c]};
            (i < count[c] ? split.validation : split.train).push_back(std::move(info));
        }
    }
    auto by_id = [](const SubjectInfo& a, const SubjectInfo& b) { return a.id < b.id; };
    std::sort(split.train.begin(), split.train.end(), by_id);
    std::sort(split.validation.begin(), split.validation.end(), by_id);
    return split;
}

std::vector<std::string> leaked_subjects(std::span<const Segment> train, std::span<const Segment> test) {
    std::set<std::string> train_ids;
    for (const auto& s : train) {
        train_ids.insert(s.subject_ref);
    }
    std::set<std::string> leaked;
    for (const auto& s : test) {
        if (train_ids.count(s.subject_ref)) {
            leaked.insert(s.subject_ref);
        }
    }
    return {leaked.begin(), leaked.end()};
}

} // namespace gaitformer::data
