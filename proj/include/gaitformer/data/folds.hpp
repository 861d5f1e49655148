#pragma once

#include "gaitformer/data/segmentation.hpp"
#include "gaitformer/data/walk.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gaitformer::data {

struct SubjectInfo {
    std::string id;
    Group group = Group::control;

    bool operator==(const SubjectInfo&) const = default;
};

// Distinct subjects sorted by id. Throws DataError if one subject's walks
// disagree on the group.
std::vector<SubjectInfo> subjects_of(std::span<const WalkRecord> walks);

struct FoldPlan {
    std::size_t k = 0;
    std::map<std::string, std::size_t> assignments; // subject id -> fold
    std::uint64_t seed = 0;

    std::vector<std::string> fold_subjects(std::size_t fold) const;
};

// Class-stratified subject-level folds: each class is shuffled by the seed and
// dealt round-robin, the deal continuing across classes so fold sizes differ
// by at most one. Throws DataError when a class has fewer than k subjects.
FoldPlan build_folds(std::span<const SubjectInfo> subjects, std::size_t k, std::uint64_t seed);

struct ValidationSplit {
    std::vector<SubjectInfo> train;
    std::vector<SubjectInfo> validation;
};

// Class-stratified subject holdout of round(fraction * n) subjects, shared
// between classes by largest remainder, with at least one per class.
ValidationSplit validation_split(std::span<const SubjectInfo> subjects, double fraction,
                                 std::uint64_t seed);

// Subject ids that occur in both segment sets.
std::vector<std::string> leaked_subjects(std::span<const Segment> train, std::span<const Segment> test);

} // namespace gaitformer::data
