#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace crispnam {

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified k-fold over event labels: within each class, fold sizes differ by
// at most one. Classes with fewer members than folds are distributed
// round-robin and reported through `warnings`. Deterministic given seed; both
// index lists come back sorted.
std::vector<FoldSplit> stratified_kfold(const std::vector<int>& events, int folds,
                                        std::uint64_t seed,
                                        std::vector<std::string>* warnings = nullptr);

// Single stratified holdout split (used for early-stopping validation).
FoldSplit stratified_holdout(const std::vector<int>& events, double test_fraction,
                             std::uint64_t seed);

} // namespace crispnam
