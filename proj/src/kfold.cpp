#include "crispnam/kfold.hpp"

#include "crispnam/common.hpp"
#include "crispnam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace crispnam {

std::vector<FoldSplit> stratified_kfold(const std::vector<int>& events, int folds,
                                        std::uint64_t seed,
                                        std::vector<std::string>* warnings) {
    require(folds >= 2, "folds must be >= 2");
    require(static_cast<std::size_t>(folds) <= events.size(),
            "folds (" + std::to_string(folds) + ") exceeds dataset size (" +
                std::to_string(events.size()) + ")");

    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < events.size(); ++i) classes[events[i]].push_back(i);

    Rng rng = substream(seed, "kfold");
    std::vector<std::vector<std::size_t>> test_folds(static_cast<std::size_t>(folds));
    for (auto& [label, idx] : classes) {
        if (idx.size() < static_cast<std::size_t>(folds) && warnings)
            warnings->push_back("event class " + std::to_string(label) + " has only " +
                                std::to_string(idx.size()) + " members for " +
                                std::to_string(folds) + " folds; stratification degrades to "
                                "round-robin for this class");
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            test_folds[i % static_cast<std::size_t>(folds)].push_back(idx[i]);
    }

    std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
    for (std::size_t f = 0; f < out.size(); ++f) {
        out[f].test = test_folds[f];
        std::sort(out[f].test.begin(), out[f].test.end());
        for (std::size_t g = 0; g < out.size(); ++g)
            if (g != f)
                out[f].train.insert(out[f].train.end(), test_folds[g].begin(),
                                    test_folds[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
    }
    return out;
}

FoldSplit stratified_holdout(const std::vector<int>& events, double test_fraction,
                             std::uint64_t seed) {
    require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must be in (0,1)");
    std::map<int, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < events.size(); ++i) classes[events[i]].push_back(i);

    Rng rng = substream(seed, "holdout");
    FoldSplit split;
    for (auto& [label, idx] : classes) {
        (void)label;
        rng.shuffle(idx);
        // round up so small classes keep at least one test member
        std::size_t n_test = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(idx.size()) - 1.0,
                             std::ceil(test_fraction * static_cast<double>(idx.size()))));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? split.test : split.train).push_back(idx[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace crispnam
