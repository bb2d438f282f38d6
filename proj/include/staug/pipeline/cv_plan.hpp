#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace staug::pipeline {

inline const std::vector<std::uint64_t> kDefaultSeeds{3, 5, 7, 13, 42};

struct CvPlan {
    std::size_t n_rows = 0;
    int k = 5;
    std::vector<std::uint64_t> seeds;
    // assignment[s][row] = fold of row under seeds[s]
    std::vector<std::vector<int>> assignment;

    std::vector<std::size_t> test_rows(std::size_t seed_index, int fold) const;
    std::vector<std::size_t> train_rows(std::size_t seed_index, int fold) const;
    std::string hash() const;
};

// Per seed: uniform shuffle of the row indices, then a contiguous chop into
// k folds (the first n % k folds get one extra row). Throws TooFewRows when
// n_rows < k.
CvPlan make_cv_plan(std::size_t n_rows, const std::vector<std::uint64_t>& seeds, int k = 5);

} // namespace staug::pipeline
