#include "staug/pipeline/cv_plan.hpp"

#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/rng.hpp"

#include <numeric>

namespace staug::pipeline {

std::vector<std::size_t> CvPlan::test_rows(std::size_t seed_index, int fold) const
{
    std::vector<std::size_t> out;
    const auto& a = assignment.at(seed_index);
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r] == fold) {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<std::size_t> CvPlan::train_rows(std::size_t seed_index, int fold) const
{
    std::vector<std::size_t> out;
    const auto& a = assignment.at(seed_index);
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r] != fold) {
            out.push_back(r);
        }
    }
    return out;
}

std::string CvPlan::hash() const
{
    Fnv1a h;
    h.update_u64(n_rows);
    h.update_u64(static_cast<std::uint64_t>(k));
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        h.update_u64(seeds[s]);
        for (int f : assignment[s]) {
            h.update_u64(static_cast<std::uint64_t>(f));
        }
    }
    return h.hex();
}

CvPlan make_cv_plan(std::size_t n_rows, const std::vector<std::uint64_t>& seeds, int k)
{
    if (k < 2) {
        throw PreconditionError("k must be at least 2");
    }
    if (n_rows < static_cast<std::size_t>(k)) {
        throw TooFewRows(std::to_string(n_rows) + " rows for " + std::to_string(k) + " folds");
    }
    if (seeds.empty()) {
        throw PreconditionError("empty seed list");
    }
    CvPlan plan;
    plan.n_rows = n_rows;
    plan.k = k;
    plan.seeds = seeds;
    const std::size_t base = n_rows / static_cast<std::size_t>(k);
    const std::size_t extra = n_rows % static_cast<std::size_t>(k);
    for (auto seed : seeds) {
        std::vector<std::size_t> order(n_rows);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, {0x6376, static_cast<std::uint64_t>(k)}));
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<int> fold_of(n_rows);
        std::size_t pos = 0;
        for (int f = 0; f < k; ++f) {
            const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
            for (std::size_t i = 0; i < size; ++i) {
                fold_of[order[pos++]] = f;
            }
        }
        plan.assignment.push_back(std::move(fold_of));
    }
    return plan;
}

} // namespace staug::pipeline
