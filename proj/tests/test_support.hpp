#pragma once

#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "staug/common/error.hpp"
#include "staug/common/rng.hpp"

#ifndef STAUG_TEST_DATA_DIR
#error "STAUG_TEST_DATA_DIR must be defined by the build"
#endif

namespace staug::test {

inline std::vector<std::string> load_corpus(const std::string& name = "smiles_corpus.txt")
{
    std::ifstream in(std::string(STAUG_TEST_DATA_DIR) + "/" + name);
    if (!in) {
        throw IoError("missing test corpus " + name);
    }
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        out.push_back(line);
    }
    return out;
}

inline std::vector<int> random_permutation(int n, Rng& rng)
{
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    rng.shuffle(std::span<int>(p));
    return p;
}

} // namespace staug::test
