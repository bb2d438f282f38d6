#pragma once

#include "staug/gt/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace staug {
class Rng;
}

namespace staug::pipeline {

struct BenchmarkOptions {
    std::size_t n_molecules = 2000;
    int n_tasks = 6;
    double sparsity = 0.6;
    // Noise standard deviation as a fraction of each clean target's std.
    double noise_sd = 0.1;
    std::uint64_t seed = 0;
    // "intensive": terms from benchmark_feature_pool(). "descriptor": terms
    // are raw schema descriptors, i.e. exactly what the teachers see.
    std::string task_family = "intensive";
    void validate() const;
};

struct BenchmarkTerm {
    std::string feature; // a pool feature name, see benchmark_feature_pool()
    double coef = 0.0;
};

struct BenchmarkTask {
    std::string name;
    std::vector<BenchmarkTerm> linear;
    // Mild nonlinearity on one standardized pool feature: "tanh", "sin" or "square".
    std::string nonlinear;
    std::string nonlinear_feature;
    double nonlinear_coef = 0.0;
    double offset = 0.0;
    double scale = 1.0;
    double noise_abs = 0.0;
};

struct Benchmark {
    BenchmarkOptions options;
    std::vector<std::string> smiles; // canonical
    std::vector<BenchmarkTask> tasks;
    gt::Mat clean;
    gt::Mat noisy;
    gt::MaskMat observed;
};

// Intensive descriptor combinations the tasks draw from (size-normalised
// counts and a few per-atom averages).
const std::vector<std::string>& benchmark_feature_pool();
const std::vector<std::string>& benchmark_descriptor_pool();

// Random connected C/N/O/S molecule with 4..20 heavy atoms, as canonical
// SMILES. Occasionally seeded from an aromatic ring template.
std::string random_molecule(Rng& rng);

Benchmark generate_benchmark(const BenchmarkOptions& opts);

// Writes data.csv (smiles + task columns, empty = unobserved), truth.csv
// (noise-free values for every row) and tasks.json.
void write_benchmark(const Benchmark& b, const std::filesystem::path& dir);

} // namespace staug::pipeline
