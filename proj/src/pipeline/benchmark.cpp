#include "staug/pipeline/benchmark.hpp"

#include "staug/chem/aromaticity.hpp"
#include "staug/chem/element.hpp"
#include "staug/chem/smiles.hpp"
#include "staug/common/csv.hpp"
#include "staug/common/error.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/rng.hpp"
#include "staug/descriptors/descriptors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace staug::pipeline {

namespace {

int max_valence(int z)
{
    switch (z) {
    case chem::elem::C:
        return 4;
    case chem::elem::N:
        return 3;
    default:
        return 2; // O, S
    }
}

struct Proto {
    std::vector<int> elem;
    std::vector<int> used;
    std::vector<bool> locked; // ring template atoms take no extra multiple bonds
    std::vector<std::array<int, 3>> bonds;

    int free(int a) const { return max_valence(elem[static_cast<std::size_t>(a)]) - used[static_cast<std::size_t>(a)]; }
    int size() const { return static_cast<int>(elem.size()); }
    int add_atom(int z, bool lock = false)
    {
        elem.push_back(z);
        used.push_back(0);
        locked.push_back(lock);
        return size() - 1;
    }
    void bond(int a, int b, int order)
    {
        bonds.push_back({a, b, order});
        used[static_cast<std::size_t>(a)] += order;
        used[static_cast<std::size_t>(b)] += order;
    }
    bool bonded(int a, int b) const
    {
        return std::any_of(bonds.begin(), bonds.end(), [&](const auto& x) {
            return (x[0] == a && x[1] == b) || (x[0] == b && x[1] == a);
        });
    }
    std::vector<int> distances_from(int s) const
    {
        std::vector<std::vector<int>> adj(elem.size());
        for (const auto& b : bonds) {
            adj[static_cast<std::size_t>(b[0])].push_back(b[1]);
            adj[static_cast<std::size_t>(b[1])].push_back(b[0]);
        }
        std::vector<int> d(elem.size(), -1);
        std::queue<int> q;
        d[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (d[static_cast<std::size_t>(v)] < 0) {
                    d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
                    q.push(v);
                }
            }
        }
        return d;
    }
};

void add_template(Proto& p, Rng& rng)
{
    using namespace chem::elem;
    switch (rng.index(4)) {
    case 0: // benzene
    case 1: { // pyridine
        const bool pyridine = rng.bernoulli(0.4);
        int first = -1;
        for (int i = 0; i < 6; ++i) {
            const int a = p.add_atom(pyridine && i == 0 ? N : C, true);
            first = i == 0 ? a : first;
            if (i > 0) {
                p.bond(a - 1, a, i % 2 == 1 ? 2 : 1);
            }
        }
        p.bond(first + 5, first, 1);
        break;
    }
    default: { // thiophene / furan
        const int x = p.add_atom(rng.bernoulli(0.5) ? S : O, true);
        const int a = p.add_atom(C, true);
        const int b = p.add_atom(C, true);
        const int c = p.add_atom(C, true);
        const int d = p.add_atom(C, true);
        p.bond(x, a, 1);
        p.bond(a, b, 2);
        p.bond(b, c, 1);
        p.bond(c, d, 2);
        p.bond(d, x, 1);
        break;
    }
    }
}

int pick_element(Rng& rng)
{
    using namespace chem::elem;
    const double u = rng.uniform();
    return u < 0.70 ? C : u < 0.82 ? N : u < 0.94 ? O : S;
}

double pool_value(const std::string& name, const desc::DescriptorVector& d)
{
    auto at = [&](const char* n) { return d.values[desc::schema_index(n)]; };
    const double heavy = at("nHeavyAtom");
    const auto slash = name.find('/');
    if (slash == std::string::npos) {
        return at(name.c_str());
    }
    return at(name.substr(0, slash).c_str()) / heavy;
}

} // namespace

void BenchmarkOptions::validate() const
{
    if (n_molecules < 100) {
        throw PreconditionError("benchmark needs at least 100 molecules");
    }
    if (n_tasks < 1) {
        throw PreconditionError("benchmark needs at least one task");
    }
    if (!(sparsity >= 0.0 && sparsity < 1.0)) {
        throw PreconditionError("sparsity must lie in [0, 1)");
    }
    if (task_family != "intensive" && task_family != "descriptor") {
        throw PreconditionError("task_family must be intensive or descriptor");
    }
    if (!(noise_sd >= 0.0)) {
        throw PreconditionError("noise_sd must be non-negative");
    }
}

const std::vector<std::string>& benchmark_feature_pool()
{
    static const std::vector<std::string> pool{
        "nC/nHeavyAtom", "nN/nHeavyAtom", "nO/nHeavyAtom",   "nS/nHeavyAtom",      "nAromAtom/nHeavyAtom",
        "nH/nHeavyAtom", "nRing/nHeavyAtom", "nHBDon/nHeavyAtom", "nHBAcc/nHeavyAtom", "TopoPSA/nHeavyAtom",
        "Zagreb1/nHeavyAtom", "AMW", "FlexibilityIndex"};
    return pool;
}

const std::vector<std::string>& benchmark_descriptor_pool()
{
    static const std::vector<std::string> pool{"MW",      "TopoPSA", "VMcGowan", "Zagreb1", "Xp-1d", "Kier1",
                                               "nHBAcc",  "nHBDon",  "nRot",     "nAromAtom", "AMW", "BalabanJ"};
    return pool;
}

std::string random_molecule(Rng& rng)
{
    for (;;) {
        Proto p;
        const int heavy = 4 + static_cast<int>(rng.index(17));
        if (heavy >= 6 && rng.bernoulli(0.35)) {
            add_template(p, rng);
        } else {
            p.add_atom(pick_element(rng));
        }
        while (p.size() < heavy) {
            const int z = pick_element(rng);
            std::vector<int> open;
            for (int a = 0; a < p.size(); ++a) {
                if (p.free(a) >= 1) {
                    open.push_back(a);
                }
            }
            if (open.empty()) {
                break;
            }
            const int at = open[rng.index(open.size())];
            int order = 1;
            const int room = std::min(p.free(at), max_valence(z));
            if (!p.locked[static_cast<std::size_t>(at)]) {
                if (room >= 3 && rng.bernoulli(0.03)) {
                    order = 3;
                } else if (room >= 2 && rng.bernoulli(0.12)) {
                    order = 2;
                }
            }
            const int a = p.add_atom(z);
            p.bond(at, a, order);
        }
        if (rng.bernoulli(0.25)) {
            std::vector<std::pair<int, int>> pairs;
            for (int a = 0; a < p.size(); ++a) {
                if (p.free(a) < 1 || p.locked[static_cast<std::size_t>(a)]) {
                    continue;
                }
                const auto d = p.distances_from(a);
                for (int b = a + 1; b < p.size(); ++b) {
                    const int dist = d[static_cast<std::size_t>(b)];
                    if (p.free(b) >= 1 && !p.locked[static_cast<std::size_t>(b)] && (dist == 4 || dist == 5)) {
                        pairs.emplace_back(a, b);
                    }
                }
            }
            if (!pairs.empty()) {
                const auto [a, b] = pairs[rng.index(pairs.size())];
                p.bond(a, b, 1);
            }
        }
        std::vector<chem::Atom> atoms;
        for (int a = 0; a < p.size(); ++a) {
            chem::Atom atom;
            atom.element = p.elem[static_cast<std::size_t>(a)];
            atom.implicit_h = p.free(a);
            atoms.push_back(atom);
        }
        std::vector<chem::Bond> bonds;
        for (const auto& b : p.bonds) {
            bonds.push_back({b[0], b[1], b[2], false});
        }
        try {
            const auto g = chem::perceive_aromaticity(chem::MolGraph(std::move(atoms), std::move(bonds)));
            return chem::canonicalize(chem::canonical_smiles(g));
        } catch (const Error&) {
            continue; // rare template/closure combinations the perceiver rejects
        }
    }
}

Benchmark generate_benchmark(const BenchmarkOptions& opts)
{
    opts.validate();
    Benchmark out;
    out.options = opts;

    Rng mol_rng(derive_seed(opts.seed, {1}));
    std::unordered_set<std::string> seen;
    std::vector<desc::DescriptorVector> descs;
    while (out.smiles.size() < opts.n_molecules) {
        auto smi = random_molecule(mol_rng);
        if (!seen.insert(smi).second) {
            continue;
        }
        descs.push_back(desc::compute_descriptors(chem::read_smiles(smi)));
        out.smiles.push_back(std::move(smi));
    }

    // Standardized pool features.
    const auto& pool = opts.task_family == "descriptor" ? benchmark_descriptor_pool() : benchmark_feature_pool();
    const auto n = static_cast<Eigen::Index>(out.smiles.size());
    gt::Mat z(n, static_cast<Eigen::Index>(pool.size()));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (std::size_t f = 0; f < pool.size(); ++f) {
            z(r, static_cast<Eigen::Index>(f)) = pool_value(pool[f], descs[static_cast<std::size_t>(r)]);
        }
    }
    for (Eigen::Index f = 0; f < z.cols(); ++f) {
        const double mean = z.col(f).mean();
        const double sd = std::sqrt((z.col(f).array() - mean).square().mean());
        z.col(f) = (z.col(f).array() - mean) / (sd > 0 ? sd : 1.0);
    }

    Rng task_rng(derive_seed(opts.seed, {2}));
    Rng noise_rng(derive_seed(opts.seed, {3}));
    Rng mask_rng(derive_seed(opts.seed, {4}));
    const auto t = static_cast<Eigen::Index>(opts.n_tasks);
    out.clean.resize(n, t);
    out.noisy.resize(n, t);
    out.observed.resize(n, t);
    static const char* kNonlinear[] = {"tanh", "sin", "square"};
    for (Eigen::Index c = 0; c < t; ++c) {
        BenchmarkTask task;
        task.name = "task" + std::to_string(c + 1);
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        task_rng.shuffle(std::span<std::size_t>(idx));
        for (int j = 0; j < 3; ++j) {
            const double mag = task_rng.uniform(0.5, 1.5);
            task.linear.push_back({pool[idx[static_cast<std::size_t>(j)]], task_rng.bernoulli(0.5) ? mag : -mag});
        }
        task.nonlinear = kNonlinear[task_rng.index(3)];
        task.nonlinear_feature = pool[idx[3]];
        task.nonlinear_coef = task_rng.uniform(0.3, 0.6);
        task.offset = std::round(task_rng.uniform(-50, 50)) / 10.0;
        task.scale = std::pow(10.0, std::round(task_rng.uniform(-10, 10)) / 10.0);

        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (const auto& term : task.linear) {
            const auto f = std::find(pool.begin(), pool.end(), term.feature) - pool.begin();
            y += term.coef * z.col(f);
        }
        const auto nf = std::find(pool.begin(), pool.end(), task.nonlinear_feature) - pool.begin();
        for (Eigen::Index r = 0; r < n; ++r) {
            const double v = z(r, nf);
            const double g = task.nonlinear == "tanh" ? std::tanh(v) : task.nonlinear == "sin" ? std::sin(v) : 0.5 * v * v;
            y(r) += task.nonlinear_coef * g;
        }
        y = (task.offset + task.scale * y.array()).matrix();
        const double mean = y.mean();
        const double sd = std::sqrt((y.array() - mean).square().mean());
        task.noise_abs = opts.noise_sd * sd;
        out.clean.col(c) = y;
        for (Eigen::Index r = 0; r < n; ++r) {
            out.noisy(r, c) = y(r) + task.noise_abs * noise_rng.normal();
            out.observed(r, c) = mask_rng.bernoulli(opts.sparsity) ? 0 : 1;
        }
        out.tasks.push_back(std::move(task));
    }
    // A molecule with no observation would be dropped downstream; give it one.
    for (Eigen::Index r = 0; r < n; ++r) {
        if (out.observed.row(r).sum() == 0) {
            out.observed(r, static_cast<Eigen::Index>(mask_rng.index(static_cast<std::uint64_t>(t)))) = 1;
        }
    }
    return out;
}

void write_benchmark(const Benchmark& b, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto write = [&](const std::filesystem::path& path, bool masked, const gt::Mat& values) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write " + path.string());
        }
        std::vector<std::string> header{"smiles"};
        for (const auto& t : b.tasks) {
            header.push_back(t.name);
        }
        csv::write_row(out, header);
        for (std::size_t r = 0; r < b.smiles.size(); ++r) {
            std::vector<std::string> row{b.smiles[r]};
            for (std::size_t c = 0; c < b.tasks.size(); ++c) {
                const auto i = static_cast<Eigen::Index>(r);
                const auto j = static_cast<Eigen::Index>(c);
                row.push_back(masked && !b.observed(i, j) ? "" : format_exact(values(i, j)));
            }
            csv::write_row(out, row);
        }
    };
    write(dir / "data.csv", true, b.noisy);
    write(dir / "truth.csv", false, b.clean);

    nlohmann::ordered_json j;
    j["n_molecules"] = b.options.n_molecules;
    j["n_tasks"] = b.options.n_tasks;
    j["sparsity"] = b.options.sparsity;
    j["noise_sd"] = b.options.noise_sd;
    j["seed"] = b.options.seed;
    j["task_family"] = b.options.task_family;
    j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : b.tasks) {
        nlohmann::ordered_json tj;
        tj["name"] = t.name;
        for (const auto& term : t.linear) {
            tj["linear"].push_back({{"feature", term.feature}, {"coef", term.coef}});
        }
        tj["nonlinear"] = {{"kind", t.nonlinear}, {"feature", t.nonlinear_feature}, {"coef", t.nonlinear_coef}};
        tj["offset"] = t.offset;
        tj["scale"] = t.scale;
        tj["noise_abs"] = t.noise_abs;
        j["tasks"].push_back(tj);
    }
    std::ofstream out(dir / "tasks.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

} // namespace staug::pipeline
