#include "staug/descriptors/feature_matrix.hpp"

#include "staug/common/csv.hpp"
#include "staug/common/error.hpp"
#include "staug/common/hash.hpp"
#include "staug/common/numfmt.hpp"
#include "staug/common/parallel.hpp"
#include "staug/descriptors/descriptors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace staug::desc {

std::vector<double> FeatureMatrix::column(std::size_t c) const
{
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = at(r, c);
    }
    return out;
}

std::vector<double> FeatureMatrix::row(std::size_t r) const
{
    return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
            data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& idx) const
{
    FeatureMatrix out = *this;
    out.rows = idx.size();
    out.data.resize(idx.size() * cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= rows) {
            throw PreconditionError("row index out of range");
        }
        std::memcpy(&out.data[i * cols], &data[idx[i] * cols], cols * sizeof(double));
    }
    return out;
}

std::uint64_t FeatureMatrix::fingerprint() const
{
    Fnv1a h;
    h.update(schema_id);
    h.update_u64(rows);
    h.update_u64(cols);
    for (const auto& n : col_names) {
        h.update(n);
        h.update_u64(0);
    }
    for (double v : data) {
        h.update_double(v);
    }
    return h.digest();
}

FeatureMatrix build_feature_matrix(const std::vector<chem::MolGraph>& mols, int threads)
{
    if (mols.empty()) {
        throw PreconditionError("build_feature_matrix needs at least one molecule");
    }
    FeatureMatrix m;
    m.rows = mols.size();
    m.cols = schema_size();
    m.schema_id = std::string(kSchemaId);
    for (auto name : schema()) {
        m.col_names.emplace_back(name);
    }
    m.arcsinh_applied.assign(m.cols, false);
    m.kept_mask.assign(m.cols, true);
    m.data.resize(m.rows * m.cols);
    parallel_for(mols.size(), threads, [&](std::size_t i) {
        const auto v = compute_descriptors(mols[i]);
        std::memcpy(&m.data[i * m.cols], v.values.data(), m.cols * sizeof(double));
    });
    return m;
}

FeatureMatrix arcsinh_pretransform(const FeatureMatrix& m, double threshold)
{
    if (!(threshold > 0.0)) {
        throw PreconditionError("arcsinh threshold must be positive");
    }
    FeatureMatrix out = m;
    for (std::size_t c = 0; c < m.cols; ++c) {
        double peak = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            const double x = m.at(r, c);
            if (!std::isnan(x)) {
                peak = std::max(peak, std::fabs(x));
            }
        }
        if (!(peak > threshold)) {
            continue;
        }
        for (std::size_t r = 0; r < m.rows; ++r) {
            double& x = out.at(r, c);
            if (!std::isnan(x)) {
                x = std::asinh(x);
            }
        }
        out.arcsinh_applied[c] = true;
    }
    return out;
}

double pairwise_pearson(const std::vector<double>& a, const std::vector<double>& b, std::size_t* overlap)
{
    double sa = 0.0, sb = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isnan(a[i]) && !std::isnan(b[i])) {
            sa += a[i];
            sb += b[i];
            ++n;
        }
    }
    if (overlap != nullptr) {
        *overlap = n;
    }
    if (n < 2) {
        return std::nan("");
    }
    const double ma = sa / static_cast<double>(n);
    const double mb = sb / static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isnan(a[i]) && !std::isnan(b[i])) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return std::nan("");
    }
    return sab / std::sqrt(saa * sbb);
}

FeatureMatrix prune_features(const FeatureMatrix& m, const PruneOptions& opts)
{
    if (m.rows < 2) {
        throw PreconditionError("prune_features needs at least 2 rows");
    }
    std::vector<std::vector<double>> cols(m.cols);
    std::vector<bool> has_missing(m.cols, false);
    std::vector<bool> keep(m.cols, true);
    for (std::size_t c = 0; c < m.cols; ++c) {
        cols[c] = m.column(c);
        std::vector<double> obs;
        for (double x : cols[c]) {
            if (std::isnan(x)) {
                has_missing[c] = true;
            } else {
                obs.push_back(x);
            }
        }
        std::set<double> distinct(obs.begin(), obs.end());
        if (distinct.size() <= 1) {
            keep[c] = false;
            continue;
        }
        double mean = 0.0;
        for (double x : obs) {
            mean += x;
        }
        mean /= static_cast<double>(obs.size());
        double var = 0.0;
        for (double x : obs) {
            var += (x - mean) * (x - mean);
        }
        var /= static_cast<double>(obs.size());
        if (var < opts.var_eps) {
            keep[c] = false;
        }
    }
    for (std::size_t j = 0; j < m.cols; ++j) {
        if (!keep[j]) {
            continue;
        }
        for (std::size_t i = 0; i < j; ++i) {
            if (!keep[i]) {
                continue;
            }
            std::size_t overlap = 0;
            const double r = pairwise_pearson(cols[i], cols[j], &overlap);
            if ((has_missing[i] || has_missing[j]) && overlap < opts.min_overlap) {
                continue;
            }
            if (!std::isnan(r) && std::fabs(r) > opts.corr_max) {
                keep[j] = false;
                break;
            }
        }
    }

    std::vector<std::size_t> survivors;
    for (std::size_t c = 0; c < m.cols; ++c) {
        if (keep[c]) {
            survivors.push_back(c);
        }
    }
    if (survivors.empty()) {
        throw EmptyResult("every feature column was pruned");
    }
    FeatureMatrix out;
    out.rows = m.rows;
    out.cols = survivors.size();
    out.schema_id = m.schema_id;
    out.data.resize(out.rows * out.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = 0; k < survivors.size(); ++k) {
            out.data[r * out.cols + k] = m.at(r, survivors[k]);
        }
    }
    for (std::size_t c : survivors) {
        out.col_names.push_back(m.col_names[c]);
        out.arcsinh_applied.push_back(m.arcsinh_applied[c]);
    }
    // map survivors back onto the original schema positions
    out.kept_mask = m.kept_mask.empty() ? std::vector<bool>(m.cols, true) : m.kept_mask;
    std::size_t current = 0;
    for (std::size_t orig = 0; orig < out.kept_mask.size(); ++orig) {
        if (out.kept_mask[orig]) {
            out.kept_mask[orig] = keep[current];
            ++current;
        }
    }
    return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    csv::write_row(out, m.col_names);
    std::vector<std::string> cells(m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            cells[c] = format_exact(m.at(r, c));
        }
        csv::write_row(out, cells);
    }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path)
{
    const auto table = csv::read(path);
    FeatureMatrix m;
    m.col_names = table.header;
    m.cols = table.header.size();
    m.rows = table.rows.size();
    m.arcsinh_applied.assign(m.cols, false);
    m.kept_mask.assign(m.cols, true);
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : table.rows) {
        for (const auto& cell : row) {
            m.data.push_back(parse_cell(cell));
        }
    }
    return m;
}

namespace {

constexpr char kMagic[8] = {'S', 'T', 'A', 'U', 'G', 'F', 'M', '1'};

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& in)
{
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void put_str(std::ostream& out, const std::string& s)
{
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in)
{
    const auto n = get_u64(in);
    if (!in || n > (1U << 20)) {
        throw FormatError("corrupt feature cache");
    }
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void put_bits(std::ostream& out, const std::vector<bool>& v)
{
    put_u64(out, v.size());
    for (bool b : v) {
        out.put(b ? 1 : 0);
    }
}

std::vector<bool> get_bits(std::istream& in)
{
    const auto n = get_u64(in);
    if (!in || n > (1U << 24)) {
        throw FormatError("corrupt feature cache");
    }
    std::vector<bool> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = in.get() != 0;
    }
    return v;
}

} // namespace

void save_feature_cache(const std::filesystem::path& path, const FeatureMatrix& m, std::uint64_t dataset_key)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kMagic, sizeof kMagic);
    put_str(out, m.schema_id);
    put_u64(out, dataset_key);
    put_u64(out, m.rows);
    put_u64(out, m.cols);
    for (const auto& n : m.col_names) {
        put_str(out, n);
    }
    put_bits(out, m.arcsinh_applied);
    put_bits(out, m.kept_mask);
    out.write(reinterpret_cast<const char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

bool load_feature_cache(const std::filesystem::path& path, std::uint64_t dataset_key, FeatureMatrix& out)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    char magic[sizeof kMagic] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        return false;
    }
    FeatureMatrix m;
    m.schema_id = get_str(in);
    if (m.schema_id != kSchemaId || get_u64(in) != dataset_key) {
        return false;
    }
    m.rows = get_u64(in);
    m.cols = get_u64(in);
    for (std::size_t c = 0; c < m.cols; ++c) {
        m.col_names.push_back(get_str(in));
    }
    m.arcsinh_applied = get_bits(in);
    m.kept_mask = get_bits(in);
    m.data.resize(m.rows * m.cols);
    in.read(reinterpret_cast<char*>(m.data.data()), static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) {
        throw FormatError("truncated feature cache " + path.string());
    }
    out = std::move(m);
    return true;
}

} // namespace staug::desc
