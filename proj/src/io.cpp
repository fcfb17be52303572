#include <siol/io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace siol::io {

namespace {

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open for reading");
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot open for writing");
    return out;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool parse_real(const std::string& s, double& v)
{
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (*b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e;
}

bool parse_int(const std::string& s, std::int64_t& v)
{
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what)
{
    throw InputError(path + ":" + std::to_string(line) + ": " + what);
}

// Reads data lines, skipping blank lines and '#' comments; calls f(fields, line_no).
template <class F>
void for_each_line(const std::string& path, F&& f)
{
    auto in = open_in(path);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        f(split(line, '\t'), no);
    }
}

}  // namespace

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

LabeledMatrix read_matrix_tsv(const std::string& path)
{
    LabeledMatrix out;
    std::vector<std::vector<double>> rows;
    bool first = true;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        if (f.size() < 2) fail(path, no, "expected a row id followed by values");
        std::vector<double> vals;
        bool numeric = true;
        for (std::size_t c = 1; c < f.size(); ++c) {
            double v = 0.0;
            if (!parse_real(f[c], v)) {
                numeric = false;
                break;
            }
            vals.push_back(v);
        }
        if (!numeric) {
            if (first) {
                out.col_ids.assign(f.begin() + 1, f.end());
                first = false;
                return;
            }
            fail(path, no, "non-numeric value");
        }
        first = false;
        if (!rows.empty() && vals.size() != rows.front().size()) {
            fail(path, no, "expected " + std::to_string(rows.front().size()) + " values, found " +
                               std::to_string(vals.size()));
        }
        if (!out.col_ids.empty() && vals.size() != out.col_ids.size()) {
            fail(path, no, "row length does not match the header");
        }
        for (double v : vals)
            if (!std::isfinite(v)) fail(path, no, "non-finite value");
        out.row_ids.push_back(f[0]);
        rows.push_back(std::move(vals));
    });
    if (rows.empty()) throw InputError(path + ": no data rows");
    out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            out.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return out;
}

void write_matrix_tsv(const std::string& path, const Matrix& m, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids)
{
    auto out = open_out(path);
    if (!col_ids.empty()) {
        out << "id";
        for (const auto& c : col_ids) out << '\t' << c;
        out << '\n';
    }
    for (Index r = 0; r < m.rows(); ++r) {
        out << (row_ids.empty() ? std::to_string(r + 1) : row_ids[static_cast<std::size_t>(r)]);
        for (Index c = 0; c < m.cols(); ++c) out << '\t' << format_real(m(r, c));
        out << '\n';
    }
}

std::vector<IndexSet> read_groups_tsv(const std::string& path, Index n)
{
    std::vector<IndexSet> groups;
    std::set<std::string> names;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        if (f.size() != 2) fail(path, no, "expected group_id<TAB>i1,i2,...");
        if (!names.insert(f[0]).second) fail(path, no, "repeated group id " + f[0]);
        IndexSet g;
        for (const auto& tok : split(f[1], ',')) {
            std::int64_t v = 0;
            if (!parse_int(tok, v)) fail(path, no, "bad index '" + tok + "'");
            if (v < 1 || v > n) fail(path, no, "index " + tok + " outside 1.." + std::to_string(n));
            g.push_back(static_cast<Index>(v - 1));
        }
        std::sort(g.begin(), g.end());
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) fail(path, no, "repeated index");
        groups.push_back(std::move(g));
    });
    std::set<IndexSet> seen;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (!seen.insert(groups[i]).second) {
            throw InputError(path + ": group " + std::to_string(i + 1) + " duplicates an earlier group");
        }
    }
    return groups;
}

void write_groups_tsv(const std::string& path, const std::vector<IndexSet>& groups)
{
    auto out = open_out(path);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << "g" << g + 1 << '\t';
        for (std::size_t i = 0; i < groups[g].size(); ++i) out << (i ? "," : "") << groups[g][i] + 1;
        out << '\n';
    }
}

void write_coef(const std::string& path, const CoefMatrix& b)
{
    {
        auto out = open_out(path);
        for (auto [k, j] : b.support()) out << k + 1 << '\t' << j + 1 << '\t' << format_real(b(k, j)) << '\n';
    }
    write_json(path + ".json", {{"n_outputs", b.n_outputs()},
                                {"n_inputs", b.n_inputs()},
                                {"nnz", b.nnz()},
                                {"columns", {"k", "j", "beta"}},
                                {"index_base", 1}});
}

CoefMatrix read_coef(const std::string& path)
{
    const auto meta = read_json(path + ".json");
    Index K = 0, J = 0;
    std::size_t nnz = 0;
    try {
        K = meta.at("n_outputs").get<Index>();
        J = meta.at("n_inputs").get<Index>();
        nnz = meta.at("nnz").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ".json: " + e.what());
    }
    if (K < 1 || J < 1) throw InputError(path + ".json: shape must be positive");
    Matrix m = Matrix::Zero(K, J);
    std::set<std::pair<Index, Index>> seen;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        std::int64_t k = 0, j = 0;
        double v = 0.0;
        if (f.size() != 3 || !parse_int(f[0], k) || !parse_int(f[1], j) || !parse_real(f[2], v)) {
            fail(path, no, "expected k<TAB>j<TAB>beta");
        }
        if (k < 1 || k > K || j < 1 || j > J) fail(path, no, "index outside the recorded shape");
        if (!std::isfinite(v) || v == 0.0) fail(path, no, "coefficient must be finite and nonzero");
        if (!seen.insert({k, j}).second) fail(path, no, "repeated coefficient");
        m(static_cast<Index>(k - 1), static_cast<Index>(j - 1)) = v;
    });
    if (seen.size() != nnz) {
        throw InputError(path + ": " + std::to_string(seen.size()) + " triplets but sidecar says " +
                         std::to_string(nnz));
    }
    return CoefMatrix(m);
}

nlohmann::json to_json(const FitReport& r)
{
    return {{"initial_objective", r.initial_objective},
            {"final_objective", r.final_objective},
            {"outer_iterations", r.outer_iterations},
            {"converged", r.converged},
            {"damped_sweeps", r.damped_sweeps},
            {"warm_sweeps", r.warm_sweeps},
            {"objective_trace", r.objective_trace},
            {"support_size_trace", r.support_size_trace}};
}

nlohmann::json to_json(const PenaltyConfig& pc)
{
    nlohmann::json j{{"lambda1", pc.lambda1}, {"lambda2", pc.lambda2}, {"lambda3", pc.lambda3}};
    j["lambda4"] = pc.l1_for_pairs();
    return j;
}

void write_trace_tsv(const std::string& path, const FitReport& r)
{
    auto out = open_out(path);
    out << "iter\tobjective\tnnz\n";
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
        out << i + 1 << '\t' << format_real(r.objective_trace[i]) << '\t' << r.support_size_trace[i] << '\n';
    }
}

void write_cv_table(const std::string& path, const std::vector<CvRow>& rows)
{
    auto out = open_out(path);
    out << "lambda1\tlambda2p\tlambda3p\tfold\tmse\n";
    for (const auto& r : rows) {
        out << format_real(r.point.lambda1) << '\t' << format_real(r.point.lambda2_prime) << '\t'
            << format_real(r.point.lambda3_prime) << '\t' << r.fold << '\t' << format_real(r.mse) << '\n';
    }
}

void write_pr_tsv(const std::string& path, const std::vector<PrPoint>& curve)
{
    auto out = open_out(path);
    out << "tau\tprecision\trecall\n";
    for (const auto& p : curve) {
        out << format_real(p.tau) << '\t' << format_real(p.precision) << '\t' << format_real(p.recall) << '\n';
    }
}

InteractionNetwork read_network_tsv(const std::string& path)
{
    InteractionNetwork net;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        double p = 0.0;
        if (f.size() != 3) fail(path, no, "expected gene_a<TAB>gene_b<TAB>p_value");
        if (!parse_real(f[2], p)) {
            if (no == 1) return;  // header
            fail(path, no, "bad p-value");
        }
        if (!(p >= 0.0 && p <= 1.0)) fail(path, no, "p-value outside [0, 1]");
        if (f[0] == f[1]) fail(path, no, "self-edge");
        net.edges.push_back({f[0], f[1], p});
    });
    return net;
}

void read_clusters_tsv(const std::string& path, InteractionNetwork& net)
{
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        if (f.size() != 2) fail(path, no, "expected cluster_id<TAB>gene1,gene2,...");
        auto genes = split(f[1], ',');
        for (const auto& g : genes)
            if (g.empty()) fail(path, no, "empty gene id");
        net.clusters.push_back(std::move(genes));
    });
}

std::vector<SnpPosition> read_snp_positions(const std::string& path)
{
    std::vector<SnpPosition> out;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        std::int64_t pos = 0;
        if (f.size() != 3) fail(path, no, "expected snp_id<TAB>chrom<TAB>pos");
        if (!parse_int(f[2], pos)) {
            if (no == 1) return;
            fail(path, no, "bad position");
        }
        if (pos < 0) fail(path, no, "negative position");
        out.push_back({f[0], f[1], pos});
    });
    return out;
}

std::vector<GenePosition> read_gene_positions(const std::string& path)
{
    std::vector<GenePosition> out;
    for_each_line(path, [&](const std::vector<std::string>& f, std::size_t no) {
        std::int64_t s = 0, e = 0;
        if (f.size() != 4) fail(path, no, "expected gene_id<TAB>chrom<TAB>start<TAB>end");
        if (!parse_int(f[2], s) || !parse_int(f[3], e)) {
            if (no == 1) return;
            fail(path, no, "bad interval");
        }
        if (s < 0 || s > e) fail(path, no, "invalid interval");
        out.push_back({f[0], f[1], s, e});
    });
    return out;
}

void write_pairs_tsv(const std::string& path, const CandidatePairSet& U,
                     const std::vector<std::string>& snp_ids)
{
    auto out = open_out(path);
    auto name = [&](Index i) {
        return snp_ids.empty() ? std::to_string(i + 1) : snp_ids[static_cast<std::size_t>(i)];
    };
    out << "snp_r\tsnp_s\tprovenance\n";
    for (const auto& p : U.pairs()) out << name(p.r) << '\t' << name(p.s) << '\t' << to_string(p.provenance) << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path)
{
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace siol::io
