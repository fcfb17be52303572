#include <siol/interactions.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <thread>
#include <boost/math/distributions/fisher_f.hpp>

namespace siol {

const char* to_string(Provenance p)
{
    switch (p) {
        case Provenance::Network: return "network";
        case Provenance::Screen: return "screen";
        case Provenance::Both: return "both";
    }
    return "?";
}

void GenomePositions::validate() const
{
    std::set<std::string> ids;
    for (const auto& s : snps) {
        if (s.pos < 0) throw InputError("snp " + s.id + " has a negative position");
        if (!ids.insert(s.id).second) throw InputError("snp id " + s.id + " is repeated");
    }
    ids.clear();
    for (const auto& g : genes) {
        if (g.start < 0 || g.start > g.end) {
            throw InputError("gene " + g.id + " has an invalid interval");
        }
        if (!ids.insert(g.id).second) throw InputError("gene id " + g.id + " is repeated");
    }
}

void InteractionNetwork::validate() const
{
    for (const auto& e : edges) {
        if (e.gene_a == e.gene_b) throw InputError("network edge " + e.gene_a + " is a self-edge");
        if (!(e.p_value >= 0.0 && e.p_value <= 1.0)) {
            throw InputError("network edge " + e.gene_a + "-" + e.gene_b + " has p-value outside [0, 1]");
        }
    }
}

void CandidatePairSet::add(Index r, Index s, Provenance p)
{
    if (r == s) throw InputError("candidate pair joins a SNP with itself");
    if (r > s) std::swap(r, s);
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::make_pair(r, s),
                               [](const CandidatePair& a, const std::pair<Index, Index>& b) {
                                   return std::make_pair(a.r, a.s) < b;
                               });
    if (it != pairs_.end() && it->r == r && it->s == s) {
        it->provenance = static_cast<Provenance>(static_cast<std::uint8_t>(it->provenance) |
                                                 static_cast<std::uint8_t>(p));
        return;
    }
    pairs_.insert(it, CandidatePair{r, s, p});
}

void CandidatePairSet::merge(const CandidatePairSet& other)
{
    for (const auto& p : other.pairs_) add(p.r, p.s, p.provenance);
}

bool CandidatePairSet::contains(Index r, Index s) const
{
    if (r > s) std::swap(r, s);
    return std::any_of(pairs_.begin(), pairs_.end(),
                       [&](const CandidatePair& p) { return p.r == r && p.s == s; });
}

GeneLinkage link_snps_to_genes(const GenomePositions& pos, std::int64_t max_dist_bp)
{
    pos.validate();
    std::map<std::string, std::vector<std::size_t>> genes_on;
    for (std::size_t gi = 0; gi < pos.genes.size(); ++gi) genes_on[pos.genes[gi].chrom].push_back(gi);

    std::set<std::string> unknown;
    for (const auto& s : pos.snps) {
        if (!genes_on.count(s.chrom)) unknown.insert(s.chrom);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown chromosome labels:";
        for (const auto& c : unknown) msg += " " + c;
        throw InputError(msg);
    }

    GeneLinkage out;
    for (const auto& g : pos.genes) out[g.id];
    for (auto& [chrom, list] : genes_on) {
        std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
            return pos.genes[a].start < pos.genes[b].start;
        });
    }
    for (std::size_t si = 0; si < pos.snps.size(); ++si) {
        const auto& s = pos.snps[si];
        for (auto gi : genes_on[s.chrom]) {
            const auto& g = pos.genes[gi];
            if (g.start - s.pos >= max_dist_bp) break;  // later genes start even further right
            const std::int64_t d = s.pos < g.start ? g.start - s.pos : (s.pos > g.end ? s.pos - g.end : 0);
            if (d < max_dist_bp) out[g.id].push_back(static_cast<Index>(si));
        }
    }
    return out;
}

double row_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b)
{
    const Vector ca = a.array() - a.mean();
    const Vector cb = b.array() - b.mean();
    const double na = ca.norm();
    const double nb = cb.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return ca.dot(cb) / (na * nb);
}

CandidatePairSet candidate_pairs_from_network(const InteractionNetwork& net,
                                              const GeneLinkage& linkage, double p_cutoff,
                                              std::optional<double> corr_filter, const Matrix* X)
{
    net.validate();
    if (corr_filter && !X) throw InputError("correlation filter needs the genotype matrix");
    CandidatePairSet out;
    static const IndexSet none;
    auto linked = [&](const std::string& gene) -> const IndexSet& {
        auto it = linkage.find(gene);
        return it == linkage.end() ? none : it->second;
    };
    for (const auto& e : net.edges) {
        if (!(e.p_value < p_cutoff)) continue;
        for (auto r : linked(e.gene_a)) {
            for (auto s : linked(e.gene_b)) {
                if (r == s) continue;
                if (corr_filter) {
                    const double c = row_correlation(X->row(r).transpose(), X->row(s).transpose());
                    if (std::abs(c) > *corr_filter) continue;
                }
                out.add(r, s, Provenance::Network);
            }
        }
    }
    return out;
}

namespace {

double rss_of(const Matrix& design, const Vector& y)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) return std::numeric_limits<double>::quiet_NaN();
    const Vector fit = design * qr.solve(y);
    return (y - fit).squaredNorm();
}

}  // namespace

double interaction_p_value(const Eigen::Ref<const Vector>& x_r, const Eigen::Ref<const Vector>& x_s,
                           const Eigen::Ref<const Vector>& y)
{
    const Index n = y.size();
    if (n <= 4) throw InputError("two-locus test needs more than 4 samples");
    Eigen::MatrixXd alt(n, 4);
    alt.col(0).setOnes();
    alt.col(1) = x_r;
    alt.col(2) = x_s;
    alt.col(3) = x_r.cwiseProduct(x_s);
    const double rss1 = rss_of(alt, y);
    if (std::isnan(rss1)) return std::numeric_limits<double>::quiet_NaN();
    const double rss0 = rss_of(alt.leftCols(3), y);
    const double df = static_cast<double>(n - 4);
    const double num = std::max(rss0 - rss1, 0.0);
    const double scale = std::max(rss0, std::numeric_limits<double>::min());
    if (rss1 <= 1e-24 * scale) return num > 0.0 ? 0.0 : 1.0;
    const double f = num / (rss1 / df);
    boost::math::fisher_f dist(1.0, df);
    return boost::math::cdf(boost::math::complement(dist, f));
}

ScreenResult two_locus_screen(const Dataset& ds, const std::vector<std::pair<Index, Index>>& pairs,
                              double p_cutoff, int threads)
{
    ScreenResult out;
    out.min_p.assign(pairs.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<char> skipped(pairs.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            const auto [r, s] = pairs[i];
            const Vector xr = ds.X.row(r).transpose();
            const Vector xs = ds.X.row(s).transpose();
            if (std::abs(row_correlation(xr, xs)) >= 1.0 - 1e-12) {
                skipped[i] = 1;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            bool any = false;
            for (Index k = 0; k < ds.n_outputs(); ++k) {
                const double p = interaction_p_value(xr, xs, ds.Y.row(k).transpose());
                if (std::isnan(p)) continue;
                any = true;
                best = std::min(best, p);
            }
            if (any) out.min_p[i] = best;
            else skipped[i] = 2;
        }
    };
    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(pairs.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [r, s] = pairs[i];
        if (skipped[i]) {
            out.warnings.push_back("pair (" + std::to_string(r + 1) + ", " + std::to_string(s + 1) +
                                   (skipped[i] == 1 ? ") skipped: collinear genotypes"
                                                    : ") skipped: degenerate interaction column"));
            continue;
        }
        if (out.min_p[i] < p_cutoff) out.passed.add(r, s, Provenance::Screen);
    }
    return out;
}

Dataset expand_design(const Dataset& raw, const CandidatePairSet& U)
{
    raw.validate();
    const Index J = raw.n_inputs();
    Matrix X(J + static_cast<Index>(U.size()), raw.n_samples());
    X.topRows(J) = raw.X;
    std::vector<ColumnOrigin> map;
    map.reserve(static_cast<std::size_t>(X.rows()));
    for (Index j = 0; j < J; ++j) map.push_back(ColumnOrigin::marginal(j));
    std::vector<std::string> ids = raw.input_ids;
    for (std::size_t p = 0; p < U.size(); ++p) {
        const auto& pr = U.pairs()[p];
        if (pr.s >= J) throw InputError("candidate pair index out of range");
        X.row(J + static_cast<Index>(p)) = raw.X.row(pr.r).cwiseProduct(raw.X.row(pr.s));
        map.push_back(ColumnOrigin::pair(pr.r, pr.s));
        if (!ids.empty()) ids.push_back(raw.input_ids[static_cast<std::size_t>(pr.r)] + ":" +
                                        raw.input_ids[static_cast<std::size_t>(pr.s)]);
    }
    Dataset expanded(std::move(X), raw.Y);
    expanded.sample_ids = raw.sample_ids;
    expanded.input_ids = std::move(ids);
    expanded.output_ids = raw.output_ids;
    expanded.column_map = std::move(map);
    return expanded.standardized();
}

ClusterGroups build_input_groups_from_clusters(const InteractionNetwork& net,
                                               const GeneLinkage& linkage,
                                               const CandidatePairSet& U, Index n_marginal)
{
    ClusterGroups out;
    std::set<IndexSet> seen_g;
    std::set<IndexSet> seen_l;
    for (const auto& cluster : net.clusters) {
        std::set<Index> snps;
        for (const auto& gene : cluster) {
            auto it = linkage.find(gene);
            if (it != linkage.end()) snps.insert(it->second.begin(), it->second.end());
        }
        IndexSet g(snps.begin(), snps.end());
        IndexSet l;
        for (std::size_t p = 0; p < U.size(); ++p) {
            const auto& pr = U.pairs()[p];
            if (snps.count(pr.r) && snps.count(pr.s)) l.push_back(n_marginal + static_cast<Index>(p));
        }
        if (!g.empty() && seen_g.insert(g).second) out.marginal.push_back(std::move(g));
        if (!l.empty() && seen_l.insert(l).second) out.pairs.push_back(std::move(l));
    }
    return out;
}

std::vector<IndexSet> cluster_outputs(const Matrix& Y, double cutoff)
{
    const Index K = Y.rows();
    if (K == 0) return {};
    if (K == 1) return {{0}};

    // Rows centered and normalized so that the dot product is the Pearson correlation.
    Matrix Z = Y;
    for (Index k = 0; k < K; ++k) {
        Z.row(k).array() -= Z.row(k).mean();
        const double n = Z.row(k).norm();
        if (n > 0.0) Z.row(k) /= n;
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Ones(K, K) - Z * Z.transpose();
    for (Index k = 0; k < K; ++k) D(k, k) = 0.0;

    // Nearest-neighbour chain; merges at or below the cutoff are unioned.
    std::vector<Index> size(static_cast<std::size_t>(K), 1);
    std::vector<bool> active(static_cast<std::size_t>(K), true);
    std::vector<Index> parent(static_cast<std::size_t>(K));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Index a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };

    std::vector<Index> chain;
    Index remaining = K;
    while (remaining > 1) {
        if (chain.empty()) {
            for (Index k = 0; k < K; ++k) {
                if (active[static_cast<std::size_t>(k)]) {
                    chain.push_back(k);
                    break;
                }
            }
        }
        const Index a = chain.back();
        const Index prev = chain.size() > 1 ? chain[chain.size() - 2] : -1;
        Index b = prev;
        double best = prev >= 0 ? D(a, prev) : std::numeric_limits<double>::infinity();
        for (Index k = 0; k < K; ++k) {
            if (k == a || !active[static_cast<std::size_t>(k)]) continue;
            if (D(a, k) < best) {
                best = D(a, k);
                b = k;
            }
        }
        if (b != prev) {
            chain.push_back(b);
            continue;
        }
        // a and b are reciprocal nearest neighbours: merge b into a.
        chain.pop_back();
        chain.pop_back();
        if (best <= cutoff) parent[static_cast<std::size_t>(find(b))] = find(a);
        const double na = static_cast<double>(size[static_cast<std::size_t>(a)]);
        const double nb = static_cast<double>(size[static_cast<std::size_t>(b)]);
        for (Index k = 0; k < K; ++k) {
            if (k == a || k == b || !active[static_cast<std::size_t>(k)]) continue;
            const double d = (na * D(a, k) + nb * D(b, k)) / (na + nb);
            D(a, k) = d;
            D(k, a) = d;
        }
        size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
        active[static_cast<std::size_t>(b)] = false;
        --remaining;
    }

    std::map<Index, IndexSet> groups;
    for (Index k = 0; k < K; ++k) groups[find(k)].push_back(k);
    std::vector<IndexSet> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace siol
