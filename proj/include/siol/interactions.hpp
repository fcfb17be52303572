#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>
#include <siol/core_model.hpp>

namespace siol {

struct SnpPosition
{
    std::string id;
    std::string chrom;
    std::int64_t pos = 0;
};

struct GenePosition
{
    std::string id;
    std::string chrom;
    std::int64_t start = 0;
    std::int64_t end = 0;
};

struct GenomePositions
{
    std::vector<SnpPosition> snps;
    std::vector<GenePosition> genes;

    void validate() const;
};

struct NetworkEdge
{
    std::string gene_a;
    std::string gene_b;
    double p_value = 1.0;
};

struct InteractionNetwork
{
    std::vector<NetworkEdge> edges;
    std::vector<std::vector<std::string>> clusters;

    void validate() const;
};

enum class Provenance : std::uint8_t { Network = 1, Screen = 2, Both = 3 };

const char* to_string(Provenance p);

struct CandidatePair
{
    Index r = 0;
    Index s = 0;
    Provenance provenance = Provenance::Network;
};

/// Unordered SNP pairs kept sorted by (r, s), r < s, no duplicates.
class CandidatePairSet
{
public:
    void add(Index r, Index s, Provenance p);
    void merge(const CandidatePairSet& other);
    bool contains(Index r, Index s) const;

    const std::vector<CandidatePair>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

private:
    std::vector<CandidatePair> pairs_;
};

using GeneLinkage = std::map<std::string, IndexSet>;

/**
 * SNP s (index into pos.snps) links to gene g when both sit on the same chromosome and the
 * distance from s to [start, end] is below max_dist_bp. SNP chromosomes absent from the gene
 * table are rejected.
 */
GeneLinkage link_snps_to_genes(const GenomePositions& pos, std::int64_t max_dist_bp = 500);

/// Pearson correlation of two rows; 0 when either is constant.
double row_correlation(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/**
 * Pairs (r, s) with r linked to gene_a and s to gene_b for every edge with p < p_cutoff.
 * With corr_filter set, pairs whose genotype correlation exceeds it in magnitude are dropped
 * (needs X; pass nullptr to skip).
 */
CandidatePairSet candidate_pairs_from_network(const InteractionNetwork& net,
                                              const GeneLinkage& linkage, double p_cutoff,
                                              std::optional<double> corr_filter = std::nullopt,
                                              const Matrix* X = nullptr);

struct ScreenResult
{
    CandidatePairSet passed;
    std::vector<double> min_p;         // per tested pair, NaN when skipped
    std::vector<std::string> warnings;
};

/// F-test p-value of the interaction term for one trait, with an intercept in both models.
double interaction_p_value(const Eigen::Ref<const Vector>& x_r, const Eigen::Ref<const Vector>& x_s,
                           const Eigen::Ref<const Vector>& y);

/**
 * Two-locus test of each candidate against every output; a pair passes when its smallest
 * p-value over outputs is below p_cutoff.
 */
ScreenResult two_locus_screen(const Dataset& ds, const std::vector<std::pair<Index, Index>>& pairs,
                              double p_cutoff = 1e-5, int threads = 1);

/**
 * Appends x_r * x_s (computed on the raw rows of ds.X) for every pair in U, then standardizes
 * all rows. Column j >= J of the result maps to pair j - J.
 */
Dataset expand_design(const Dataset& raw, const CandidatePairSet& U);

struct ClusterGroups
{
    std::vector<IndexSet> marginal;   // G, over marginal SNP indices
    std::vector<IndexSet> pairs;      // L, over expanded column indices (J + pair position)
};

/**
 * For each gene cluster: the SNPs linked to any of its genes, and the pairs of U whose two
 * endpoints are both among them. Empty and repeated groups are dropped.
 */
ClusterGroups build_input_groups_from_clusters(const InteractionNetwork& net,
                                               const GeneLinkage& linkage,
                                               const CandidatePairSet& U, Index n_marginal);

/// Average-linkage clustering on 1 - Pearson correlation, cut at height cutoff.
std::vector<IndexSet> cluster_outputs(const Matrix& Y, double cutoff = 0.8);

}  // namespace siol
