#pragma once
#include <string>
#include <vector>
#include <json.hpp>
#include <siol/core_model.hpp>
#include <siol/higt.hpp>
#include <siol/interactions.hpp>
#include <siol/simulation.hpp>
#include <siol/tuning.hpp>

namespace siol::io {

/// Matrix TSV: one row per variable, `row_id<TAB>v1<TAB>...`, optional header line.
struct LabeledMatrix
{
    Matrix values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;   // from the header, when present
};

LabeledMatrix read_matrix_tsv(const std::string& path);
void write_matrix_tsv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& row_ids = {},
                      const std::vector<std::string>& col_ids = {});

/// Group TSV: `group_id<TAB>i1,i2,...` with 1-based indices; returns 0-based sets.
std::vector<IndexSet> read_groups_tsv(const std::string& path, Index n);
void write_groups_tsv(const std::string& path, const std::vector<IndexSet>& groups);

/**
 * Coefficient triplets `k<TAB>j<TAB>beta` (1-based, full precision) plus a JSON sidecar
 * `<path>.json` carrying the shape.
 */
void write_coef(const std::string& path, const CoefMatrix& b);
CoefMatrix read_coef(const std::string& path);

nlohmann::json to_json(const FitReport& r);
nlohmann::json to_json(const PenaltyConfig& pc);
void write_trace_tsv(const std::string& path, const FitReport& r);

void write_cv_table(const std::string& path, const std::vector<CvRow>& rows);
void write_pr_tsv(const std::string& path, const std::vector<PrPoint>& curve);

InteractionNetwork read_network_tsv(const std::string& path);
void read_clusters_tsv(const std::string& path, InteractionNetwork& net);
std::vector<SnpPosition> read_snp_positions(const std::string& path);
std::vector<GenePosition> read_gene_positions(const std::string& path);

/// `snp_r<TAB>snp_s<TAB>provenance`; SNPs named by id when ids are given, else 1-based index.
void write_pairs_tsv(const std::string& path, const CandidatePairSet& U,
                     const std::vector<std::string>& snp_ids = {});

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// Writes `%.17g`.
std::string format_real(double v);

}  // namespace siol::io
