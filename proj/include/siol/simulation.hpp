#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include <siol/core_model.hpp>
#include <siol/higt.hpp>

namespace siol {

enum class GroupLayout { PaperSec6, Custom };

/// Evenly spaced contiguous groups: group i starts at i * (size - overlap).
struct CustomLayout
{
    Index input_group_size = 5;
    Index input_overlap = 2;
    Index n_input_groups = 10;
    Index output_group_size = 5;
    Index output_overlap = 2;
    Index n_output_groups = 7;
};

struct SimConfig
{
    Index n_marginals = 60;
    Index n_pairs = 60;
    Index N = 100;
    Index K = 80;
    Index n_holdout = 14;
    double signal = 2.0;
    std::uint64_t seed = 1;
    GroupLayout layout = GroupLayout::PaperSec6;
    CustomLayout custom;
    Index n_full_blocks = 6;
    Index n_partial_rows = 4;
    Index n_partial_cols = 4;

    Index J() const { return n_marginals + n_pairs; }
    void validate() const;
};

struct SimInstance
{
    // Generative scale: X rows have zero mean and unit variance over the training samples,
    // Y = B_true X + E. The holdout reuses the training means and scales.
    Dataset train;
    Dataset holdout;
    // train with every row centered and scaled to unit norm; what the solver sees.
    Dataset ds;
    GroupStructure gs;
    CoefMatrix B_true;
    std::vector<std::pair<Index, Index>> pair_sources;   // marginals behind each product row
};

/// The multi-member groups of the published layout, 0-based.
GroupStructure paper_sec6_groups();
GroupStructure custom_groups(const CustomLayout& layout, Index J, Index K);

SimInstance generate_dataset(const SimConfig& cfg);

struct PrPoint
{
    double tau = 0.0;
    double precision = 1.0;
    double recall = 0.0;
};

/// Support predicted as |beta| > tau at each threshold.
std::vector<PrPoint> precision_recall_curve(const CoefMatrix& est, const CoefMatrix& truth,
                                            const std::vector<double>& thresholds);

/// 0 and every distinct |beta| of the estimate, ascending.
std::vector<double> default_thresholds(const CoefMatrix& est);

/// Trapezoidal area under precision as a function of recall.
double area_under_pr(std::vector<PrPoint> curve);

/**
 * Refits each output by least squares on the inputs with |beta| > tau (minimum-norm solution
 * when rank deficient) and returns the mean squared error on val. Outputs with no selected
 * input predict 0.
 */
double refit_prediction_error(const Dataset& train, const Dataset& val, const CoefMatrix& est,
                              double tau = 0.0);

struct Variant
{
    std::string name;
    PenaltyConfig pc;
};

/// both (lambda2' = mix), input-only (lambda2' = 1), output-only (lambda2' = 0).
std::vector<Variant> structure_variants(double lambda1, double lambda3_prime, double mix = 0.5);

struct VariantOutcome
{
    std::string name;
    PenaltyConfig pc;
    CoefMatrix coef;
    FitReport report;
    std::vector<PrPoint> pr;
    double aupr = 0.0;
    double refit_mse = 0.0;
};

std::vector<VariantOutcome> evaluate_variants(const SimInstance& sim,
                                              const std::vector<Variant>& variants,
                                              const SolverSettings& settings = {});

}  // namespace siol
