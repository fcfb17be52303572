#pragma once
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>
#include <siol/core_model.hpp>
#include <siol/pattern_dag.hpp>

namespace siol {

struct SolverSettings
{
    double tol = 1e-6;              // relative objective change
    int max_outer_iters = 1000;
    double damping = 1.0;           // blend factor for the first attempt of every sweep
    int resync_period = 50;
    bool skip_descendants = true;
    double ridge_lambda = 1.0;      // used when no initial estimate is supplied
    int warm_sweeps = 2000;         // cap on smoothing passes applied to the initial estimate
    double warm_tol = 1e-10;        // smoothing stops once the relative objective change drops below
    DagOptions dag;

    void validate() const;
};

struct FitReport
{
    double initial_objective = 0.0;
    double final_objective = 0.0;
    int outer_iterations = 0;
    std::vector<double> objective_trace;
    std::vector<std::size_t> support_size_trace;
    bool converged = false;
    int damped_sweeps = 0;
    int warm_sweeps = 0;
};

struct FitResult
{
    CoefMatrix coef;
    FitReport report;
};

/**
 * Groups actually penalized by a fit: a structure whose lambda is zero carries no penalty,
 * so its groups collapse to singletons before the DAG is built.
 */
GroupStructure effective_groups(const GroupStructure& gs, const PenaltyConfig& pc, Index n_inputs,
                                Index n_outputs);

/**
 * Hierarchical group thresholding. Holds the evolving estimate and its residual; the
 * optimality checks are evaluated against the current partial residuals
 * r_k^j = y_k - sum_{l != j} beta_k^l x_l, with every zero coefficient held fixed.
 */
class HigtSolver
{
public:
    HigtSolver(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
               SolverSettings settings = {}, std::optional<CoefMatrix> init = std::nullopt,
               std::shared_ptr<const PatternDag> dag = nullptr);

    const CoefMatrix& coef() const { return b_; }
    const ResidualState& residual() const { return rs_; }
    const GroupStructure& groups() const { return groups_; }
    const PatternDag& dag() const { return *dag_; }

    /// r_k^j . x_j
    double partial_correlation(Index k, Index j) const;

    bool check_block_zero(Index g, Index h) const;
    bool check_row_group_zero(Index k, Index g) const;
    bool check_col_group_zero(Index h, Index j) const;
    bool check_entry_zero(Index k, Index j) const;

    /// The fixed-point value for beta_k^j; 0 if a group norm vanished numerically.
    double update_coefficient(Index k, Index j) const;

    /// Writes beta_k^j = value and keeps the residual in sync.
    void assign(Index k, Index j, double value);
    void zero_pattern(const ZeroPattern& p);
    bool is_zero(const ZeroPattern& p) const;

    /// One pass of majorization updates on every nonzero coefficient, without thresholding.
    void smooth_sweep();

    /// One DFS pass of checks and updates; no safeguard.
    void sweep();

    double objective() const;

    /// Sweeps until convergence with the monotonicity safeguard.
    FitReport run();

private:
    double soft(Index j, double c) const;
    double l1_weight(Index j) const;
    double row_group_norm(Index k, Index g) const;
    double col_group_norm(Index h, Index j) const;
    bool zero_optimal(const ZeroPattern& p) const;
    bool visit(const ZeroPattern& p);
    void load(const Matrix& dense);

    const Dataset& ds_;
    PenaltyConfig pc_;
    SolverSettings settings_;
    GroupStructure groups_;
    std::shared_ptr<const PatternDag> dag_;
    std::vector<std::vector<Index>> groups_of_input_;    // j -> input groups containing j
    std::vector<std::vector<Index>> groups_of_output_;   // k -> output groups containing k
    Vector sqnorm_;
    CoefMatrix b_;
    ResidualState rs_;
    double negligible_ = 0.0;
};

/// Runs HiGT from B_init (ridge estimate when absent).
FitResult fit(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
              const SolverSettings& settings = {}, std::optional<CoefMatrix> init = std::nullopt);

/// max_{k,j} |y_k . x_j|: every lambda1 at or above this zeroes B in one sweep.
double lambda1_max(const Dataset& ds);

}  // namespace siol
