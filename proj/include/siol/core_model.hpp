#pragma once
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/Dense>

namespace siol {

// Rows are variables (inputs or outputs), columns are samples.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = std::ptrdiff_t;
using IndexSet = std::vector<Index>;

class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct StandardizedRows
{
    Matrix values;
    std::vector<bool> constant_rows;

    bool any_constant() const;
};

/**
 * Centers every row and scales it to unit L2 norm.
 * Constant rows are centered (hence all zero) and flagged.
 * Throws InputError on non-finite entries.
 */
StandardizedRows standardize_rows(const Matrix& m);

/// Where a design-matrix row came from: a marginal input or a product of two.
struct ColumnOrigin
{
    Index first = -1;
    Index second = -1;

    bool is_pair() const { return second >= 0; }
    static ColumnOrigin marginal(Index j) { return {j, -1}; }
    static ColumnOrigin pair(Index r, Index s) { return {r, s}; }
    bool operator==(const ColumnOrigin&) const = default;
};

struct Dataset
{
    Matrix X;   // J x N
    Matrix Y;   // K x N
    std::vector<std::string> sample_ids;
    std::vector<std::string> input_ids;
    std::vector<std::string> output_ids;
    // Inputs flagged here are held at zero by every solver.
    std::vector<bool> excluded_inputs;
    // Empty unless the design was produced by interaction expansion.
    std::vector<ColumnOrigin> column_map;

    Dataset() = default;
    Dataset(Matrix x, Matrix y);

    Index n_inputs() const { return X.rows(); }
    Index n_outputs() const { return Y.rows(); }
    Index n_samples() const { return X.cols(); }

    bool is_excluded(Index j) const
    {
        return !excluded_inputs.empty() && excluded_inputs[static_cast<std::size_t>(j)];
    }
    bool is_pair_column(Index j) const
    {
        return !column_map.empty() && column_map[static_cast<std::size_t>(j)].is_pair();
    }

    /// Copy with both X and Y rows standardized; constant input rows get excluded.
    Dataset standardized() const;

    /// Copy restricted to the given sample columns (labels carried along).
    Dataset select_samples(const std::vector<Index>& cols) const;

    void validate() const;
};

struct GroupStructure
{
    std::vector<IndexSet> input_groups;    // G, over {0..J-1}
    std::vector<IndexSet> output_groups;   // H, over {0..K-1}

    /// Sorts each group, rejects empty/out-of-range/duplicate groups.
    void validate(Index n_inputs, Index n_outputs) const;

    /// Adds a singleton group for every index not covered by any group.
    GroupStructure covering(Index n_inputs, Index n_outputs) const;

    static GroupStructure singletons(Index n_inputs, Index n_outputs);
};

struct PenaltyConfig
{
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    // L1 weight for interaction columns; defaults to lambda1 when unset.
    std::optional<double> lambda4;

    double l1_for_pairs() const { return lambda4.value_or(lambda1); }
    void validate() const;
};

/**
 * K x J coefficient matrix with exact zeros off the support.
 * Per-row and per-column nonzero counts are kept in sync with every write.
 */
class CoefMatrix
{
public:
    CoefMatrix() = default;
    CoefMatrix(Index n_outputs, Index n_inputs);
    explicit CoefMatrix(const Matrix& dense);

    Index n_outputs() const { return values_.rows(); }
    Index n_inputs() const { return values_.cols(); }

    double operator()(Index k, Index j) const { return values_(k, j); }
    void set(Index k, Index j, double v);

    const Matrix& dense() const { return values_; }
    std::size_t nnz() const { return nnz_; }
    Index row_nnz(Index k) const { return row_nnz_[static_cast<std::size_t>(k)]; }
    Index col_nnz(Index j) const { return col_nnz_[static_cast<std::size_t>(j)]; }
    bool is_nonzero(Index k, Index j) const { return values_(k, j) != 0.0; }

    /// (k, j) pairs with nonzero value, row-major order.
    std::vector<std::pair<Index, Index>> support() const;

private:
    void recount();

    Matrix values_;
    std::vector<Index> row_nnz_;
    std::vector<Index> col_nnz_;
    std::size_t nnz_ = 0;
};

/// Y - B X, maintained under single-coefficient updates.
class ResidualState
{
public:
    ResidualState(const Dataset& ds, const CoefMatrix& b);

    const Matrix& residual() const { return r_; }

    /// Row k of R dotted with x_j.
    double correlation(Index k, Index j) const;

    /// Records that beta_k^j changed by delta.
    void apply_delta(Index k, Index j, double delta);

    void resync(const CoefMatrix& b);

    /// ||R - (Y - B X)||_F
    double drift(const CoefMatrix& b) const;

private:
    const Dataset* ds_;
    Matrix r_;
};

/// r_k^j = row k of R + beta_k^j x_j.
Vector partial_residual(const ResidualState& rs, const CoefMatrix& b, Index k, Index j,
                        const Eigen::Ref<const Vector>& x_j);

double squared_loss(const Dataset& ds, const CoefMatrix& b);

/**
 * Full penalized objective
 *   1/2 ||Y - BX||_F^2 + l1 ||B||_1 + l2 sum_k sum_g ||b_k^g|| + l3 sum_j sum_h ||b_h^j||
 * with G and H completed by singletons. Interaction columns (column_map) use lambda4.
 */
double objective_value(const Dataset& ds, const CoefMatrix& b, const GroupStructure& gs,
                       const PenaltyConfig& pc);

/// Penalty part only, given residual sum already known.
double penalty_value(const CoefMatrix& b, const GroupStructure& covered, const PenaltyConfig& pc,
                     const Dataset& ds);

/// Row-wise ridge: each beta_k minimizes 1/2||y_k - beta_k X||^2 + ridge/2 ||beta_k||^2.
CoefMatrix ridge_init(const Dataset& ds, double ridge_lambda = 1.0);

}  // namespace siol
