#include <siol/core_model.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace siol {

bool StandardizedRows::any_constant() const
{
    return std::find(constant_rows.begin(), constant_rows.end(), true) != constant_rows.end();
}

StandardizedRows standardize_rows(const Matrix& m)
{
    if (!m.allFinite()) {
        throw InputError("standardize_rows: matrix contains non-finite entries");
    }
    StandardizedRows out;
    out.values = m;
    out.constant_rows.assign(static_cast<std::size_t>(m.rows()), false);
    for (Index i = 0; i < m.rows(); ++i) {
        auto row = out.values.row(i);
        if (row.size() == 0) continue;
        const double mean = row.mean();
        row.array() -= mean;
        // Second pass removes the rounding left by the first centering.
        row.array() -= row.mean();
        const double norm = row.norm();
        const double scale = std::max(std::abs(mean), m.row(i).cwiseAbs().maxCoeff());
        if (norm <= 1e-12 * std::max(1.0, scale) * std::sqrt(static_cast<double>(row.size()))) {
            row.setZero();
            out.constant_rows[static_cast<std::size_t>(i)] = true;
            continue;
        }
        row /= norm;
    }
    return out;
}

Dataset::Dataset(Matrix x, Matrix y)
    : X(std::move(x)), Y(std::move(y))
{
    validate();
}

void Dataset::validate() const
{
    if (X.cols() != Y.cols()) {
        std::ostringstream ss;
        ss << "dataset: X has " << X.cols() << " samples but Y has " << Y.cols();
        throw InputError(ss.str());
    }
    if (!X.allFinite() || !Y.allFinite()) {
        throw InputError("dataset: non-finite entries");
    }
    if (!excluded_inputs.empty() && static_cast<Index>(excluded_inputs.size()) != X.rows()) {
        throw InputError("dataset: excluded_inputs length does not match J");
    }
    if (!column_map.empty() && static_cast<Index>(column_map.size()) != X.rows()) {
        throw InputError("dataset: column_map length does not match J");
    }
}

Dataset Dataset::standardized() const
{
    Dataset out = *this;
    auto xs = standardize_rows(X);
    auto ys = standardize_rows(Y);
    out.X = std::move(xs.values);
    out.Y = std::move(ys.values);
    out.excluded_inputs = std::move(xs.constant_rows);
    if (!excluded_inputs.empty()) {
        for (std::size_t j = 0; j < out.excluded_inputs.size(); ++j) {
            out.excluded_inputs[j] = out.excluded_inputs[j] || excluded_inputs[j];
        }
    }
    return out;
}

Dataset Dataset::select_samples(const std::vector<Index>& cols) const
{
    Dataset out;
    out.X.resize(X.rows(), static_cast<Index>(cols.size()));
    out.Y.resize(Y.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out.X.col(static_cast<Index>(c)) = X.col(cols[c]);
        out.Y.col(static_cast<Index>(c)) = Y.col(cols[c]);
        if (!sample_ids.empty()) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(cols[c])]);
    }
    out.input_ids = input_ids;
    out.output_ids = output_ids;
    out.excluded_inputs = excluded_inputs;
    out.column_map = column_map;
    return out;
}

namespace {

void validate_groups(const std::vector<IndexSet>& groups, Index n, const char* what)
{
    std::set<IndexSet> seen;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        IndexSet g = groups[i];
        if (g.empty()) {
            throw InputError(std::string(what) + " group " + std::to_string(i + 1) + " is empty");
        }
        std::sort(g.begin(), g.end());
        if (std::adjacent_find(g.begin(), g.end()) != g.end()) {
            throw InputError(std::string(what) + " group " + std::to_string(i + 1) +
                             " repeats an index");
        }
        if (g.front() < 0 || g.back() >= n) {
            throw InputError(std::string(what) + " group " + std::to_string(i + 1) +
                             " has an index out of range");
        }
        if (!seen.insert(g).second) {
            throw InputError(std::string(what) + " group " + std::to_string(i + 1) +
                             " duplicates an earlier group");
        }
    }
}

std::vector<IndexSet> complete(const std::vector<IndexSet>& groups, Index n)
{
    std::vector<IndexSet> out;
    out.reserve(groups.size());
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (auto g : groups) {
        std::sort(g.begin(), g.end());
        for (auto i : g) covered[static_cast<std::size_t>(i)] = true;
        out.push_back(std::move(g));
    }
    for (Index i = 0; i < n; ++i) {
        if (!covered[static_cast<std::size_t>(i)]) out.push_back({i});
    }
    return out;
}

}  // namespace

void GroupStructure::validate(Index n_inputs, Index n_outputs) const
{
    validate_groups(input_groups, n_inputs, "input");
    validate_groups(output_groups, n_outputs, "output");
}

GroupStructure GroupStructure::covering(Index n_inputs, Index n_outputs) const
{
    validate(n_inputs, n_outputs);
    return {complete(input_groups, n_inputs), complete(output_groups, n_outputs)};
}

GroupStructure GroupStructure::singletons(Index n_inputs, Index n_outputs)
{
    return GroupStructure{}.covering(n_inputs, n_outputs);
}

void PenaltyConfig::validate() const
{
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(lambda1) || !ok(lambda2) || !ok(lambda3) || (lambda4 && !ok(*lambda4))) {
        throw InputError("penalty parameters must be finite and non-negative");
    }
}

CoefMatrix::CoefMatrix(Index n_outputs, Index n_inputs)
    : values_(Matrix::Zero(n_outputs, n_inputs)),
      row_nnz_(static_cast<std::size_t>(n_outputs), 0),
      col_nnz_(static_cast<std::size_t>(n_inputs), 0)
{}

CoefMatrix::CoefMatrix(const Matrix& dense)
    : values_(dense)
{
    recount();
}

void CoefMatrix::recount()
{
    row_nnz_.assign(static_cast<std::size_t>(values_.rows()), 0);
    col_nnz_.assign(static_cast<std::size_t>(values_.cols()), 0);
    nnz_ = 0;
    for (Index k = 0; k < values_.rows(); ++k) {
        for (Index j = 0; j < values_.cols(); ++j) {
            if (values_(k, j) != 0.0) {
                ++row_nnz_[static_cast<std::size_t>(k)];
                ++col_nnz_[static_cast<std::size_t>(j)];
                ++nnz_;
            } else {
                values_(k, j) = 0.0;  // normalizes -0.0
            }
        }
    }
}

void CoefMatrix::set(Index k, Index j, double v)
{
    double& slot = values_(k, j);
    const bool was = slot != 0.0;
    const bool now = v != 0.0;
    slot = now ? v : 0.0;
    if (was == now) return;
    const Index d = now ? 1 : -1;
    row_nnz_[static_cast<std::size_t>(k)] += d;
    col_nnz_[static_cast<std::size_t>(j)] += d;
    nnz_ = static_cast<std::size_t>(static_cast<Index>(nnz_) + d);
}

std::vector<std::pair<Index, Index>> CoefMatrix::support() const
{
    std::vector<std::pair<Index, Index>> out;
    out.reserve(nnz_);
    for (Index k = 0; k < values_.rows(); ++k) {
        for (Index j = 0; j < values_.cols(); ++j) {
            if (values_(k, j) != 0.0) out.emplace_back(k, j);
        }
    }
    return out;
}

ResidualState::ResidualState(const Dataset& ds, const CoefMatrix& b)
    : ds_(&ds)
{
    if (b.n_outputs() != ds.n_outputs() || b.n_inputs() != ds.n_inputs()) {
        throw InputError("residual: coefficient shape does not match dataset");
    }
    resync(b);
}

double ResidualState::correlation(Index k, Index j) const
{
    return r_.row(k).dot(ds_->X.row(j));
}

void ResidualState::apply_delta(Index k, Index j, double delta)
{
    if (delta != 0.0) r_.row(k).noalias() -= delta * ds_->X.row(j);
}

void ResidualState::resync(const CoefMatrix& b)
{
    r_ = ds_->Y;
    r_.noalias() -= b.dense() * ds_->X;
}

double ResidualState::drift(const CoefMatrix& b) const
{
    Matrix exact = ds_->Y;
    exact.noalias() -= b.dense() * ds_->X;
    return (r_ - exact).norm();
}

Vector partial_residual(const ResidualState& rs, const CoefMatrix& b, Index k, Index j,
                        const Eigen::Ref<const Vector>& x_j)
{
    if (k < 0 || k >= b.n_outputs() || j < 0 || j >= b.n_inputs()) {
        throw InputError("partial_residual: index out of range");
    }
    Vector out = rs.residual().row(k).transpose();
    const double beta = b(k, j);
    if (beta != 0.0) out += beta * x_j;
    return out;
}

double squared_loss(const Dataset& ds, const CoefMatrix& b)
{
    Matrix r = ds.Y;
    r.noalias() -= b.dense() * ds.X;
    return 0.5 * r.squaredNorm();
}

double penalty_value(const CoefMatrix& b, const GroupStructure& covered, const PenaltyConfig& pc,
                     const Dataset& ds)
{
    const Matrix& B = b.dense();
    double l1 = 0.0;
    double l1_pairs = 0.0;
    for (Index j = 0; j < B.cols(); ++j) {
        const double s = B.col(j).cwiseAbs().sum();
        if (ds.is_pair_column(j)) l1_pairs += s; else l1 += s;
    }
    double rows = 0.0;
    if (pc.lambda2 != 0.0) {
        for (Index k = 0; k < B.rows(); ++k) {
            for (const auto& g : covered.input_groups) {
                double sq = 0.0;
                for (auto j : g) sq += B(k, j) * B(k, j);
                rows += std::sqrt(sq);
            }
        }
    }
    double cols = 0.0;
    if (pc.lambda3 != 0.0) {
        for (Index j = 0; j < B.cols(); ++j) {
            for (const auto& h : covered.output_groups) {
                double sq = 0.0;
                for (auto k : h) sq += B(k, j) * B(k, j);
                cols += std::sqrt(sq);
            }
        }
    }
    return pc.lambda1 * l1 + pc.l1_for_pairs() * l1_pairs + pc.lambda2 * rows + pc.lambda3 * cols;
}

double objective_value(const Dataset& ds, const CoefMatrix& b, const GroupStructure& gs,
                       const PenaltyConfig& pc)
{
    ds.validate();
    pc.validate();
    if (b.n_outputs() != ds.n_outputs() || b.n_inputs() != ds.n_inputs()) {
        throw InputError("objective: coefficient shape does not match dataset");
    }
    const auto covered = gs.covering(ds.n_inputs(), ds.n_outputs());
    return squared_loss(ds, b) + penalty_value(b, covered, pc, ds);
}

CoefMatrix ridge_init(const Dataset& ds, double ridge_lambda)
{
    if (!(ridge_lambda > 0.0) || !std::isfinite(ridge_lambda)) {
        throw InputError("ridge_init: ridge_lambda must be positive");
    }
    ds.validate();
    const Index J = ds.n_inputs();
    const Index N = ds.n_samples();
    Matrix B;
    if (J <= N) {
        // (X X^T + lambda I) B^T = X Y^T
        Eigen::MatrixXd gram = ds.X * ds.X.transpose();
        gram.diagonal().array() += ridge_lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw SolverError("ridge_init: factorization failed");
        Eigen::MatrixXd rhs = ds.X * ds.Y.transpose();
        B = llt.solve(rhs).transpose();
    } else {
        // B = Y (X^T X + lambda I)^{-1} X^T, the N x N form.
        Eigen::MatrixXd gram = ds.X.transpose() * ds.X;
        gram.diagonal().array() += ridge_lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw SolverError("ridge_init: factorization failed");
        Eigen::MatrixXd yt = ds.Y.transpose();
        Eigen::MatrixXd w = llt.solve(yt);
        B = (ds.X * w).transpose();
    }
    if (!B.allFinite()) throw SolverError("ridge_init: non-finite solution");
    for (Index j = 0; j < J; ++j) {
        if (ds.is_excluded(j)) B.col(j).setZero();
    }
    return CoefMatrix(B);
}

}  // namespace siol
