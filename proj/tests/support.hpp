#pragma once
#include <cmath>
#include <random>
#include <siol/core_model.hpp>

namespace siol::testing {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c) m(i, c) = nd(rng);
    return m;
}

/// Standardized instance with a sparse planted B and moderate noise.
inline Dataset random_instance(Index J, Index K, Index N, std::uint64_t seed, double density = 0.5,
                               double noise = 0.5)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix X = gaussian(J, N, rng);
    Matrix B = Matrix::Zero(K, J);
    for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
            if (u(rng) < density) B(k, j) = nd(rng);
    Matrix Y = B * X + gaussian(K, N, rng, noise);
    return Dataset(X, Y).standardized();
}

/// Overlapping groups usable for any J >= 4, K >= 2.
inline GroupStructure overlapping_groups(Index J, Index K)
{
    GroupStructure gs;
    gs.input_groups = {{0, 1, 2}, {2, 3}, {1, J - 1}};
    gs.output_groups = K > 2 ? std::vector<IndexSet>{{0, 1}, {1, K - 1}}
                             : std::vector<IndexSet>{{0, 1}, {1}};
    return gs;
}

/// Plain cyclic lasso coordinate descent, written without any solver code.
inline Matrix lasso_cd(const Matrix& X, const Matrix& Y, double lambda, double tol = 1e-14,
                       int max_sweeps = 100000)
{
    const Index J = X.rows();
    const Index K = Y.rows();
    Matrix B = Matrix::Zero(K, J);
    for (Index k = 0; k < K; ++k) {
        Eigen::RowVectorXd r = Y.row(k);
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double biggest = 0.0;
            for (Index j = 0; j < J; ++j) {
                const double sq = X.row(j).squaredNorm();
                if (sq == 0.0) continue;
                const double old = B(k, j);
                const double z = r.dot(X.row(j)) + old * sq;
                const double mag = std::max(std::abs(z) - lambda, 0.0);
                const double next = std::copysign(mag, z) / sq;
                if (next != old) {
                    r -= (next - old) * X.row(j);
                    B(k, j) = next;
                    biggest = std::max(biggest, std::abs(next - old));
                }
            }
            if (biggest < tol) break;
        }
    }
    return B;
}

/// Objective by explicit loops over the definition; groups given without singleton completion.
inline double objective_by_loops(const Matrix& X, const Matrix& Y, const Matrix& B,
                                 const std::vector<IndexSet>& G, const std::vector<IndexSet>& H,
                                 double l1, double l2, double l3)
{
    const Index J = X.rows();
    const Index K = Y.rows();
    const Index N = X.cols();
    double loss = 0.0;
    for (Index k = 0; k < K; ++k) {
        for (Index n = 0; n < N; ++n) {
            double fit = 0.0;
            for (Index j = 0; j < J; ++j) fit += B(k, j) * X(j, n);
            loss += (Y(k, n) - fit) * (Y(k, n) - fit);
        }
    }
    double lasso = 0.0;
    for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j) lasso += std::abs(B(k, j));
    std::vector<bool> in_g(static_cast<std::size_t>(J), false), in_h(static_cast<std::size_t>(K), false);
    double rows = 0.0;
    for (Index k = 0; k < K; ++k) {
        for (const auto& g : G) {
            double s = 0.0;
            for (auto j : g) s += B(k, j) * B(k, j);
            rows += std::sqrt(s);
        }
    }
    for (const auto& g : G)
        for (auto j : g) in_g[static_cast<std::size_t>(j)] = true;
    for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
            if (!in_g[static_cast<std::size_t>(j)]) rows += std::abs(B(k, j));
    double cols = 0.0;
    for (Index j = 0; j < J; ++j) {
        for (const auto& h : H) {
            double s = 0.0;
            for (auto k : h) s += B(k, j) * B(k, j);
            cols += std::sqrt(s);
        }
    }
    for (const auto& h : H)
        for (auto k : h) in_h[static_cast<std::size_t>(k)] = true;
    for (Index j = 0; j < J; ++j)
        for (Index k = 0; k < K; ++k)
            if (!in_h[static_cast<std::size_t>(k)]) cols += std::abs(B(k, j));
    return 0.5 * loss + l1 * lasso + l2 * rows + l3 * cols;
}

}  // namespace siol::testing
