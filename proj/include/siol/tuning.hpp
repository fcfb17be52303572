#pragma once
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>
#include <siol/core_model.hpp>
#include <siol/higt.hpp>

namespace siol {

/// (lambda2', lambda3') -> (lambda2' lambda3', (1 - lambda2') lambda3').
std::pair<double, double> reparametrize(double lambda2_prime, double lambda3_prime);

PenaltyConfig penalty_from_prime(double lambda1, double lambda2_prime, double lambda3_prime,
                                 std::optional<double> lambda4 = std::nullopt);

struct TuningGrid
{
    std::vector<double> lambda1_values{0.001, 0.01, 0.05, 0.1, 0.5};
    std::vector<double> lambda2_prime_values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> lambda3_prime_values{0.01, 0.1, 0.5, 1.0};
    int folds = 5;

    void validate() const;
};

struct GridPoint
{
    double lambda1 = 0.0;
    double lambda2_prime = 0.0;
    double lambda3_prime = 0.0;

    bool operator==(const GridPoint&) const = default;
};

struct CvRow
{
    GridPoint point;
    int fold = 0;   // 1-based
    double mse = 0.0;
};

struct CvOutcome
{
    GridPoint best_point;
    PenaltyConfig best;
    double best_score = 0.0;
    std::vector<CvRow> table;

    /// Mean validation MSE per grid point, in grid enumeration order.
    std::vector<std::pair<GridPoint, double>> scores;
};

/// Seeded shuffle of the samples, cut into contiguous blocks; returns the fold of each sample.
std::vector<int> fold_assignment(Index n_samples, int folds, std::uint64_t seed);

/**
 * k-fold CV over the grid. Each fit trains on the other folds and is scored by the mean
 * squared error of B X_val against Y_val. Fits that throw score +inf.
 */
CvOutcome cv_grid_search(const Dataset& ds, const GroupStructure& gs, const TuningGrid& grid,
                         const SolverSettings& settings = {}, std::uint64_t seed = 1,
                         int threads = 1, std::optional<double> lambda4 = std::nullopt);

}  // namespace siol
