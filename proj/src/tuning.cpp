#include <siol/tuning.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace siol {

std::pair<double, double> reparametrize(double lambda2_prime, double lambda3_prime)
{
    if (!(lambda2_prime >= 0.0 && lambda2_prime <= 1.0)) {
        throw InputError("lambda2' must lie in [0, 1]");
    }
    if (!(lambda3_prime >= 0.0) || !std::isfinite(lambda3_prime)) {
        throw InputError("lambda3' must be finite and non-negative");
    }
    const double l2 = lambda2_prime * lambda3_prime;
    return {l2, lambda3_prime - l2};
}

PenaltyConfig penalty_from_prime(double lambda1, double lambda2_prime, double lambda3_prime,
                                 std::optional<double> lambda4)
{
    const auto [l2, l3] = reparametrize(lambda2_prime, lambda3_prime);
    PenaltyConfig pc{lambda1, l2, l3, lambda4};
    pc.validate();
    return pc;
}

void TuningGrid::validate() const
{
    if (lambda1_values.empty() || lambda2_prime_values.empty() || lambda3_prime_values.empty()) {
        throw InputError("tuning grid lists must be non-empty");
    }
    for (double v : lambda2_prime_values) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("lambda2' values must lie in [0, 1]");
    }
    for (double v : lambda1_values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("lambda1 values must be non-negative");
    }
    for (double v : lambda3_prime_values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("lambda3' values must be non-negative");
    }
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
}

std::vector<int> fold_assignment(Index n_samples, int folds, std::uint64_t seed)
{
    std::vector<Index> perm(static_cast<std::size_t>(n_samples));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> fold(static_cast<std::size_t>(n_samples));
    for (Index i = 0; i < n_samples; ++i) {
        fold[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
            static_cast<int>(i * folds / n_samples);
    }
    return fold;
}

CvOutcome cv_grid_search(const Dataset& ds, const GroupStructure& gs, const TuningGrid& grid,
                         const SolverSettings& settings, std::uint64_t seed, int threads,
                         std::optional<double> lambda4)
{
    grid.validate();
    ds.validate();
    gs.validate(ds.n_inputs(), ds.n_outputs());
    if (ds.n_samples() < grid.folds) throw InputError("fewer samples than folds");

    std::vector<GridPoint> points;
    for (double l1 : grid.lambda1_values)
        for (double l2p : grid.lambda2_prime_values)
            for (double l3p : grid.lambda3_prime_values) points.push_back({l1, l2p, l3p});

    const auto fold = fold_assignment(ds.n_samples(), grid.folds, seed);
    std::vector<Dataset> train(static_cast<std::size_t>(grid.folds));
    std::vector<Dataset> val(static_cast<std::size_t>(grid.folds));
    for (int f = 0; f < grid.folds; ++f) {
        std::vector<Index> tr, va;
        for (Index n = 0; n < ds.n_samples(); ++n) {
            (fold[static_cast<std::size_t>(n)] == f ? va : tr).push_back(n);
        }
        train[static_cast<std::size_t>(f)] = ds.select_samples(tr);
        val[static_cast<std::size_t>(f)] = ds.select_samples(va);
    }

    const std::size_t n_tasks = points.size() * static_cast<std::size_t>(grid.folds);
    std::vector<double> mse(n_tasks, std::numeric_limits<double>::infinity());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < n_tasks; t = next++) {
            const auto& p = points[t / static_cast<std::size_t>(grid.folds)];
            const auto f = t % static_cast<std::size_t>(grid.folds);
            try {
                const auto pc = penalty_from_prime(p.lambda1, p.lambda2_prime, p.lambda3_prime, lambda4);
                const auto res = fit(train[f], gs, pc, settings);
                const Matrix err = val[f].Y - res.coef.dense() * val[f].X;
                mse[t] = err.squaredNorm() / static_cast<double>(err.size());
                if (!std::isfinite(mse[t])) mse[t] = std::numeric_limits<double>::infinity();
            } catch (const std::exception&) {
                mse[t] = std::numeric_limits<double>::infinity();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(n_tasks)));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    CvOutcome out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double sum = 0.0;
        for (int f = 0; f < grid.folds; ++f) {
            const double v = mse[i * static_cast<std::size_t>(grid.folds) + static_cast<std::size_t>(f)];
            out.table.push_back({points[i], f + 1, v});
            sum += v;
        }
        const double score = sum / grid.folds;
        out.scores.emplace_back(points[i], score);
        if (i == 0) continue;
        const auto& cur = out.scores[best];
        const bool better =
            score < cur.second ||
            (score == cur.second &&
             (points[i].lambda3_prime > cur.first.lambda3_prime ||
              (points[i].lambda3_prime == cur.first.lambda3_prime &&
               (points[i].lambda1 > cur.first.lambda1 ||
                (points[i].lambda1 == cur.first.lambda1 &&
                 points[i].lambda2_prime > cur.first.lambda2_prime)))));
        if (better) best = i;
    }
    out.best_point = out.scores[best].first;
    out.best_score = out.scores[best].second;
    out.best = penalty_from_prime(out.best_point.lambda1, out.best_point.lambda2_prime,
                                  out.best_point.lambda3_prime, lambda4);
    return out;
}

}  // namespace siol
