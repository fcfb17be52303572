#include <doctest.h>

#include <random>
#include <siol/higt.hpp>
#include <siol/reference_oracle.hpp>

#include "support.hpp"

using namespace siol;
using siol::testing::random_instance;

TEST_CASE("oracle without penalty reaches the least-squares objective")
{
    auto ds = random_instance(4, 2, 20, 3);
    auto res = subgradient_solve(ds, {}, {});
    double want = 0.0;
    for (Index k = 0; k < 2; ++k) {
        Eigen::MatrixXd A = ds.X * ds.X.transpose();
        Eigen::VectorXd b = ds.X * ds.Y.row(k).transpose();
        Eigen::VectorXd beta = A.ldlt().solve(b);
        want += 0.5 * (ds.Y.row(k).transpose() - ds.X.transpose() * beta).squaredNorm();
    }
    CHECK(res.objective == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("oracle with a huge lasso penalty stays at zero")
{
    auto ds = random_instance(4, 3, 12, 4);
    PenaltyConfig pc{10.0 * lambda1_max(ds), 0.0, 0.0, {}};
    auto res = subgradient_solve(ds, {}, pc);
    CHECK(res.coef.dense().cwiseAbs().maxCoeff() < 1e-6);
    CHECK(res.objective == doctest::Approx(0.5 * ds.Y.squaredNorm()).epsilon(1e-6));
}

TEST_CASE("oracle and HiGT certify each other on small instances")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto ds = random_instance(5, 3, 18, 900 + seed);
        auto gs = siol::testing::overlapping_groups(5, 3);
        PenaltyConfig pc{0.05, 0.08, 0.06, {}};
        SolverSettings st;
        st.tol = 1e-12;
        auto h = fit(ds, gs, pc, st);
        auto o = subgradient_solve(ds, gs, pc);
        INFO("seed " << seed);
        CHECK(std::abs(h.report.final_objective - o.objective) <= 1e-3 * o.objective);
        // Both are descent certificates; the oracle should never beat HiGT by more than slack.
        CHECK(h.report.final_objective <= o.objective * (1.0 + 1e-6));
    }
}

TEST_CASE("best trace is non-increasing")
{
    auto ds = random_instance(4, 3, 12, 8);
    auto res = subgradient_solve(ds, siol::testing::overlapping_groups(4, 3), {0.05, 0.1, 0.1, {}});
    REQUIRE(res.best_trace.size() > 3);
    for (std::size_t i = 1; i < res.best_trace.size(); ++i)
        CHECK(res.best_trace[i] <= res.best_trace[i - 1]);
}

TEST_CASE("kkt residual")
{
    auto ds = random_instance(4, 3, 15, 10);
    SUBCASE("zero is optimal above the universal threshold")
    {
        PenaltyConfig pc{lambda1_max(ds), 0.0, 0.0, {}};
        CHECK(kkt_residual(ds, {}, pc, CoefMatrix(3, 4)) == 0.0);
    }
    SUBCASE("random coefficients are not optimal and the oracle improves on them")
    {
        auto gs = siol::testing::overlapping_groups(4, 3);
        PenaltyConfig pc{0.05, 0.1, 0.1, {}};
        std::mt19937_64 rng(1);
        CoefMatrix random(siol::testing::gaussian(3, 4, rng));
        const double bad = kkt_residual(ds, gs, pc, random);
        CHECK(bad > 0.0);
        auto o = subgradient_solve(ds, gs, pc);
        CHECK(kkt_residual(ds, gs, pc, o.coef) < bad);
    }
    SUBCASE("converged HiGT fit")
    {
        auto gs = siol::testing::overlapping_groups(4, 3);
        PenaltyConfig pc{0.05, 0.1, 0.1, {}};
        SolverSettings st;
        st.tol = 1e-12;
        auto h = fit(ds, gs, pc, st);
        CHECK(kkt_residual(ds, gs, pc, h.coef) <= 1e-4);
    }
}

TEST_CASE("oracle refuses large problems")
{
    auto ds = random_instance(21, 10, 12, 2);
    CHECK_THROWS_AS(subgradient_solve(ds, {}, {0.1, 0, 0, {}}), InputError);
}
