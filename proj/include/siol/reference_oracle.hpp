#pragma once
#include <siol/core_model.hpp>

namespace siol {

struct OracleSettings
{
    long max_steps = 200000;
    double objective_tol = 1e-5;
    // Search start for the step constant c of the c / sqrt(t) schedule.
    double initial_step = 1.0;

    void validate() const;
};

struct OracleResult
{
    CoefMatrix coef;
    double objective = 0.0;
    long steps = 0;
    // Best objective after 1, 2, 4, 8, ... steps.
    std::vector<double> best_trace;
};

/**
 * Subgradient descent on the full objective from B = 0, step c / sqrt(t), keeping the best
 * iterate. The subgradient of every norm term is taken as 0 at 0. Limited to K * J <= 200.
 */
OracleResult subgradient_solve(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
                               const OracleSettings& settings = {});

/**
 * Largest distance, over coefficients, between the loss gradient (y_k - beta_k X) . x_j and
 * the subdifferential of the penalty at beta_k^j.
 */
double kkt_residual(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
                    const CoefMatrix& b);

}  // namespace siol
