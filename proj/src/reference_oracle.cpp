#include <siol/reference_oracle.hpp>

#include <algorithm>
#include <cmath>

namespace siol {

void OracleSettings::validate() const
{
    if (max_steps < 1) throw InputError("oracle: max_steps must be at least 1");
    if (!(objective_tol > 0.0)) throw InputError("oracle: objective_tol must be positive");
    if (!(initial_step > 0.0)) throw InputError("oracle: initial_step must be positive");
}

namespace {

// Written against plain matrices so that nothing is shared with the solver's bookkeeping.
struct Problem
{
    const Matrix& X;
    const Matrix& Y;
    std::vector<IndexSet> G;
    std::vector<IndexSet> H;
    PenaltyConfig pc;
    std::vector<double> l1;   // per input column
    std::vector<bool> frozen; // excluded inputs

    double objective(const Matrix& B) const
    {
        double f = 0.5 * (Y - B * X).squaredNorm();
        for (Index k = 0; k < B.rows(); ++k)
            for (Index j = 0; j < B.cols(); ++j) f += l1[static_cast<std::size_t>(j)] * std::abs(B(k, j));
        for (Index k = 0; k < B.rows(); ++k) {
            for (const auto& g : G) {
                double s = 0.0;
                for (auto j : g) s += B(k, j) * B(k, j);
                f += pc.lambda2 * std::sqrt(s);
            }
        }
        for (Index j = 0; j < B.cols(); ++j) {
            for (const auto& h : H) {
                double s = 0.0;
                for (auto k : h) s += B(k, j) * B(k, j);
                f += pc.lambda3 * std::sqrt(s);
            }
        }
        return f;
    }

    Matrix subgradient(const Matrix& B) const
    {
        Matrix D = -(Y - B * X) * X.transpose();
        for (Index k = 0; k < B.rows(); ++k) {
            for (Index j = 0; j < B.cols(); ++j) {
                const double v = B(k, j);
                if (v > 0) D(k, j) += l1[static_cast<std::size_t>(j)];
                else if (v < 0) D(k, j) -= l1[static_cast<std::size_t>(j)];
            }
            for (const auto& g : G) {
                double s = 0.0;
                for (auto j : g) s += B(k, j) * B(k, j);
                if (s == 0.0) continue;
                const double n = std::sqrt(s);
                for (auto j : g) D(k, j) += pc.lambda2 * B(k, j) / n;
            }
        }
        for (Index j = 0; j < B.cols(); ++j) {
            for (const auto& h : H) {
                double s = 0.0;
                for (auto k : h) s += B(k, j) * B(k, j);
                if (s == 0.0) continue;
                const double n = std::sqrt(s);
                for (auto k : h) D(k, j) += pc.lambda3 * B(k, j) / n;
            }
        }
        for (Index j = 0; j < B.cols(); ++j)
            if (frozen[static_cast<std::size_t>(j)]) D.col(j).setZero();
        return D;
    }
};

Problem make_problem(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc)
{
    gs.validate(ds.n_inputs(), ds.n_outputs());
    const auto covered = gs.covering(ds.n_inputs(), ds.n_outputs());
    Problem p{ds.X, ds.Y, covered.input_groups, covered.output_groups, pc, {}, {}};
    for (Index j = 0; j < ds.n_inputs(); ++j) {
        p.l1.push_back(ds.is_pair_column(j) ? pc.l1_for_pairs() : pc.lambda1);
        p.frozen.push_back(ds.is_excluded(j));
    }
    return p;
}

}  // namespace

OracleResult subgradient_solve(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
                               const OracleSettings& settings)
{
    ds.validate();
    pc.validate();
    settings.validate();
    if (ds.n_outputs() * ds.n_inputs() > 200) {
        throw InputError("oracle: K * J must be at most 200");
    }
    const Problem p = make_problem(ds, gs, pc);

    Matrix B = Matrix::Zero(ds.n_outputs(), ds.n_inputs());
    double f = p.objective(B);
    Matrix best = B;
    double best_f = f;

    OracleResult out;
    Matrix D = p.subgradient(B);
    const double dn = D.norm();
    if (dn == 0.0) {
        out.coef = CoefMatrix(best);
        out.objective = best_f;
        return out;
    }
    // Backtrack the step constant so that the first step decreases the objective.
    double c = settings.initial_step / dn;
    for (int tries = 0; tries < 60 && p.objective(B - c * D) > f; ++tries) c *= 0.5;

    long next_mark = 1;
    for (long t = 1; t <= settings.max_steps; ++t) {
        B -= (c / std::sqrt(static_cast<double>(t))) * D;
        f = p.objective(B);
        if (f < best_f) {
            best_f = f;
            best = B;
        }
        if (t == next_mark) {
            out.best_trace.push_back(best_f);
            next_mark *= 2;
        }
        out.steps = t;
        D = p.subgradient(B);
    }
    out.coef = CoefMatrix(best);
    out.objective = best_f;
    return out;
}

double kkt_residual(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
                    const CoefMatrix& b)
{
    const Problem p = make_problem(ds, gs, pc);
    const Matrix& B = b.dense();
    const Matrix grad = (p.Y - B * p.X) * p.X.transpose();

    std::vector<double> row_norm(static_cast<std::size_t>(B.rows()) * p.G.size());
    for (Index k = 0; k < B.rows(); ++k) {
        for (std::size_t gi = 0; gi < p.G.size(); ++gi) {
            double s = 0.0;
            for (auto j : p.G[gi]) s += B(k, j) * B(k, j);
            row_norm[static_cast<std::size_t>(k) * p.G.size() + gi] = std::sqrt(s);
        }
    }
    std::vector<double> col_norm(static_cast<std::size_t>(B.cols()) * p.H.size());
    for (Index j = 0; j < B.cols(); ++j) {
        for (std::size_t hi = 0; hi < p.H.size(); ++hi) {
            double s = 0.0;
            for (auto k : p.H[hi]) s += B(k, j) * B(k, j);
            col_norm[static_cast<std::size_t>(j) * p.H.size() + hi] = std::sqrt(s);
        }
    }

    double worst = 0.0;
    for (Index k = 0; k < B.rows(); ++k) {
        for (Index j = 0; j < B.cols(); ++j) {
            if (p.frozen[static_cast<std::size_t>(j)]) continue;
            const double v = B(k, j);
            const double l1 = p.l1[static_cast<std::size_t>(j)];
            // The inclusion grad in [fixed - slack, fixed + slack] for this coordinate.
            double fixed = 0.0;
            double slack = 0.0;
            if (v != 0.0) fixed += l1 * (v > 0 ? 1.0 : -1.0);
            else slack += l1;
            for (std::size_t gi = 0; gi < p.G.size(); ++gi) {
                if (!std::binary_search(p.G[gi].begin(), p.G[gi].end(), j)) continue;
                const double n = row_norm[static_cast<std::size_t>(k) * p.G.size() + gi];
                if (n > 0.0) fixed += pc.lambda2 * v / n;
                else slack += pc.lambda2;
            }
            for (std::size_t hi = 0; hi < p.H.size(); ++hi) {
                if (!std::binary_search(p.H[hi].begin(), p.H[hi].end(), k)) continue;
                const double n = col_norm[static_cast<std::size_t>(j) * p.H.size() + hi];
                if (n > 0.0) fixed += pc.lambda3 * v / n;
                else slack += pc.lambda3;
            }
            const double dist = std::max(0.0, std::abs(grad(k, j) - fixed) - slack);
            worst = std::max(worst, dist);
        }
    }
    return worst;
}

}  // namespace siol
