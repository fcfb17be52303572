#include <siol/higt.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace siol {

void SolverSettings::validate() const
{
    if (!(tol > 0.0)) throw InputError("solver: tol must be positive");
    if (max_outer_iters < 1) throw InputError("solver: max_outer_iters must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw InputError("solver: damping must be in (0, 1]");
    if (resync_period < 1) throw InputError("solver: resync_period must be at least 1");
    if (warm_sweeps < 0) throw InputError("solver: warm_sweeps must be non-negative");
    if (!(warm_tol >= 0.0)) throw InputError("solver: warm_tol must be non-negative");
}

GroupStructure effective_groups(const GroupStructure& gs, const PenaltyConfig& pc, Index n_inputs,
                                Index n_outputs)
{
    gs.validate(n_inputs, n_outputs);
    GroupStructure eff = gs;
    if (pc.lambda2 == 0.0) eff.input_groups.clear();
    if (pc.lambda3 == 0.0) eff.output_groups.clear();
    return eff.covering(n_inputs, n_outputs);
}

namespace {

std::vector<std::vector<Index>> membership(const std::vector<IndexSet>& groups, Index n)
{
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (auto i : groups[gi]) out[static_cast<std::size_t>(i)].push_back(static_cast<Index>(gi));
    }
    return out;
}

CoefMatrix initial_estimate(const Dataset& ds, const SolverSettings& settings,
                            std::optional<CoefMatrix>& init)
{
    if (!init) return ridge_init(ds, settings.ridge_lambda);
    if (init->n_outputs() != ds.n_outputs() || init->n_inputs() != ds.n_inputs()) {
        throw InputError("fit: initial estimate has the wrong shape");
    }
    return std::move(*init);
}

}  // namespace

HigtSolver::HigtSolver(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
                       SolverSettings settings, std::optional<CoefMatrix> init,
                       std::shared_ptr<const PatternDag> dag)
    : ds_(ds),
      pc_(pc),
      settings_(settings),
      groups_(effective_groups(gs, pc, ds.n_inputs(), ds.n_outputs())),
      b_(initial_estimate(ds, settings, init)),
      rs_(ds, b_)
{
    ds.validate();
    pc.validate();
    settings.validate();
    if (dag) {
        if (dag->groups().input_groups != groups_.input_groups ||
            dag->groups().output_groups != groups_.output_groups) {
            throw InputError("fit: shared DAG was built for different groups");
        }
        dag_ = std::move(dag);
    } else {
        dag_ = std::make_shared<PatternDag>(groups_, ds.n_inputs(), ds.n_outputs(), settings.dag);
    }
    groups_of_input_ = membership(groups_.input_groups, ds.n_inputs());
    groups_of_output_ = membership(groups_.output_groups, ds.n_outputs());
    sqnorm_ = ds.X.rowwise().squaredNorm();

    bool touched = false;
    for (Index j = 0; j < ds.n_inputs(); ++j) {
        if (!ds.is_excluded(j) && sqnorm_(j) > 0.0) continue;
        for (Index k = 0; k < ds.n_outputs(); ++k) {
            if (b_(k, j) != 0.0) {
                b_.set(k, j, 0.0);
                touched = true;
            }
        }
    }
    if (touched) rs_.resync(b_);
}

double HigtSolver::l1_weight(Index j) const
{
    return ds_.is_pair_column(j) ? pc_.l1_for_pairs() : pc_.lambda1;
}

double HigtSolver::soft(Index j, double c) const
{
    // c - lambda1 s, where lambda1 s is c clipped to [-lambda1, lambda1].
    const double l = l1_weight(j);
    if (c > l) return c - l;
    if (c < -l) return c + l;
    return 0.0;
}

double HigtSolver::partial_correlation(Index k, Index j) const
{
    return rs_.correlation(k, j) + b_(k, j) * sqnorm_(j);
}

namespace {

// Euclidean norm that stays positive for tiny nonzero entries.
template <class Get>
double scaled_norm(const IndexSet& idx, Get get)
{
    double top = 0.0;
    for (auto i : idx) top = std::max(top, std::abs(get(i)));
    if (top == 0.0) return 0.0;
    double sq = 0.0;
    for (auto i : idx) {
        const double v = get(i) / top;
        sq += v * v;
    }
    return top * std::sqrt(sq);
}

}  // namespace

double HigtSolver::row_group_norm(Index k, Index g) const
{
    return scaled_norm(groups_.input_groups[static_cast<std::size_t>(g)],
                       [&](Index j) { return b_(k, j); });
}

double HigtSolver::col_group_norm(Index h, Index j) const
{
    return scaled_norm(groups_.output_groups[static_cast<std::size_t>(h)],
                       [&](Index k) { return b_(k, j); });
}

namespace {

// Optimality of beta_V = 0 for the problem restricted to V with everything else held:
// is c in box + sum_i lambda_i * ball_i ? Decided by block coordinate descent on the
// distance between c and that set.
struct ZeroTest
{
    std::vector<double> c;
    std::vector<double> box;
    std::vector<std::pair<double, std::vector<int>>> balls;
};

bool zero_feasible(const ZeroTest& t)
{
    const std::size_t n = t.c.size();
    double scale = 1.0;
    for (double v : t.c) scale = std::max(scale, std::abs(v));
    const double tol = 1e-10 * scale;

    std::vector<double> reach = t.box;
    for (const auto& [lam, members] : t.balls)
        for (int m : members) reach[static_cast<std::size_t>(m)] += lam;
    for (std::size_t m = 0; m < n; ++m) {
        if (std::abs(t.c[m]) > reach[m] + tol) return false;
    }
    if (t.balls.empty()) return true;

    std::vector<int> owners(n, 0);
    for (const auto& ball : t.balls)
        for (int m : ball.second) ++owners[static_cast<std::size_t>(m)];
    const bool disjoint = std::all_of(owners.begin(), owners.end(), [](int o) { return o <= 1; });
    if (disjoint) {
        for (const auto& [lam, members] : t.balls) {
            double sq = 0.0;
            for (int m : members) {
                const auto i = static_cast<std::size_t>(m);
                const double s = std::max(std::abs(t.c[i]) - t.box[i], 0.0);
                sq += s * s;
            }
            if (std::sqrt(sq) > lam + tol) return false;
        }
        return true;
    }

    // e = c - box*s - sum_i lambda_i u_i; minimize |e|^2 one component at a time.
    std::vector<double> w(n, 0.0);
    std::vector<std::vector<double>> u(t.balls.size());
    for (std::size_t i = 0; i < t.balls.size(); ++i) u[i].assign(t.balls[i].second.size(), 0.0);
    std::vector<double> e(n);
    std::vector<double> target;
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 5000; ++iter) {
        for (std::size_t m = 0; m < n; ++m) {
            const double free = t.c[m] - w[m];
            e[m] = free - std::clamp(free, -t.box[m], t.box[m]);
        }
        for (std::size_t i = 0; i < t.balls.size(); ++i) {
            const auto& [lam, members] = t.balls[i];
            double sq = 0.0;
            target.resize(members.size());
            for (std::size_t a = 0; a < members.size(); ++a) {
                target[a] = u[i][a] + e[static_cast<std::size_t>(members[a])] / lam;
                sq += target[a] * target[a];
            }
            const double shrink = sq > 1.0 ? 1.0 / std::sqrt(sq) : 1.0;
            for (std::size_t a = 0; a < members.size(); ++a) {
                const auto m = static_cast<std::size_t>(members[a]);
                const double nu = target[a] * shrink;
                const double d = lam * (nu - u[i][a]);
                w[m] += d;
                e[m] -= d;
                u[i][a] = nu;
            }
        }
        double err = 0.0;
        double worst = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double free = t.c[m] - w[m];
            const double r = free - std::clamp(free, -t.box[m], t.box[m]);
            err += r * r;
            worst = std::max(worst, std::abs(r));
        }
        if (worst <= tol) return true;
        if (prev - err <= 1e-13 * prev) return false;
        prev = err;
    }
    return false;
}

}  // namespace

bool HigtSolver::zero_optimal(const ZeroPattern& p) const
{
    std::vector<std::pair<Index, Index>> live;
    for (auto [k, j] : p.coefficients(groups_)) {
        if (b_(k, j) != 0.0) live.emplace_back(k, j);
    }
    if (live.empty()) return true;
    std::sort(live.begin(), live.end());
    auto in_pattern = [&](Index k, Index j) {
        return std::binary_search(live.begin(), live.end(), std::make_pair(k, j));
    };

    ZeroTest t;
    t.c.resize(live.size());
    t.box.resize(live.size());
    // Gradient with the whole live part of the pattern removed, one output row at a time.
    for (std::size_t a = 0; a < live.size();) {
        const Index k = live[a].first;
        std::size_t b = a;
        Vector r = rs_.residual().row(k).transpose();
        while (b < live.size() && live[b].first == k) {
            r += b_(k, live[b].second) * ds_.X.row(live[b].second).transpose();
            ++b;
        }
        for (std::size_t m = a; m < b; ++m) {
            t.c[m] = r.dot(ds_.X.row(live[m].second));
            t.box[m] = l1_weight(live[m].second);
        }
        a = b;
    }

    // Groups left entirely zero once the pattern is zeroed contribute a unit ball each.
    auto add_group = [&](double lam, const std::vector<int>& members, std::size_t live_in_group) {
        if (lam == 0.0 || members.size() != live_in_group) return;
        if (members.size() == 1) {
            t.box[static_cast<std::size_t>(members[0])] += lam;
        } else {
            t.balls.emplace_back(lam, members);
        }
    };
    std::map<std::pair<Index, Index>, std::vector<int>> rows;   // (k, g) -> members
    std::map<std::pair<Index, Index>, std::vector<int>> cols;   // (h, j) -> members
    for (std::size_t m = 0; m < live.size(); ++m) {
        const auto [k, j] = live[m];
        for (auto g : groups_of_input_[static_cast<std::size_t>(j)])
            rows[{k, g}].push_back(static_cast<int>(m));
        for (auto h : groups_of_output_[static_cast<std::size_t>(k)])
            cols[{h, j}].push_back(static_cast<int>(m));
    }
    // Coefficients below the negligible level do not keep a group alive.
    auto counts = [&](Index k, Index j) {
        const double v = std::abs(b_(k, j));
        return v != 0.0 && (v > negligible_ || in_pattern(k, j));
    };
    for (const auto& [key, members] : rows) {
        std::size_t n_live = 0;
        for (auto j : groups_.input_groups[static_cast<std::size_t>(key.second)])
            n_live += counts(key.first, j);
        add_group(pc_.lambda2, members, n_live);
    }
    for (const auto& [key, members] : cols) {
        std::size_t n_live = 0;
        for (auto k : groups_.output_groups[static_cast<std::size_t>(key.first)])
            n_live += counts(k, key.second);
        add_group(pc_.lambda3, members, n_live);
    }
    return zero_feasible(t);
}

bool HigtSolver::check_block_zero(Index g, Index h) const
{
    return zero_optimal(ZeroPattern::block(g, h));
}

bool HigtSolver::check_row_group_zero(Index k, Index g) const
{
    return zero_optimal(ZeroPattern::row(k, g));
}

bool HigtSolver::check_col_group_zero(Index h, Index j) const
{
    return zero_optimal(ZeroPattern::col(j, h));
}

bool HigtSolver::check_entry_zero(Index k, Index j) const
{
    return zero_optimal(ZeroPattern::entry(k, j));
}

double HigtSolver::update_coefficient(Index k, Index j) const
{
    const double num = soft(j, partial_correlation(k, j));
    if (num == 0.0) return 0.0;
    double denom = sqnorm_(j);
    if (pc_.lambda2 != 0.0) {
        for (auto g : groups_of_input_[static_cast<std::size_t>(j)]) {
            const double n = row_group_norm(k, g);
            if (n == 0.0) return 0.0;
            denom += pc_.lambda2 / n;
        }
    }
    if (pc_.lambda3 != 0.0) {
        for (auto h : groups_of_output_[static_cast<std::size_t>(k)]) {
            const double n = col_group_norm(h, j);
            if (n == 0.0) return 0.0;
            denom += pc_.lambda3 / n;
        }
    }
    return num / denom;
}

void HigtSolver::assign(Index k, Index j, double value)
{
    const double old = b_(k, j);
    if (old == value) return;
    b_.set(k, j, value);
    rs_.apply_delta(k, j, value - old);
}

bool HigtSolver::is_zero(const ZeroPattern& p) const
{
    switch (p.kind) {
        case PatternKind::Block:
            for (auto k : groups_.output_groups[static_cast<std::size_t>(p.second)]) {
                if (b_.row_nnz(k) == 0) continue;
                for (auto j : groups_.input_groups[static_cast<std::size_t>(p.first)]) {
                    if (b_(k, j) != 0.0) return false;
                }
            }
            return true;
        case PatternKind::Row:
            if (b_.row_nnz(p.first) == 0) return true;
            for (auto j : groups_.input_groups[static_cast<std::size_t>(p.second)])
                if (b_(p.first, j) != 0.0) return false;
            return true;
        case PatternKind::Col:
            if (b_.col_nnz(p.first) == 0) return true;
            for (auto k : groups_.output_groups[static_cast<std::size_t>(p.second)])
                if (b_(k, p.first) != 0.0) return false;
            return true;
        case PatternKind::Entry:
            return b_(p.first, p.second) == 0.0;
    }
    return true;
}

void HigtSolver::zero_pattern(const ZeroPattern& p)
{
    for (auto [k, j] : p.coefficients(groups_)) assign(k, j, 0.0);
}

bool HigtSolver::visit(const ZeroPattern& p)
{
    if (is_zero(p)) return true;
    bool passes = false;
    switch (p.kind) {
        case PatternKind::Block: passes = check_block_zero(p.first, p.second); break;
        case PatternKind::Row: passes = check_row_group_zero(p.first, p.second); break;
        case PatternKind::Col: passes = check_col_group_zero(p.second, p.first); break;
        case PatternKind::Entry:
            passes = check_entry_zero(p.first, p.second);
            if (!passes) assign(p.first, p.second, update_coefficient(p.first, p.second));
            break;
    }
    if (passes) {
        zero_pattern(p);
        return true;
    }
    return false;
}

void HigtSolver::smooth_sweep()
{
    for (Index k = 0; k < ds_.n_outputs(); ++k) {
        for (Index j = 0; j < ds_.n_inputs(); ++j) {
            const double beta = b_(k, j);
            if (beta == 0.0) continue;
            double denom = sqnorm_(j) + l1_weight(j) / std::abs(beta);
            if (pc_.lambda2 != 0.0) {
                for (auto g : groups_of_input_[static_cast<std::size_t>(j)])
                    denom += pc_.lambda2 / row_group_norm(k, g);
            }
            if (pc_.lambda3 != 0.0) {
                for (auto h : groups_of_output_[static_cast<std::size_t>(k)])
                    denom += pc_.lambda3 / col_group_norm(h, j);
            }
            const double next = partial_correlation(k, j) / denom;
            // Values this small are left for the checks; shrinking further only underflows.
            if (std::isfinite(next) && std::abs(next) > 1e-200) assign(k, j, next);
        }
    }
}

void HigtSolver::sweep()
{
    negligible_ = 1e-9 * b_.dense().cwiseAbs().maxCoeff();
    for_each_with_skip(*dag_, [this](const ZeroPattern& p) { return visit(p); },
                       settings_.skip_descendants);
}

double HigtSolver::objective() const
{
    return 0.5 * rs_.residual().squaredNorm() + penalty_value(b_, groups_, pc_, ds_);
}

void HigtSolver::load(const Matrix& dense)
{
    b_ = CoefMatrix(dense);
    rs_.resync(b_);
}

FitReport HigtSolver::run()
{
    FitReport rep;
    double prev = objective();
    for (int w = 0; w < settings_.warm_sweeps && b_.nnz() > 0; ++w) {
        smooth_sweep();
        const double obj = objective();
        rep.warm_sweeps = w + 1;
        const bool done = std::abs(prev - obj) <= settings_.warm_tol * std::abs(prev);
        prev = obj;
        if (done) break;
    }
    rs_.resync(b_);
    prev = objective();
    rep.initial_objective = prev;
    Matrix best = b_.dense();
    double best_obj = prev;
    bool have_best = false;

    for (int it = 1; it <= settings_.max_outer_iters; ++it) {
        const Matrix before = b_.dense();
        const std::size_t nnz_before = b_.nnz();
        sweep();
        if (it % settings_.resync_period == 0) rs_.resync(b_);

        double obj = objective();
        const bool blend_always = settings_.damping < 1.0;
        if (blend_always || obj > prev) {
            // Blend surviving coordinates toward the pre-sweep values; zeros stay zero.
            const Matrix after = b_.dense();
            double alpha = settings_.damping;
            if (!blend_always) alpha *= 0.5;
            bool accepted = false;
            while (alpha >= 1.0 / 64.0) {
                Matrix trial = after;
                for (Index k = 0; k < trial.rows(); ++k) {
                    for (Index j = 0; j < trial.cols(); ++j) {
                        if (after(k, j) != 0.0) {
                            trial(k, j) = (1.0 - alpha) * before(k, j) + alpha * after(k, j);
                        }
                    }
                }
                load(trial);
                obj = objective();
                if (obj <= prev) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                Matrix kept = after;
                for (Index k = 0; k < kept.rows(); ++k) {
                    for (Index j = 0; j < kept.cols(); ++j) {
                        if (after(k, j) != 0.0) kept(k, j) = before(k, j);
                    }
                }
                load(kept);
                obj = objective();
            }
            ++rep.damped_sweeps;
        }

        rep.outer_iterations = it;
        rep.objective_trace.push_back(obj);
        rep.support_size_trace.push_back(b_.nnz());
        if (!have_best || obj <= best_obj) {
            best = b_.dense();
            best_obj = obj;
            have_best = true;
        }

        if (b_.nnz() == 0) {
            rep.converged = true;
            break;
        }
        const double rel = std::abs(prev - obj) / std::max(std::abs(prev), 1e-300);
        const bool support_stable = b_.nnz() == nnz_before;
        prev = obj;
        if (rel < settings_.tol && support_stable) {
            rep.converged = true;
            break;
        }
    }

    if (!rep.converged && best_obj < objective()) load(best);
    rs_.resync(b_);
    rep.final_objective = objective();
    return rep;
}

FitResult fit(const Dataset& ds, const GroupStructure& gs, const PenaltyConfig& pc,
              const SolverSettings& settings, std::optional<CoefMatrix> init)
{
    HigtSolver solver(ds, gs, pc, settings, std::move(init));
    FitReport rep = solver.run();
    return {solver.coef(), std::move(rep)};
}

double lambda1_max(const Dataset& ds)
{
    Matrix c = ds.Y * ds.X.transpose();
    return c.cwiseAbs().maxCoeff();
}

}  // namespace siol
