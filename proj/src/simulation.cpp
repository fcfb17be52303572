#include <siol/simulation.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <siol/tuning.hpp>

namespace siol {

void SimConfig::validate() const
{
    if (n_marginals < 2 || n_pairs < 0 || N < 2 || K < 1 || n_holdout < 0) {
        throw InputError("simulation sizes must be positive");
    }
    if (!(signal >= 0.0) || !std::isfinite(signal)) throw InputError("signal must be non-negative");
    if (n_full_blocks < 0 || n_partial_rows < 0 || n_partial_cols < 0) {
        throw InputError("planted pattern counts must be non-negative");
    }
    if (layout == GroupLayout::PaperSec6 && (J() != 120 || K != 80)) {
        throw InputError("the published layout needs J = 120 and K = 80");
    }
}

namespace {

IndexSet span(Index first1, Index last1)
{
    IndexSet s;
    for (Index i = first1; i <= last1; ++i) s.push_back(i - 1);
    return s;
}

std::vector<IndexSet> even_groups(Index size, Index overlap, Index count, Index n)
{
    if (size < 1 || overlap < 0 || overlap >= size) throw InputError("invalid custom group layout");
    std::vector<IndexSet> out;
    const Index stride = size - overlap;
    for (Index g = 0; g < count; ++g) {
        const Index start = g * stride;
        if (start + size > n) throw InputError("custom groups do not fit the dimensions");
        IndexSet s;
        for (Index i = start; i < start + size; ++i) s.push_back(i);
        out.push_back(std::move(s));
    }
    return out;
}

// Plants B_true: whole blocks first (one sharing h across an overlapping g pair, one sharing g
// across an overlapping h pair, the rest random), then single-output rows and single-input
// columns over random groups.
CoefMatrix plant(const SimConfig& cfg, const GroupStructure& gs, std::mt19937_64& rng)
{
    const auto& G = gs.input_groups;
    const auto& H = gs.output_groups;
    CoefMatrix b(cfg.K, cfg.J());
    if (G.empty() || H.empty()) return b;
    auto pick = [&](std::size_t n) {
        return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    };
    auto overlapping = [](const std::vector<IndexSet>& groups) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t a = 0; a < groups.size(); ++a)
            for (std::size_t c = a + 1; c < groups.size(); ++c) {
                std::vector<Index> common;
                std::set_intersection(groups[a].begin(), groups[a].end(), groups[c].begin(),
                                      groups[c].end(), std::back_inserter(common));
                if (!common.empty()) out.emplace_back(a, c);
            }
        return out;
    };

    std::set<std::pair<std::size_t, std::size_t>> blocks;   // (g, h)
    const auto gp = overlapping(G);
    const auto hp = overlapping(H);
    const auto target = static_cast<std::size_t>(cfg.n_full_blocks);
    if (target >= 2 && !gp.empty()) {
        const auto [a, c] = gp[pick(gp.size())];
        const auto h = pick(H.size());
        blocks.insert({a, h});
        blocks.insert({c, h});
    }
    if (target >= 4 && !hp.empty()) {
        const auto [a, c] = hp[pick(hp.size())];
        const auto g = pick(G.size());
        blocks.insert({g, a});
        blocks.insert({g, c});
    }
    for (int guard = 0; blocks.size() < std::min(target, G.size() * H.size()) && guard < 10000; ++guard) {
        blocks.insert({pick(G.size()), pick(H.size())});
    }
    for (const auto& [g, h] : blocks)
        for (auto k : H[h])
            for (auto j : G[g]) b.set(k, j, cfg.signal);
    for (Index r = 0; r < cfg.n_partial_rows; ++r) {
        const auto k = static_cast<Index>(pick(static_cast<std::size_t>(cfg.K)));
        for (auto j : G[pick(G.size())]) b.set(k, j, cfg.signal);
    }
    for (Index c = 0; c < cfg.n_partial_cols; ++c) {
        const auto j = static_cast<Index>(pick(static_cast<std::size_t>(cfg.J())));
        for (auto k : H[pick(H.size())]) b.set(k, j, cfg.signal);
    }
    return b;
}

}  // namespace

GroupStructure paper_sec6_groups()
{
    GroupStructure gs;
    gs.input_groups = {span(5, 10),   span(9, 15),   span(25, 32),  span(29, 37),
                       span(50, 57),  span(54, 60),  span(75, 87),  span(80, 94),
                       span(104, 111), span(109, 116)};
    gs.output_groups = {span(1, 5),   span(4, 10),  span(12, 20), span(17, 25),
                        span(46, 63), span(56, 70), span(75, 80)};
    return gs;
}

GroupStructure custom_groups(const CustomLayout& layout, Index J, Index K)
{
    GroupStructure gs;
    gs.input_groups = even_groups(layout.input_group_size, layout.input_overlap, layout.n_input_groups, J);
    gs.output_groups =
        even_groups(layout.output_group_size, layout.output_overlap, layout.n_output_groups, K);
    return gs;
}

SimInstance generate_dataset(const SimConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const Index J = cfg.J();
    const Index total = cfg.N + cfg.n_holdout;

    SimInstance sim;
    sim.gs = cfg.layout == GroupLayout::PaperSec6 ? paper_sec6_groups()
                                                  : custom_groups(cfg.custom, J, cfg.K);
    sim.gs.validate(J, cfg.K);

    Matrix X(J, total);
    std::bernoulli_distribution coin(0.5);
    for (Index j = 0; j < cfg.n_marginals; ++j)
        for (Index n = 0; n < total; ++n) X(j, n) = coin(rng) ? 1.0 : 0.0;
    std::uniform_int_distribution<Index> which(0, cfg.n_marginals - 1);
    std::set<std::pair<Index, Index>> used;
    for (Index p = 0; p < cfg.n_pairs; ++p) {
        Index r = 0, s = 0;
        do {
            r = which(rng);
            s = which(rng);
            if (r > s) std::swap(r, s);
        } while (r == s || (used.count({r, s}) &&
                            static_cast<Index>(used.size()) < cfg.n_marginals * (cfg.n_marginals - 1) / 2));
        used.insert({r, s});
        sim.pair_sources.emplace_back(r, s);
        X.row(cfg.n_marginals + p) = X.row(r).cwiseProduct(X.row(s));
    }

    // Zero mean, unit variance using the training columns only.
    for (Index j = 0; j < J; ++j) {
        const auto tr = X.row(j).head(cfg.N);
        const double mean = tr.mean();
        const double var = (tr.array() - mean).square().sum() / static_cast<double>(cfg.N);
        X.row(j).array() -= mean;
        if (var > 0.0) X.row(j) /= std::sqrt(var);
    }

    sim.B_true = plant(cfg, sim.gs, rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix E(cfg.K, total);
    for (Index k = 0; k < cfg.K; ++k)
        for (Index n = 0; n < total; ++n) E(k, n) = noise(rng);
    const Matrix Y = sim.B_true.dense() * X + E;

    sim.train = Dataset(X.leftCols(cfg.N), Y.leftCols(cfg.N));
    sim.holdout = Dataset(X.rightCols(cfg.n_holdout), Y.rightCols(cfg.n_holdout));
    sim.ds = sim.train.standardized();
    return sim;
}

std::vector<PrPoint> precision_recall_curve(const CoefMatrix& est, const CoefMatrix& truth,
                                            const std::vector<double>& thresholds)
{
    if (est.n_outputs() != truth.n_outputs() || est.n_inputs() != truth.n_inputs()) {
        throw InputError("estimate and truth have different shapes");
    }
    const auto positives = truth.nnz();
    if (positives == 0) throw InputError("recall is undefined for an all-zero truth");
    const Matrix a = est.dense().cwiseAbs();
    std::vector<PrPoint> out;
    for (double tau : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (Index k = 0; k < a.rows(); ++k)
            for (Index j = 0; j < a.cols(); ++j) {
                if (!(a(k, j) > tau)) continue;
                (truth.is_nonzero(k, j) ? tp : fp)++;
            }
        PrPoint p;
        p.tau = tau;
        p.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        p.recall = static_cast<double>(tp) / static_cast<double>(positives);
        out.push_back(p);
    }
    return out;
}

std::vector<double> default_thresholds(const CoefMatrix& est)
{
    std::vector<double> t{0.0};
    for (auto [k, j] : est.support()) t.push_back(std::abs(est(k, j)));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

double area_under_pr(std::vector<PrPoint> curve)
{
    if (curve.empty()) return 0.0;
    std::sort(curve.begin(), curve.end(), [](const PrPoint& a, const PrPoint& b) {
        return a.recall < b.recall || (a.recall == b.recall && a.precision > b.precision);
    });
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].recall - curve[i - 1].recall) * 0.5 *
                (curve[i].precision + curve[i - 1].precision);
    }
    return area;
}

double refit_prediction_error(const Dataset& train, const Dataset& val, const CoefMatrix& est,
                              double tau)
{
    if (est.n_outputs() != train.n_outputs() || est.n_inputs() != train.n_inputs() ||
        val.n_outputs() != train.n_outputs() || val.n_inputs() != train.n_inputs()) {
        throw InputError("refit: estimate, training and validation shapes disagree");
    }
    double sse = 0.0;
    for (Index k = 0; k < est.n_outputs(); ++k) {
        std::vector<Index> sel;
        for (Index j = 0; j < est.n_inputs(); ++j)
            if (std::abs(est(k, j)) > tau) sel.push_back(j);
        Vector pred = Vector::Zero(val.n_samples());
        if (!sel.empty()) {
            Eigen::MatrixXd A(train.n_samples(), static_cast<Index>(sel.size()));
            Eigen::MatrixXd V(val.n_samples(), static_cast<Index>(sel.size()));
            for (std::size_t c = 0; c < sel.size(); ++c) {
                A.col(static_cast<Index>(c)) = train.X.row(sel[c]).transpose();
                V.col(static_cast<Index>(c)) = val.X.row(sel[c]).transpose();
            }
            const Vector y = train.Y.row(k).transpose();
            const Vector coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(y);
            pred = V * coef;
        }
        sse += (val.Y.row(k).transpose() - pred).squaredNorm();
    }
    return sse / static_cast<double>(val.Y.size());
}

std::vector<Variant> structure_variants(double lambda1, double lambda3_prime, double mix)
{
    return {{"both", penalty_from_prime(lambda1, mix, lambda3_prime)},
            {"input-only", penalty_from_prime(lambda1, 1.0, lambda3_prime)},
            {"output-only", penalty_from_prime(lambda1, 0.0, lambda3_prime)}};
}

std::vector<VariantOutcome> evaluate_variants(const SimInstance& sim,
                                              const std::vector<Variant>& variants,
                                              const SolverSettings& settings)
{
    std::vector<VariantOutcome> out;
    for (const auto& v : variants) {
        auto res = fit(sim.ds, sim.gs, v.pc, settings);
        VariantOutcome o;
        o.name = v.name;
        o.pc = v.pc;
        o.pr = precision_recall_curve(res.coef, sim.B_true, default_thresholds(res.coef));
        o.aupr = area_under_pr(o.pr);
        o.refit_mse = refit_prediction_error(sim.train, sim.holdout, res.coef, 0.0);
        o.coef = std::move(res.coef);
        o.report = std::move(res.report);
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace siol
