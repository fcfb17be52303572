// siol command-line front end: fit, cv, simulate, expand, screen, evaluate.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <boost/version.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <siol/core_model.hpp>
#include <siol/higt.hpp>
#include <siol/interactions.hpp>
#include <siol/io.hpp>
#include <siol/pattern_dag.hpp>
#include <siol/simulation.hpp>
#include <siol/tuning.hpp>

#ifndef SIOL_VERSION
#define SIOL_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace siol;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_not_converged = 3;

struct RunConfig
{
    std::string command;
    std::vector<std::string> argv;

    std::string x, y, input_groups, output_groups;
    std::string network, clusters, snp_pos, gene_pos;
    std::string coef, truth;
    std::string out;

    // fit/evaluate take the first value; cv takes them all as a grid.
    std::vector<double> lambda1;
    std::optional<double> lambda2, lambda3, lambda4;
    std::vector<double> lambda2_prime, lambda3_prime;
    int folds = 5;

    double tol = 1e-6;
    int max_iter = 1000;
    std::uint64_t seed = 1;
    int threads = 0;
    bool dump_dag = false;

    std::optional<double> corr_filter;
    std::optional<double> p_cutoff;
    std::int64_t link_dist = 500;

    std::string layout = "paper-sec6";
    double signal = 2.0;
    int replicates = 20;
};

int thread_count(const RunConfig& cfg)
{
    if (cfg.threads > 0) return cfg.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    return (fs::path(cfg.out) / name).string();
}

SolverSettings solver_settings(const RunConfig& cfg)
{
    SolverSettings s;
    s.tol = cfg.tol;
    s.max_outer_iters = cfg.max_iter;
    s.validate();
    return s;
}

/// Explicit lambda2/lambda3 win; otherwise the primed pair (defaults 0.5, 0.1).
PenaltyConfig single_penalty(const RunConfig& cfg)
{
    const bool direct = cfg.lambda2 || cfg.lambda3;
    const bool primed = !cfg.lambda2_prime.empty() || !cfg.lambda3_prime.empty();
    if (direct && primed) throw InputError("give either --lambda2/--lambda3 or the primed pair, not both");
    if (cfg.lambda1.size() > 1 || cfg.lambda2_prime.size() > 1 || cfg.lambda3_prime.size() > 1) {
        throw InputError(cfg.command + " takes a single value per lambda");
    }
    const double l1 = cfg.lambda1.empty() ? 0.05 : cfg.lambda1.front();
    PenaltyConfig pc;
    if (direct) {
        pc = {l1, cfg.lambda2.value_or(0.0), cfg.lambda3.value_or(0.0), cfg.lambda4};
    } else {
        const double a = cfg.lambda2_prime.empty() ? 0.5 : cfg.lambda2_prime.front();
        const double c = cfg.lambda3_prime.empty() ? 0.1 : cfg.lambda3_prime.front();
        pc = penalty_from_prime(l1, a, c, cfg.lambda4);
    }
    pc.validate();
    return pc;
}

json penalty_json(const PenaltyConfig& pc)
{
    return io::to_json(pc);
}

/// Rows named "a:b" with a and b both rows of X are treated as interaction columns.
std::vector<ColumnOrigin> infer_column_map(const std::vector<std::string>& ids)
{
    std::unordered_map<std::string, Index> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], static_cast<Index>(i));
    std::vector<ColumnOrigin> map(ids.size());
    bool any = false;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        map[i] = ColumnOrigin::marginal(static_cast<Index>(i));
        const auto colon = ids[i].find(':');
        if (colon == std::string::npos) continue;
        auto a = pos.find(ids[i].substr(0, colon));
        auto b = pos.find(ids[i].substr(colon + 1));
        if (a == pos.end() || b == pos.end()) continue;
        map[i] = ColumnOrigin::pair(a->second, b->second);
        any = true;
    }
    if (!any) map.clear();
    return map;
}

Dataset load_raw(const RunConfig& cfg)
{
    if (cfg.x.empty() || cfg.y.empty()) throw InputError(cfg.command + " needs --x and --y");
    auto x = io::read_matrix_tsv(cfg.x);
    auto y = io::read_matrix_tsv(cfg.y);
    if (x.values.cols() != y.values.cols()) {
        throw InputError(cfg.x + " and " + cfg.y + " disagree on the number of samples (" +
                         std::to_string(x.values.cols()) + " vs " + std::to_string(y.values.cols()) + ")");
    }
    if (!x.col_ids.empty() && !y.col_ids.empty() && x.col_ids != y.col_ids) {
        throw InputError(cfg.x + " and " + cfg.y + " list different sample ids");
    }
    Dataset ds(std::move(x.values), std::move(y.values));
    ds.input_ids = std::move(x.row_ids);
    ds.output_ids = std::move(y.row_ids);
    ds.sample_ids = !x.col_ids.empty() ? std::move(x.col_ids) : std::move(y.col_ids);
    return ds;
}

Dataset load_standardized(const RunConfig& cfg)
{
    Dataset ds = load_raw(cfg).standardized();
    if (cfg.lambda4) ds.column_map = infer_column_map(ds.input_ids);
    return ds;
}

GroupStructure load_groups(const RunConfig& cfg, const Dataset& ds)
{
    GroupStructure gs;
    if (!cfg.input_groups.empty()) gs.input_groups = io::read_groups_tsv(cfg.input_groups, ds.n_inputs());
    if (!cfg.output_groups.empty()) gs.output_groups = io::read_groups_tsv(cfg.output_groups, ds.n_outputs());
    gs.validate(ds.n_inputs(), ds.n_outputs());
    return gs;
}

json versions()
{
    return {{"siol", SIOL_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION},
            {"compiler", __VERSION__}};
}

json parameters(const RunConfig& cfg)
{
    json p = {{"x", cfg.x},
              {"y", cfg.y},
              {"input_groups", cfg.input_groups},
              {"output_groups", cfg.output_groups},
              {"network", cfg.network},
              {"clusters", cfg.clusters},
              {"snp_pos", cfg.snp_pos},
              {"gene_pos", cfg.gene_pos},
              {"coef", cfg.coef},
              {"truth", cfg.truth},
              {"lambda1", cfg.lambda1},
              {"lambda2_prime", cfg.lambda2_prime},
              {"lambda3_prime", cfg.lambda3_prime},
              {"folds", cfg.folds},
              {"tol", cfg.tol},
              {"max_iter", cfg.max_iter},
              {"link_dist", cfg.link_dist},
              {"layout", cfg.layout},
              {"signal", cfg.signal},
              {"replicates", cfg.replicates},
              {"dump_dag", cfg.dump_dag}};
    auto opt = [&](const char* key, const std::optional<double>& v) { p[key] = v ? json(*v) : json(nullptr); };
    opt("lambda2", cfg.lambda2);
    opt("lambda3", cfg.lambda3);
    opt("lambda4", cfg.lambda4);
    opt("corr_filter", cfg.corr_filter);
    opt("p_cutoff", cfg.p_cutoff);
    return p;
}

void write_manifest(const RunConfig& cfg, int status, const json& extra)
{
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    json m = {{"command", cfg.command},
              {"argv", cfg.argv},
              {"versions", versions()},
              {"seed", cfg.seed},
              {"threads", thread_count(cfg)},
              {"parameters", parameters(cfg)},
              {"exit_status", status},
              {"timestamp_unix", secs}};
    if (!extra.is_null()) m["results"] = extra;
    io::write_json(out_path(cfg, "manifest.json"), m);
}

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < t; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

int run_fit(const RunConfig& cfg, json& results)
{
    const Dataset ds = load_standardized(cfg);
    const GroupStructure gs = load_groups(cfg, ds);
    const PenaltyConfig pc = single_penalty(cfg);
    const SolverSettings settings = solver_settings(cfg);

    if (cfg.dump_dag) {
        auto dag = build_dag(effective_groups(gs, pc, ds.n_inputs(), ds.n_outputs()), ds.n_inputs(),
                             ds.n_outputs(), settings.dag);
        if (dag->is_lazy()) {
            std::cerr << "siol: DAG too large to dump, skipping dag.dot\n";
        } else {
            std::ofstream(out_path(cfg, "dag.dot")) << dag->to_dot();
        }
    }

    const FitResult res = fit(ds, gs, pc, settings);
    io::write_coef(out_path(cfg, "B.tsv"), res.coef);
    io::write_trace_tsv(out_path(cfg, "trace.tsv"), res.report);
    json report = io::to_json(res.report);
    report["penalty"] = penalty_json(pc);
    report["lambda1_max"] = lambda1_max(ds);
    report["nnz"] = res.coef.nnz();
    io::write_json(out_path(cfg, "fit_report.json"), report);

    results = {{"final_objective", res.report.final_objective},
               {"outer_iterations", res.report.outer_iterations},
               {"converged", res.report.converged},
               {"nnz", res.coef.nnz()}};
    if (!res.report.converged) {
        std::cerr << "siol: fit did not converge in " << cfg.max_iter << " outer iterations\n";
        return exit_not_converged;
    }
    return exit_ok;
}

int run_cv(const RunConfig& cfg, json& results)
{
    const Dataset ds = load_standardized(cfg);
    const GroupStructure gs = load_groups(cfg, ds);
    if (cfg.lambda2 || cfg.lambda3) throw InputError("cv searches the primed lambdas; drop --lambda2/--lambda3");
    TuningGrid grid;
    if (!cfg.lambda1.empty()) grid.lambda1_values = cfg.lambda1;
    if (!cfg.lambda2_prime.empty()) grid.lambda2_prime_values = cfg.lambda2_prime;
    if (!cfg.lambda3_prime.empty()) grid.lambda3_prime_values = cfg.lambda3_prime;
    grid.folds = cfg.folds;
    grid.validate();

    const CvOutcome out =
        cv_grid_search(ds, gs, grid, solver_settings(cfg), cfg.seed, thread_count(cfg), cfg.lambda4);
    io::write_cv_table(out_path(cfg, "cv_table.tsv"), out.table);
    json best = {{"lambda1", out.best_point.lambda1},
                 {"lambda2_prime", out.best_point.lambda2_prime},
                 {"lambda3_prime", out.best_point.lambda3_prime},
                 {"penalty", penalty_json(out.best)},
                 {"mean_mse", out.best_score},
                 {"folds", grid.folds},
                 {"seed", cfg.seed}};
    io::write_json(out_path(cfg, "best.json"), best);
    results = best;
    return exit_ok;
}

int run_simulate(const RunConfig& cfg, json& results)
{
    if (cfg.replicates < 1) throw InputError("--replicates must be at least 1");
    SimConfig base;
    base.signal = cfg.signal;
    if (cfg.layout == "paper-sec6") {
        base.layout = GroupLayout::PaperSec6;
    } else if (cfg.layout == "custom") {
        base.layout = GroupLayout::Custom;
    } else {
        throw InputError("unknown layout '" + cfg.layout + "' (expected paper-sec6 or custom)");
    }
    base.validate();

    const double l1 = cfg.lambda1.size() == 1 ? cfg.lambda1.front() : 0.02;
    const double mix = cfg.lambda2_prime.size() == 1 ? cfg.lambda2_prime.front() : 0.5;
    const double l3p = cfg.lambda3_prime.size() == 1 ? cfg.lambda3_prime.front() : 0.1;
    if (cfg.lambda1.size() > 1 || cfg.lambda2_prime.size() > 1 || cfg.lambda3_prime.size() > 1) {
        throw InputError("simulate takes a single value per lambda");
    }
    const auto variants = structure_variants(l1, l3p, mix);
    const SolverSettings settings = solver_settings(cfg);

    const auto n = static_cast<std::size_t>(cfg.replicates);
    std::vector<SimInstance> sims(n);
    std::vector<std::vector<VariantOutcome>> outcomes(n);
    parallel_for(n, thread_count(cfg), [&](std::size_t r) {
        SimConfig c = base;
        c.seed = cfg.seed + r;
        sims[r] = generate_dataset(c);
        outcomes[r] = evaluate_variants(sims[r], variants, settings);
    });

    bool all_converged = true;
    std::ofstream summary(out_path(cfg, "summary.tsv"));
    summary << "replicate\tseed\tvariant\taupr\trefit_mse\tnnz\tconverged\n";
    std::vector<double> aupr_sum(variants.size(), 0.0), mse_sum(variants.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        char name[32];
        std::snprintf(name, sizeof name, "replicate_%03zu", r + 1);
        const fs::path dir = fs::path(cfg.out) / name;
        fs::create_directories(dir);
        const SimInstance& sim = sims[r];
        io::write_matrix_tsv((dir / "X.tsv").string(), sim.ds.X, sim.ds.input_ids, sim.ds.sample_ids);
        io::write_matrix_tsv((dir / "Y.tsv").string(), sim.ds.Y, sim.ds.output_ids, sim.ds.sample_ids);
        io::write_matrix_tsv((dir / "X_holdout.tsv").string(), sim.holdout.X, sim.holdout.input_ids);
        io::write_matrix_tsv((dir / "Y_holdout.tsv").string(), sim.holdout.Y, sim.holdout.output_ids);
        io::write_coef((dir / "B_true.tsv").string(), sim.B_true);
        io::write_groups_tsv((dir / "input_groups.tsv").string(), sim.gs.input_groups);
        io::write_groups_tsv((dir / "output_groups.tsv").string(), sim.gs.output_groups);
        for (std::size_t v = 0; v < outcomes[r].size(); ++v) {
            const auto& o = outcomes[r][v];
            io::write_pr_tsv((dir / ("pr_" + o.name + ".tsv")).string(), o.pr);
            io::write_coef((dir / ("B_" + o.name + ".tsv")).string(), o.coef);
            summary << r + 1 << '\t' << cfg.seed + r << '\t' << o.name << '\t' << io::format_real(o.aupr) << '\t'
                    << io::format_real(o.refit_mse) << '\t' << o.coef.nnz() << '\t'
                    << (o.report.converged ? "true" : "false") << '\n';
            aupr_sum[v] += o.aupr;
            mse_sum[v] += o.refit_mse;
            all_converged = all_converged && o.report.converged;
        }
    }

    json means = json::array();
    for (std::size_t v = 0; v < variants.size(); ++v) {
        means.push_back({{"variant", variants[v].name},
                         {"penalty", penalty_json(variants[v].pc)},
                         {"mean_aupr", aupr_sum[v] / static_cast<double>(n)},
                         {"mean_refit_mse", mse_sum[v] / static_cast<double>(n)}});
    }
    io::write_json(out_path(cfg, "summary.json"), {{"replicates", cfg.replicates}, {"variants", means}});
    results = means;
    return all_converged ? exit_ok : exit_not_converged;
}

GenomePositions load_positions(const RunConfig& cfg, const Dataset& raw)
{
    if (cfg.snp_pos.empty() || cfg.gene_pos.empty()) throw InputError("--snp-pos and --gene-pos are required");
    GenomePositions pos;
    const auto snps = io::read_snp_positions(cfg.snp_pos);
    // Reorder positions to follow the rows of X.
    std::unordered_map<std::string, const SnpPosition*> by_id;
    for (const auto& s : snps) by_id.emplace(s.id, &s);
    for (const auto& id : raw.input_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError(cfg.snp_pos + " has no position for SNP '" + id + "' of " + cfg.x);
        pos.snps.push_back(*it->second);
    }
    pos.genes = io::read_gene_positions(cfg.gene_pos);
    pos.validate();
    return pos;
}

void write_expanded(const RunConfig& cfg, const Dataset& raw, const CandidatePairSet& U,
                    const InteractionNetwork* net, const GeneLinkage* linkage)
{
    io::write_pairs_tsv(out_path(cfg, "pairs.tsv"), U, raw.input_ids);
    const Dataset expanded = expand_design(raw, U);
    io::write_matrix_tsv(out_path(cfg, "X_expanded.tsv"), expanded.X, expanded.input_ids, expanded.sample_ids);
    if (net && linkage && !net->clusters.empty()) {
        auto groups = build_input_groups_from_clusters(*net, *linkage, U, raw.n_inputs());
        std::vector<IndexSet> all = groups.marginal;
        all.insert(all.end(), groups.pairs.begin(), groups.pairs.end());
        io::write_groups_tsv(out_path(cfg, "input_groups.tsv"), all);
    }
}

int run_expand(const RunConfig& cfg, json& results)
{
    const Dataset raw = load_raw(cfg);
    if (cfg.network.empty()) throw InputError("expand needs --network");
    InteractionNetwork net = io::read_network_tsv(cfg.network);
    if (!cfg.clusters.empty()) io::read_clusters_tsv(cfg.clusters, net);
    net.validate();
    const GenomePositions pos = load_positions(cfg, raw);
    const GeneLinkage linkage = link_snps_to_genes(pos, cfg.link_dist);
    const double cutoff = cfg.p_cutoff.value_or(0.05);
    const CandidatePairSet U = candidate_pairs_from_network(net, linkage, cutoff, cfg.corr_filter, &raw.X);
    write_expanded(cfg, raw, U, &net, &linkage);
    results = {{"pairs", U.size()}, {"network_p_cutoff", cutoff}};
    return exit_ok;
}

int run_screen(const RunConfig& cfg, json& results)
{
    const Dataset raw = load_raw(cfg);
    const double cutoff = cfg.p_cutoff.value_or(1e-5);
    std::vector<std::pair<Index, Index>> pairs;
    for (Index r = 0; r < raw.n_inputs(); ++r)
        for (Index s = r + 1; s < raw.n_inputs(); ++s) pairs.emplace_back(r, s);
    ScreenResult sr = two_locus_screen(raw, pairs, cutoff, thread_count(cfg));
    for (const auto& w : sr.warnings) std::cerr << "siol: " << w << '\n';

    {
        std::ofstream pv(out_path(cfg, "screen_pvalues.tsv"));
        pv << "snp_r\tsnp_s\tmin_p\n";
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            pv << raw.input_ids[static_cast<std::size_t>(pairs[i].first)] << '\t'
               << raw.input_ids[static_cast<std::size_t>(pairs[i].second)] << '\t' << io::format_real(sr.min_p[i])
               << '\n';
        }
    }

    CandidatePairSet U = sr.passed;
    std::optional<InteractionNetwork> net;
    std::optional<GeneLinkage> linkage;
    if (!cfg.network.empty()) {
        net = io::read_network_tsv(cfg.network);
        if (!cfg.clusters.empty()) io::read_clusters_tsv(cfg.clusters, *net);
        net->validate();
        linkage = link_snps_to_genes(load_positions(cfg, raw), cfg.link_dist);
        U.merge(candidate_pairs_from_network(*net, *linkage, 0.05, cfg.corr_filter, &raw.X));
    }
    write_expanded(cfg, raw, U, net ? &*net : nullptr, linkage ? &*linkage : nullptr);
    results = {{"tested", pairs.size()}, {"passed_screen", sr.passed.size()}, {"pairs", U.size()},
               {"p_cutoff", cutoff}};
    return exit_ok;
}

int run_evaluate(const RunConfig& cfg, json& results)
{
    const Dataset ds = load_standardized(cfg);
    const GroupStructure gs = load_groups(cfg, ds);
    const PenaltyConfig pc = single_penalty(cfg);
    if (cfg.coef.empty()) throw InputError("evaluate needs --coef");
    const CoefMatrix b = io::read_coef(cfg.coef);
    if (b.n_outputs() != ds.n_outputs() || b.n_inputs() != ds.n_inputs()) {
        throw InputError(cfg.coef + " is " + std::to_string(b.n_outputs()) + "x" + std::to_string(b.n_inputs()) +
                         " but " + cfg.x + " and " + cfg.y + " imply " + std::to_string(ds.n_outputs()) + "x" +
                         std::to_string(ds.n_inputs()));
    }
    const double loss = squared_loss(ds, b);
    json ev = {{"objective", objective_value(ds, b, gs, pc)},
               {"squared_loss", loss},
               {"mse", 2.0 * loss / static_cast<double>(ds.Y.size())},
               {"nnz", b.nnz()},
               {"penalty", penalty_json(pc)}};
    if (!cfg.truth.empty()) {
        const CoefMatrix truth = io::read_coef(cfg.truth);
        if (truth.n_outputs() != b.n_outputs() || truth.n_inputs() != b.n_inputs()) {
            throw InputError(cfg.truth + " and " + cfg.coef + " have different shapes");
        }
        const auto curve = precision_recall_curve(b, truth, default_thresholds(b));
        io::write_pr_tsv(out_path(cfg, "pr.tsv"), curve);
        ev["aupr"] = area_under_pr(curve);
    }
    io::write_json(out_path(cfg, "evaluation.json"), ev);
    results = ev;
    return exit_ok;
}

int run(const RunConfig& cfg)
{
    json results;
    int status = exit_ok;
    try {
        if (cfg.out.empty()) throw InputError("--out is required");
        fs::create_directories(cfg.out);
        if (cfg.command == "fit") {
            status = run_fit(cfg, results);
        } else if (cfg.command == "cv") {
            status = run_cv(cfg, results);
        } else if (cfg.command == "simulate") {
            status = run_simulate(cfg, results);
        } else if (cfg.command == "expand") {
            status = run_expand(cfg, results);
        } else if (cfg.command == "screen") {
            status = run_screen(cfg, results);
        } else {
            status = run_evaluate(cfg, results);
        }
    } catch (const InputError& e) {
        std::cerr << "siol: " << e.what() << '\n';
        status = exit_input;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "siol: " << e.what() << '\n';
        return exit_input;
    } catch (const SolverError& e) {
        std::cerr << "siol: " << e.what() << '\n';
        status = exit_not_converged;
    }
    try {
        write_manifest(cfg, status, results);
    } catch (const std::exception& e) {
        std::cerr << "siol: could not write manifest: " << e.what() << '\n';
        if (status == exit_ok) status = exit_input;
    }
    return status;
}

void add_data_flags(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--x", cfg.x, "input matrix TSV (rows are inputs, columns samples)");
    sub->add_option("--y", cfg.y, "output matrix TSV (rows are outputs, columns samples)");
}

void add_group_flags(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--input-groups", cfg.input_groups, "input groups TSV, 1-based");
    sub->add_option("--output-groups", cfg.output_groups, "output groups TSV, 1-based");
}

void add_penalty_flags(CLI::App* sub, RunConfig& cfg, bool grid)
{
    auto* l1 = sub->add_option("--lambda1", cfg.lambda1, "L1 weight");
    auto* a = sub->add_option("--lambda2-prime", cfg.lambda2_prime, "share of the group weight on input groups");
    auto* c = sub->add_option("--lambda3-prime", cfg.lambda3_prime, "total group weight");
    if (grid) {
        for (auto* o : {l1, a, c}) o->delimiter(',');
    } else {
        for (auto* o : {l1, a, c}) o->expected(1);
        sub->add_option("--lambda2", cfg.lambda2, "input-group weight");
        sub->add_option("--lambda3", cfg.lambda3, "output-group weight");
    }
    sub->add_option("--lambda4", cfg.lambda4, "L1 weight for interaction rows (defaults to lambda1)");
}

void add_solver_flags(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--tol", cfg.tol, "relative objective tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "outer iteration cap");
}

void add_genome_flags(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--network", cfg.network, "gene interaction network TSV");
    sub->add_option("--clusters", cfg.clusters, "gene clusters TSV");
    sub->add_option("--snp-pos", cfg.snp_pos, "SNP positions TSV");
    sub->add_option("--gene-pos", cfg.gene_pos, "gene positions TSV");
    sub->add_option("--corr-filter", cfg.corr_filter, "drop pairs whose genotype correlation exceeds this");
    sub->add_option("--link-dist", cfg.link_dist, "SNP to gene linkage distance in bp");
}

}  // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    cfg.argv.assign(argv, argv + argc);

    CLI::App app{"Structured input-output lasso"};
    app.require_subcommand(1);
    app.add_flag_callback("--version", [] {
        std::cout << "siol " << SIOL_VERSION << '\n';
        std::exit(0);
    });

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "output directory")->required();
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--threads", cfg.threads, "worker threads (default: all cores)");
    };

    auto* fit_cmd = app.add_subcommand("fit", "fit B for one penalty setting");
    add_data_flags(fit_cmd, cfg);
    add_group_flags(fit_cmd, cfg);
    add_penalty_flags(fit_cmd, cfg, false);
    add_solver_flags(fit_cmd, cfg);
    fit_cmd->add_flag("--dump-dag", cfg.dump_dag, "write the zero-pattern DAG as dag.dot");
    common(fit_cmd);

    auto* cv_cmd = app.add_subcommand("cv", "cross-validated grid search");
    add_data_flags(cv_cmd, cfg);
    add_group_flags(cv_cmd, cfg);
    add_penalty_flags(cv_cmd, cfg, true);
    add_solver_flags(cv_cmd, cfg);
    cv_cmd->add_option("--folds", cfg.folds, "number of folds");
    common(cv_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "synthetic replicates and structure comparison");
    sim_cmd->add_option("--layout", cfg.layout, "paper-sec6 or custom");
    sim_cmd->add_option("--signal", cfg.signal, "nonzero coefficient magnitude");
    sim_cmd->add_option("--replicates", cfg.replicates, "number of replicates");
    add_penalty_flags(sim_cmd, cfg, false);
    add_solver_flags(sim_cmd, cfg);
    common(sim_cmd);

    auto* expand_cmd = app.add_subcommand("expand", "network-driven interaction candidates");
    add_data_flags(expand_cmd, cfg);
    add_genome_flags(expand_cmd, cfg);
    expand_cmd->add_option("--p-cutoff", cfg.p_cutoff, "network edge p-value cutoff (default 0.05)");
    common(expand_cmd);

    auto* screen_cmd = app.add_subcommand("screen", "two-locus screen over all SNP pairs");
    add_data_flags(screen_cmd, cfg);
    add_genome_flags(screen_cmd, cfg);
    screen_cmd->add_option("--p-cutoff", cfg.p_cutoff, "screen p-value cutoff (default 1e-5)");
    common(screen_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "objective, MSE and PR of a stored estimate");
    add_data_flags(eval_cmd, cfg);
    add_group_flags(eval_cmd, cfg);
    add_penalty_flags(eval_cmd, cfg, false);
    eval_cmd->add_option("--coef", cfg.coef, "coefficient triplets written by fit")->required();
    eval_cmd->add_option("--truth", cfg.truth, "true coefficients for PR");
    common(eval_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_input;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    return run(cfg);
}
