#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <siol/core_model.hpp>
#include <siol/higt.hpp>
#include <siol/interactions.hpp>
#include <siol/pattern_dag.hpp>
#include <siol/simulation.hpp>
#include <siol/tuning.hpp>

namespace py = pybind11;
using namespace siol;

namespace {

Dataset make_dataset(const Matrix& X, const Matrix& Y, bool standardize)
{
    Dataset ds(X, Y);
    return standardize ? ds.standardized() : ds;
}

GroupStructure make_groups(const std::vector<IndexSet>& input_groups, const std::vector<IndexSet>& output_groups)
{
    GroupStructure gs;
    gs.input_groups = input_groups;
    gs.output_groups = output_groups;
    return gs;
}

py::dict report_dict(const FitReport& r)
{
    py::dict d;
    d["initial_objective"] = r.initial_objective;
    d["final_objective"] = r.final_objective;
    d["outer_iterations"] = r.outer_iterations;
    d["objective_trace"] = r.objective_trace;
    d["support_size_trace"] = r.support_size_trace;
    d["converged"] = r.converged;
    d["warm_sweeps"] = r.warm_sweeps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_siol, m)
{
    m.doc() = "Structured input-output lasso";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<PenaltyConfig>(m, "PenaltyConfig")
        .def(py::init([](double l1, double l2, double l3, std::optional<double> l4) {
                 PenaltyConfig pc{l1, l2, l3, l4};
                 pc.validate();
                 return pc;
             }),
             py::arg("lambda1") = 0.0, py::arg("lambda2") = 0.0, py::arg("lambda3") = 0.0,
             py::arg("lambda4") = py::none())
        .def_readwrite("lambda1", &PenaltyConfig::lambda1)
        .def_readwrite("lambda2", &PenaltyConfig::lambda2)
        .def_readwrite("lambda3", &PenaltyConfig::lambda3)
        .def_readwrite("lambda4", &PenaltyConfig::lambda4)
        .def("__repr__", [](const PenaltyConfig& pc) {
            return "PenaltyConfig(lambda1=" + std::to_string(pc.lambda1) + ", lambda2=" +
                   std::to_string(pc.lambda2) + ", lambda3=" + std::to_string(pc.lambda3) + ")";
        });

    m.def("penalty_from_prime", &penalty_from_prime, py::arg("lambda1"), py::arg("lambda2_prime"),
          py::arg("lambda3_prime"), py::arg("lambda4") = py::none());

    m.def("standardize_rows",
          [](const Matrix& a) {
              auto s = standardize_rows(a);
              return py::make_tuple(s.values, s.constant_rows);
          },
          py::arg("m"), "Centers rows and scales them to unit norm; returns (values, constant_rows).");

    m.def("lambda1_max",
          [](const Matrix& X, const Matrix& Y, bool standardize) {
              return lambda1_max(make_dataset(X, Y, standardize));
          },
          py::arg("X"), py::arg("Y"), py::arg("standardize") = true);

    m.def("objective",
          [](const Matrix& X, const Matrix& Y, const Matrix& B, const PenaltyConfig& pc,
             const std::vector<IndexSet>& input_groups, const std::vector<IndexSet>& output_groups,
             bool standardize) {
              const Dataset ds = make_dataset(X, Y, standardize);
              const GroupStructure gs = make_groups(input_groups, output_groups);
              gs.validate(ds.n_inputs(), ds.n_outputs());
              if (B.rows() != ds.n_outputs() || B.cols() != ds.n_inputs()) throw InputError("B has the wrong shape");
              return objective_value(ds, CoefMatrix(B), gs, pc);
          },
          py::arg("X"), py::arg("Y"), py::arg("B"), py::arg("penalty"),
          py::arg("input_groups") = std::vector<IndexSet>{}, py::arg("output_groups") = std::vector<IndexSet>{},
          py::arg("standardize") = true);

    m.def("fit",
          [](const Matrix& X, const Matrix& Y, const PenaltyConfig& pc, const std::vector<IndexSet>& input_groups,
             const std::vector<IndexSet>& output_groups, double tol, int max_iter, bool standardize) {
              const Dataset ds = make_dataset(X, Y, standardize);
              const GroupStructure gs = make_groups(input_groups, output_groups);
              SolverSettings s;
              s.tol = tol;
              s.max_outer_iters = max_iter;
              FitResult res;
              {
                  py::gil_scoped_release release;
                  res = fit(ds, gs, pc, s);
              }
              return py::make_tuple(res.coef.dense(), report_dict(res.report));
          },
          py::arg("X"), py::arg("Y"), py::arg("penalty"), py::arg("input_groups") = std::vector<IndexSet>{},
          py::arg("output_groups") = std::vector<IndexSet>{}, py::arg("tol") = 1e-6, py::arg("max_iter") = 1000,
          py::arg("standardize") = true,
          "Fits B (outputs x inputs). Rows of X and Y are variables, columns samples. Returns (B, report).");

    m.def("cv",
          [](const Matrix& X, const Matrix& Y, const std::vector<double>& lambda1,
             const std::vector<double>& lambda2_prime, const std::vector<double>& lambda3_prime, int folds,
             const std::vector<IndexSet>& input_groups, const std::vector<IndexSet>& output_groups,
             std::uint64_t seed, int threads) {
              const Dataset ds = make_dataset(X, Y, true);
              const GroupStructure gs = make_groups(input_groups, output_groups);
              TuningGrid grid{lambda1, lambda2_prime, lambda3_prime, folds};
              CvOutcome out;
              {
                  py::gil_scoped_release release;
                  out = cv_grid_search(ds, gs, grid, {}, seed, threads);
              }
              py::list scores;
              for (const auto& [p, s] : out.scores)
                  scores.append(py::make_tuple(p.lambda1, p.lambda2_prime, p.lambda3_prime, s));
              py::dict d;
              d["lambda1"] = out.best_point.lambda1;
              d["lambda2_prime"] = out.best_point.lambda2_prime;
              d["lambda3_prime"] = out.best_point.lambda3_prime;
              d["penalty"] = out.best;
              d["score"] = out.best_score;
              d["scores"] = scores;
              return d;
          },
          py::arg("X"), py::arg("Y"), py::arg("lambda1"), py::arg("lambda2_prime"), py::arg("lambda3_prime"),
          py::arg("folds") = 5, py::arg("input_groups") = std::vector<IndexSet>{},
          py::arg("output_groups") = std::vector<IndexSet>{}, py::arg("seed") = 1, py::arg("threads") = 1);

    m.def("simulate",
          [](double signal, std::uint64_t seed) {
              SimConfig cfg;
              cfg.signal = signal;
              cfg.seed = seed;
              const SimInstance sim = generate_dataset(cfg);
              py::dict d;
              d["X"] = sim.ds.X;
              d["Y"] = sim.ds.Y;
              d["X_holdout"] = sim.holdout.X;
              d["Y_holdout"] = sim.holdout.Y;
              d["B_true"] = sim.B_true.dense();
              d["input_groups"] = sim.gs.input_groups;
              d["output_groups"] = sim.gs.output_groups;
              return d;
          },
          py::arg("signal") = 2.0, py::arg("seed") = 1,
          "One replicate of the default synthetic layout; X and Y already standardized.");

    m.def("aupr",
          [](const Matrix& est, const Matrix& truth) {
              const CoefMatrix e(est);
              return area_under_pr(precision_recall_curve(e, CoefMatrix(truth), default_thresholds(e)));
          },
          py::arg("estimate"), py::arg("truth"));

    m.def("interaction_p_value",
          [](const Vector& xr, const Vector& xs, const Vector& y) { return interaction_p_value(xr, xs, y); },
          py::arg("x_r"), py::arg("x_s"), py::arg("y"));

    m.def("dag_dot",
          [](const std::vector<IndexSet>& input_groups, const std::vector<IndexSet>& output_groups, Index n_inputs,
             Index n_outputs) {
              return build_dag(make_groups(input_groups, output_groups), n_inputs, n_outputs)->to_dot();
          },
          py::arg("input_groups"), py::arg("output_groups"), py::arg("n_inputs"), py::arg("n_outputs"));
}
