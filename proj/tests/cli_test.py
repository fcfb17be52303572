"""End-to-end checks of the siol command-line tool.

Usage: cli_test.py <siol-binary> <scratch-dir>
"""

import json
import shutil
import subprocess
import sys
import unittest
from pathlib import Path

import numpy as np

BIN = None
WORK = None


def run(*args, expect=0):
    proc = subprocess.run([str(BIN), *map(str, args)], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(
            f"exit {proc.returncode}, wanted {expect}\nargs: {args}\nstderr: {proc.stderr}"
        )
    return proc


def write_matrix(path, m, prefix):
    with open(path, "w") as f:
        f.write("id\t" + "\t".join(f"s{c + 1}" for c in range(m.shape[1])) + "\n")
        for r, row in enumerate(m):
            f.write(f"{prefix}{r + 1}\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def standardize(m):
    c = m - m.mean(axis=1, keepdims=True)
    n = np.linalg.norm(c, axis=1, keepdims=True)
    n[n == 0] = 1
    return c / n


def scratch(name):
    d = WORK / name
    if d.exists():
        shutil.rmtree(d)
    d.mkdir(parents=True)
    return d


def small_problem(d, seed=0, J=8, K=4, N=30):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(J, N))
    B = np.zeros((K, J))
    B[0, 1] = 1.5
    B[1:3, 2] = -1.0
    Y = B @ X + 0.5 * rng.normal(size=(K, N))
    write_matrix(d / "x.tsv", X, "in")
    write_matrix(d / "y.tsv", Y, "out")
    with open(d / "gin.tsv", "w") as f:
        f.write("g1\t1,2,3\ng2\t3,4\n")
    with open(d / "gout.tsv", "w") as f:
        f.write("h1\t1,2\nh2\t2,3,4\n")
    return X, Y


def read_table(path):
    return [line.split("\t") for line in Path(path).read_text().strip().splitlines()[1:]]


def read_triplets(path):
    text = Path(path).read_text().strip()
    return [] if not text else [line.split("\t") for line in text.splitlines()]


class FitTests(unittest.TestCase):
    def test_universal_threshold_gives_empty_fit_in_one_iteration(self):
        d = scratch("threshold")
        X, Y = small_problem(d)
        lmax = np.abs(standardize(Y) @ standardize(X).T).max()
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--input-groups", d / "gin.tsv",
            "--output-groups", d / "gout.tsv", "--lambda1", 1.0001 * lmax, "--out", d / "fit")
        self.assertEqual(read_triplets(d / "fit" / "B.tsv"), [])
        rep = json.loads((d / "fit" / "fit_report.json").read_text())
        self.assertTrue(rep["converged"])
        self.assertEqual(rep["outer_iterations"], 1)
        self.assertAlmostEqual(rep["lambda1_max"], lmax, delta=1e-12 * lmax)

    def test_fit_then_evaluate_reproduces_the_objective(self):
        d = scratch("roundtrip")
        small_problem(d, seed=3)
        common = ["--x", d / "x.tsv", "--y", d / "y.tsv", "--input-groups", d / "gin.tsv",
                  "--output-groups", d / "gout.tsv", "--lambda1", 0.03, "--lambda2-prime", 0.4,
                  "--lambda3-prime", 0.2]
        run("fit", *common, "--tol", 1e-10, "--out", d / "fit")
        run("evaluate", *common, "--coef", d / "fit" / "B.tsv", "--out", d / "eval")
        rep = json.loads((d / "fit" / "fit_report.json").read_text())
        ev = json.loads((d / "eval" / "evaluation.json").read_text())
        self.assertGreater(len(read_triplets(d / "fit" / "B.tsv")), 0)
        self.assertLessEqual(abs(rep["final_objective"] - ev["objective"]),
                             1e-12 * max(1.0, abs(ev["objective"])))

    def test_triplets_are_one_based_and_match_the_sidecar(self):
        d = scratch("onebased")
        small_problem(d, seed=5)
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--lambda1", 0.05, "--out", d / "fit")
        rows = read_triplets(d / "fit" / "B.tsv")
        meta = json.loads((d / "fit" / "B.tsv.json").read_text())
        self.assertEqual(meta["nnz"], len(rows))
        ks = [int(r[0]) for r in rows]
        js = [int(r[1]) for r in rows]
        self.assertGreaterEqual(min(ks), 1)
        self.assertLessEqual(max(ks), 4)
        self.assertGreaterEqual(min(js), 1)
        self.assertLessEqual(max(js), 8)
        # The planted coefficient beta_1^2 is the strongest signal.
        self.assertIn(("1", "2"), {(r[0], r[1]) for r in rows})

    def test_same_seed_gives_identical_artifacts(self):
        d = scratch("determinism")
        small_problem(d, seed=8)
        for name in ("a", "b"):
            run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--input-groups", d / "gin.tsv",
                "--lambda1", 0.02, "--out", d / name)
        for f in ("B.tsv", "B.tsv.json", "fit_report.json", "trace.tsv"):
            self.assertEqual((d / "a" / f).read_bytes(), (d / "b" / f).read_bytes(), f)
        ma = json.loads((d / "a" / "manifest.json").read_text())
        mb = json.loads((d / "b" / "manifest.json").read_text())
        for key in ("versions", "seed", "results", "exit_status"):
            self.assertEqual(ma[key], mb[key])

    def test_non_convergence_exits_3_and_still_writes(self):
        d = scratch("maxiter")
        small_problem(d, seed=2)
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--lambda1", 0.001, "--tol", 1e-15,
            "--max-iter", 1, "--out", d / "fit", expect=3)
        self.assertTrue((d / "fit" / "B.tsv").exists())
        man = json.loads((d / "fit" / "manifest.json").read_text())
        self.assertEqual(man["exit_status"], 3)
        self.assertFalse(man["results"]["converged"])

    def test_dump_dag(self):
        d = scratch("dag")
        small_problem(d, J=3, K=2)
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--dump-dag", "--out", d / "fit")
        self.assertTrue((d / "fit" / "dag.dot").read_text().startswith("digraph"))


class InputErrorTests(unittest.TestCase):
    def test_parse_error_names_file_and_line(self):
        d = scratch("parse")
        (d / "bad.tsv").write_text("id\ts1\ts2\nin1\t1\t2\nin2\t3\toops\n")
        (d / "y.tsv").write_text("out1\t1\t2\n")
        p = run("fit", "--x", d / "bad.tsv", "--y", d / "y.tsv", "--out", d / "o", expect=2)
        self.assertIn("bad.tsv:3", p.stderr)

    def test_sample_mismatch_names_both_files(self):
        d = scratch("mismatch")
        (d / "x.tsv").write_text("in1\t1\t2\t3\n")
        (d / "y.tsv").write_text("out1\t1\t2\n")
        p = run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--out", d / "o", expect=2)
        self.assertIn("x.tsv", p.stderr)
        self.assertIn("y.tsv", p.stderr)

    def test_coef_shape_mismatch_names_the_files(self):
        d = scratch("shape")
        small_problem(d)
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--out", d / "fit")
        small_problem(d, J=5)
        p = run("evaluate", "--x", d / "x.tsv", "--y", d / "y.tsv", "--coef", d / "fit" / "B.tsv",
                "--out", d / "eval", expect=2)
        self.assertIn("B.tsv", p.stderr)
        self.assertIn("x.tsv", p.stderr)

    def test_bad_flags_and_help(self):
        run("fit", "--no-such-flag", expect=2)
        run("--help", expect=0)
        d = scratch("conflict")
        small_problem(d)
        run("fit", "--x", d / "x.tsv", "--y", d / "y.tsv", "--lambda2", 0.1, "--lambda2-prime", 0.5,
            "--out", d / "o", expect=2)


class PipelineTests(unittest.TestCase):
    def genotype_problem(self, d):
        rng = np.random.default_rng(11)
        J, N = 8, 120
        X = rng.integers(0, 3, size=(J, N)).astype(float)
        Y = rng.normal(size=(2, N))
        Y[0] += 1.5 * (X[0] - X[0].mean()) * (X[5] - X[5].mean())
        write_matrix(d / "x.tsv", X, "rs")
        write_matrix(d / "y.tsv", Y, "t")
        # rs1..rs4 near gene A, rs5..rs8 near gene B; C sits on another chromosome.
        with open(d / "snp.tsv", "w") as f:
            for i in range(4):
                f.write(f"rs{i + 1}\t1\t{100 + 10 * i}\n")
            for i in range(4):
                f.write(f"rs{i + 5}\t1\t{10000 + 10 * i}\n")
        (d / "gene.tsv").write_text("A\t1\t50\t200\nB\t1\t9900\t10100\nC\t2\t0\t100\n")
        (d / "net.tsv").write_text("gene_a\tgene_b\tp_value\nA\tB\t0.001\nA\tC\t0.001\nB\tC\t0.9\n")
        (d / "clusters.tsv").write_text("c1\tA,B\n")
        return X

    def test_expand_builds_the_network_pairs(self):
        d = scratch("expand")
        X = self.genotype_problem(d)
        run("expand", "--x", d / "x.tsv", "--y", d / "y.tsv", "--network", d / "net.tsv",
            "--clusters", d / "clusters.tsv", "--snp-pos", d / "snp.tsv", "--gene-pos", d / "gene.tsv",
            "--out", d / "out")
        pairs = {tuple(r[:2]) for r in read_table(d / "out" / "pairs.tsv")}
        want = {(f"rs{a}", f"rs{b}") for a in range(1, 5) for b in range(5, 9)}
        self.assertEqual(pairs, want)
        ex = (d / "out" / "X_expanded.tsv").read_text().strip().splitlines()
        self.assertEqual(len(ex) - 1, X.shape[0] + len(want))
        groups = read_triplets(d / "out" / "input_groups.tsv")
        self.assertEqual(len(groups), 2)
        self.assertEqual(groups[0][1], "1,2,3,4,5,6,7,8")
        self.assertEqual(len(groups[1][1].split(",")), 16)

    def test_screen_finds_the_planted_pair_and_fit_uses_lambda4(self):
        d = scratch("screen")
        self.genotype_problem(d)
        run("screen", "--x", d / "x.tsv", "--y", d / "y.tsv", "--p-cutoff", 1e-4, "--threads", 2,
            "--out", d / "out")
        rows = read_table(d / "out" / "pairs.tsv")
        self.assertIn(["rs1", "rs6", "screen"], rows)
        self.assertLessEqual(len(rows), 2)
        pv = (d / "out" / "screen_pvalues.tsv").read_text().splitlines()
        self.assertEqual(len(pv) - 1, 28)
        run("fit", "--x", d / "out" / "X_expanded.tsv", "--y", d / "y.tsv", "--lambda1", 0.05,
            "--lambda4", 0.01, "--out", d / "fit")
        rep = json.loads((d / "fit" / "fit_report.json").read_text())
        self.assertEqual(rep["penalty"]["lambda4"], 0.01)


class TuningAndSimulationTests(unittest.TestCase):
    def test_cv_is_independent_of_thread_count(self):
        d = scratch("cv")
        small_problem(d, seed=4)
        args = ["cv", "--x", d / "x.tsv", "--y", d / "y.tsv", "--lambda1", "0.01,0.1",
                "--lambda2-prime", "0,1", "--lambda3-prime", "0.1", "--folds", 3, "--seed", 5]
        run(*args, "--threads", 1, "--out", d / "a")
        run(*args, "--threads", 2, "--out", d / "b")
        for f in ("cv_table.tsv", "best.json"):
            self.assertEqual((d / "a" / f).read_bytes(), (d / "b" / f).read_bytes(), f)
        table = (d / "a" / "cv_table.tsv").read_text().strip().splitlines()
        self.assertEqual(len(table) - 1, 4 * 3)

    def test_simulate_writes_one_pr_table_per_replicate_and_variant(self):
        d = scratch("simulate")
        run("simulate", "--layout", "paper-sec6", "--signal", 2, "--replicates", 2, "--out", d / "out")
        for r in ("replicate_001", "replicate_002"):
            for v in ("both", "input-only", "output-only"):
                self.assertTrue((d / "out" / r / f"pr_{v}.tsv").exists())
        summary = json.loads((d / "out" / "summary.json").read_text())
        self.assertEqual([v["variant"] for v in summary["variants"]], ["both", "input-only", "output-only"])
        for v in summary["variants"]:
            self.assertGreater(v["mean_aupr"], 0.5)
        man = json.loads((d / "out" / "manifest.json").read_text())
        self.assertEqual(man["command"], "simulate")
        self.assertEqual(man["parameters"]["replicates"], 2)
        self.assertIn("eigen", man["versions"])
        run("simulate", "--layout", "nope", "--replicates", 1, "--out", d / "bad", expect=2)


if __name__ == "__main__":
    BIN = Path(sys.argv[1]).resolve()
    WORK = Path(sys.argv[2]).resolve()
    WORK.mkdir(parents=True, exist_ok=True)
    unittest.main(argv=[sys.argv[0], "-v"])
