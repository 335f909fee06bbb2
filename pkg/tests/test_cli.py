import filecmp
import os

import numpy as np
from numpy.testing import assert_allclose

from hjsvd import SignatureVector, read_csv_matrix, read_gjh, write_gjh
from hjsvd.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def write_bundle(path, G, p, lambda_true=None):
    os.makedirs(path, exist_ok=True)
    write_gjh(os.path.join(path, "G.gjh"), G, p)
    if lambda_true is not None:
        from hjsvd import write_csv_matrix
        write_csv_matrix(os.path.join(path, "lambda_true.csv"),
                         np.asarray(lambda_true)[np.newaxis, :])


class TestGen:
    def test_writes_bundle(self, tmp_path):
        out = tmp_path / "b"
        assert run("gen", "--n", 8, "--a", 20, "--seed", 1, "--out", out) == 0
        for name in ("M.gjh", "G.gjh", "lambda_true.csv", "manifest.csv"):
            assert (out / name).exists()
        G, p = read_gjh(out / "G.gjh")
        assert G.shape == (8, 8)
        lam = read_csv_matrix(out / "lambda_true.csv").ravel()
        assert p == np.count_nonzero(lam > 0)

    def test_deterministic_bytes(self, tmp_path):
        run("gen", "--n", 6, "--a", 20, "--seed", 7, "--out", tmp_path / "b1")
        run("gen", "--n", 6, "--a", 20, "--seed", 7, "--out", tmp_path / "b2")
        for name in ("M.gjh", "G.gjh", "lambda_true.csv"):
            assert filecmp.cmp(tmp_path / "b1" / name, tmp_path / "b2" / name,
                               shallow=False)

    def test_usage_error(self, tmp_path):
        assert run("gen", "--n", 1, "--seed", 1, "--out", tmp_path / "b") == 2


class TestEig:
    def test_diagonal_bundle(self, tmp_path):
        bundle = tmp_path / "b"
        write_bundle(bundle, np.diag([2.0, 1.0]), 1, [-1.0, 4.0])
        out = tmp_path / "r"
        assert run("eig", "--in", bundle, "--out", out) == 0
        lam = read_csv_matrix(out / "lambda.csv").ravel()
        assert_allclose(np.sort(lam), [-1.0, 4.0], rtol=0)
        rec = (out / "record.csv").read_text().splitlines()
        assert rec[0].startswith("n,r,p,sweeps")
        assert rec[1].split(",")[3] == "1"  # one quasi-sweep

    def test_missing_bundle(self, tmp_path):
        assert run("eig", "--in", tmp_path / "nope", "--out", tmp_path / "r") == 3

    def test_nonconvergence_exit_code(self, tmp_path):
        bundle = tmp_path / "b"
        rng = np.random.default_rng(0)
        write_bundle(bundle, rng.standard_normal((8, 8)), 4)
        code = run("eig", "--in", bundle, "--out", tmp_path / "r",
                   "--max-sweeps", 1)
        assert code == 6

    def test_odd_r_needs_border(self, tmp_path):
        bundle = tmp_path / "b"
        rng = np.random.default_rng(1)
        G = rng.standard_normal((3, 3))
        lam = np.linalg.eigvalsh(G @ G.T)
        write_bundle(bundle, G, 3, lam)
        assert run("eig", "--in", bundle, "--out", tmp_path / "r1") == 2
        assert run("eig", "--in", bundle, "--out", tmp_path / "r2",
                   "--border") == 0
        lam_out = read_csv_matrix(tmp_path / "r2" / "lambda.csv").ravel()
        assert lam_out.shape == (3,)
        assert_allclose(np.sort(lam_out), lam, rtol=1e-12)

    def test_worker_counts_identical_files(self, tmp_path):
        run("gen", "--n", 12, "--a", 20, "--seed", 3, "--out", tmp_path / "b")
        run("eig", "--in", tmp_path / "b", "--out", tmp_path / "r1")
        run("eig", "--in", tmp_path / "b", "--out", tmp_path / "r2",
            "--workers", 4)
        for name in ("lambda.csv", "sigma.csv", "U.gjh", "V.gjh"):
            assert filecmp.cmp(tmp_path / "r1" / name, tmp_path / "r2" / name,
                               shallow=False)

    def test_schedule_flag(self, tmp_path):
        run("gen", "--n", 10, "--a", 20, "--seed", 5, "--out", tmp_path / "b")
        run("eig", "--in", tmp_path / "b", "--out", tmp_path / "rm")
        run("eig", "--in", tmp_path / "b", "--out", tmp_path / "rc",
            "--schedule", "row-cyclic")
        lm = np.sort(read_csv_matrix(tmp_path / "rm" / "lambda.csv").ravel())
        lc = np.sort(read_csv_matrix(tmp_path / "rc" / "lambda.csv").ravel())
        assert_allclose(lc, lm, rtol=1e-12)

    def test_no_accumulate_v(self, tmp_path):
        run("gen", "--n", 6, "--a", 20, "--seed", 2, "--out", tmp_path / "b")
        assert run("eig", "--in", tmp_path / "b", "--out", tmp_path / "r",
                   "--no-accumulate-v") == 0
        assert not (tmp_path / "r" / "V.gjh").exists()


class TestFactor:
    def test_round_trip(self, tmp_path):
        run("gen", "--n", 8, "--a", 20, "--seed", 4, "--out", tmp_path / "b")
        assert run("factor", "--in", tmp_path / "b" / "M.gjh",
                   "--out", tmp_path / "G2.gjh") == 0
        G, p = read_gjh(tmp_path / "G2.gjh")
        M, _ = read_gjh(tmp_path / "b" / "M.gjh")
        J = np.diag(SignatureVector.from_p(8, p).signs.astype(float))
        assert np.linalg.norm(G @ J @ G.T - M, "fro") <= \
            50 * 8 * 2.0 ** -52 * np.linalg.norm(M, "fro")


class TestCheckStrategy:
    def test_range_passes(self):
        assert run("check-strategy", "--n", "4..8") == 0

    def test_single_order(self):
        assert run("check-strategy", "--n", "8") == 0

    def test_odd_rejected(self):
        assert run("check-strategy", "--n", "5..9") == 2


class TestBench:
    def test_table_structure(self, tmp_path):
        out = tmp_path / "bench.csv"
        assert run("bench", "--orders", "8", "--seed", 5, "--repeats", 2,
                   "--out", out) == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        # 3 sign counts x sorting on/off x 2 repeats
        assert len(lines) == 1 + 12
        i_err = header.index("max_rel_eig_err")
        i_du = header.index("dU")
        i_sort = header.index("sorting_enabled")
        rows = [ln.split(",") for ln in lines[1:]]
        assert {r[i_sort] for r in rows} == {"True", "False"}
        # repeats of one configuration have identical accuracy columns
        for k in range(0, 12, 2):
            assert rows[k][i_err] == rows[k + 1][i_err]
            assert rows[k][i_du] == rows[k + 1][i_du]

    def test_odd_order_rejected(self, tmp_path):
        assert run("bench", "--orders", "7", "--seed", 1,
                   "--out", tmp_path / "b.csv") == 2
