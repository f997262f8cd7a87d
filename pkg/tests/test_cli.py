import numpy as np
import pytest

from conftest import two_block_gaussian
from wrdpg.cli import EXIT_ERROR, EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE, main
from wrdpg.graph import WeightedGraph, load_edge_list, save_edge_list
from wrdpg.model import SbmSpec, block_assignments, sample_sbm, save_sbm_spec, sbm_latent_positions
from wrdpg.spectral import load_embedding


@pytest.fixture
def graph_file(tmp_path):
    spec = two_block_gaussian()
    W = sample_sbm(spec, block_assignments(spec.pi, 60), 4)
    labels = tuple(f"n{i}" for i in range(60))
    path = tmp_path / "g.tsv"
    path.write_text(save_edge_list(WeightedGraph(W.weights, labels)))
    return path


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(save_sbm_spec(two_block_gaussian()))
    return path


def test_embed_writes_per_order_files(graph_file, tmp_path):
    out = tmp_path / "emb"
    args = ["embed", "--input", str(graph_file), "--d", "2", "--K", "3", "--negative-policy", "clamp"]
    assert main(args + ["--out", str(out)]) == EXIT_OK
    for k in (1, 2, 3):
        emb = load_embedding((out / f"embed_k{k}.txt").read_text())
        assert emb.k == k and emb.positions.shape == (60, 2)
    lines = (out / "scree.csv").read_text().splitlines()
    assert lines[0] == "k,index,value" and len(lines) == 1 + 3 * 60


def test_embed_errors(tmp_path, capsys):
    assert main(["embed", "--input", str(tmp_path / "missing.tsv"), "--d", "2", "--K", "1"]) == EXIT_ERROR
    assert "missing.tsv" in capsys.readouterr().err
    assert main(["embed", "--input", "x", "--d", "2", "--K", "0"]) == EXIT_USAGE


def test_model_matches_closed_form(spec_file, tmp_path):
    out = tmp_path / "model"
    assert main(["model", "--spec", str(spec_file), "--K", "2", "--N", "1000", "--out", str(out)]) == EXIT_OK
    pos = sbm_latent_positions(two_block_gaussian(), 2)
    for k in (1, 2):
        Y = np.loadtxt(out / f"latent_k{k}.txt")
        np.testing.assert_allclose(Y, pos[k], rtol=1e-15)
        for c in (0, 1):
            assert (out / f"covariance_k{k}_c{c}.txt").exists()


def test_model_rejects_non_psd_block_moments(tmp_path, capsys):
    spec = SbmSpec([0.5, 0.5], [[0.1, 0.9], [0.9, 0.1]], two_block_gaussian().dists)
    path = tmp_path / "bad.json"
    path.write_text(save_sbm_spec(spec))
    assert main(["model", "--spec", str(path), "--K", "1", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "k=1" in capsys.readouterr().err


def test_generate_from_spec_is_deterministic(spec_file, tmp_path):
    args = ["generate", "--spec", str(spec_file), "--N", "30", "--K", "3", "--kind", "mixed", "--reps", "2"]
    assert main(args + ["--seed", "5", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--seed", "5", "--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("graph_0001.tsv", "graph_0002.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    G = load_edge_list((tmp_path / "a" / "graph_0001.tsv").read_text())
    assert 0 < G.n_edges < 30 * 29 / 2


def test_sampling_commands_need_a_seed(spec_file, tmp_path, capsys):
    args = ["generate", "--spec", str(spec_file), "--N", "10", "--K", "1", "--kind", "mixed", "--out", str(tmp_path)]
    assert main(args) == EXIT_USAGE
    assert "--seed" in capsys.readouterr().err
    assert main(["generate", "--spec", str(spec_file), "--seed", "1"]) == EXIT_USAGE


def test_fit_then_generate(graph_file, tmp_path):
    out = tmp_path / "fit"
    fit = ["fit", "--input", str(graph_file), "--d", "2", "--K", "1", "--kind", "mixed", "--out", str(out)]
    fit += ["--inadmissible", "shrink", "--signature-digits", "3"]
    # a 60-node sample has a negative second eigenvalue
    assert main(fit) == EXIT_ERROR
    assert main(fit + ["--negative-policy", "clamp"]) == EXIT_OK
    gen = ["generate", "--model", str(out / "model.txt"), "--seed", "9", "--out", str(out)]
    assert main(gen) == EXIT_OK
    assert load_edge_list((out / "graph_0001.tsv").read_text()).n_edges > 0


def test_replicate_is_reproducible(graph_file, tmp_path):
    args = [
        "replicate", "--input", str(graph_file), "--d", "2", "--K", "1", "--kind", "mixed", "--reps", "3",
        "--inadmissible", "shrink", "--negative-policy", "clamp", "--signature-digits", "3",
        "--metrics", "degree", "betweenness",
        "--seed", "17",
    ]
    codes = [main(args + ["--out", str(tmp_path / d)]) for d in ("a", "b")]
    assert codes[0] == codes[1] and codes[0] in (EXIT_OK, EXIT_THRESHOLD)
    names = ["model.txt", "replicate_0003.tsv", "report_degree.txt", "betweenness_ensemble.csv"]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = (tmp_path / "a" / "report_degree.txt").read_text()
    assert "ks_critical" in report and "typical_ks" in report
    # replicates keep the node labels of the input
    assert "n0" in (tmp_path / "a" / "replicate_0001.tsv").read_text()


def test_replicate_needs_a_positive_count(graph_file):
    args = ["replicate", "--input", str(graph_file), "--d", "2", "--K", "1", "--kind", "mixed", "--seed", "1"]
    assert main(args + ["--reps", "0"]) == EXIT_USAGE


def test_validate_flags_a_foreign_reference(graph_file, tmp_path):
    spec = two_block_gaussian()
    reps = []
    for r in range(5):
        path = tmp_path / f"r{r}.tsv"
        W = sample_sbm(spec, block_assignments(spec.pi, 60), 100 + r)
        path.write_text(save_edge_list(WeightedGraph(W.weights * 3.0)))
        reps.append(str(path))
    code = main(["validate", "--input", str(graph_file), "--replicates", *reps, "--out", str(tmp_path / "v")])
    assert code == EXIT_THRESHOLD
    assert "pass 0" in (tmp_path / "v" / "report_degree.txt").read_text()
    assert main(["validate", "--input", str(graph_file), "--replicates", reps[0]]) == EXIT_USAGE


def test_maxent_restarts_summary(tmp_path, capsys):
    path = tmp_path / "exp.txt"
    path.write_text("# exponential(2)\n1\n0.5\n0.5\n0.75\n1.5\n")
    out = tmp_path / "me"
    code = main(["maxent", "--input", str(path), "--restarts", "10", "--seed", "3", "--table", "32", "--out", str(out)])
    assert code == EXIT_OK
    summary = capsys.readouterr().out
    assert "restarts 10 converged 10 within_tol 10" in summary
    record = (out / "density.txt").read_text()
    lam = np.array([float(v) for v in next(l for l in record.splitlines() if l.startswith("lambdas")).split()[1:]])
    np.testing.assert_allclose(lam, [-np.log(2), 2, 0, 0, 0], atol=1e-3)
    assert len((out / "density_table.csv").read_text().splitlines()) == 33


def test_maxent_single_moment_is_uniform(tmp_path, capsys):
    path = tmp_path / "one.txt"
    path.write_text("1\n")
    assert main(["maxent", "--input", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "support 0 1" in out
    assert "lambdas 0" in out


def test_maxent_inadmissible_moments(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("1\n2\n3\n")
    assert main(["maxent", "--input", str(path), "--support", "0", "10"]) == EXIT_ERROR
    assert "Hankel" in capsys.readouterr().err
    assert main(["maxent", "--input", str(path), "--restarts", "-1"]) == EXIT_USAGE
