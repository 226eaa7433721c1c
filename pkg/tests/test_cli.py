import json

import pytest

from diracsobolev import cli
from diracsobolev.errors import ConfigError


def run(tmp_path, command, config=None, *extra):
    args = [command, "--profile", "quick", "--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / f"{command}-config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return cli.main(args + list(extra))


def report(tmp_path, command):
    return json.loads((tmp_path / f"{command.replace('-', '_')}.json").read_text())


class TestConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            cli.build_config("lemma41", overrides={"bogus": 1})

    def test_p_ge_q_rejected(self, tmp_path, capsys):
        assert run(tmp_path, "ratio-sweep", {"p": 2.0, "q": 1.5}) == cli.EXIT_CONFIG
        assert "p < q" in capsys.readouterr().err

    def test_descending_n_list(self, tmp_path):
        assert run(tmp_path, "divergence", {"n_list": [16, 4]}) == cli.EXIT_CONFIG

    def test_memory_budget(self, tmp_path):
        assert run(tmp_path, "seminorms", {"family": "beta", "N": 256}) == cli.EXIT_CONFIG

    def test_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        assert cli.main(["lemma41", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_seed_from_flag_wins(self):
        cfg = cli.build_config("seminorms", "quick", 7, {"seed": 3})
        assert cfg.seed == 7
        assert cli.build_config("seminorms", "quick", None, {"seed": 3}).seed == 3

    def test_profiles_differ(self):
        assert cli.build_config("seminorms", "quick").params["count"] < cli.build_config("seminorms").params["count"]


class TestCommands:
    def test_verify_clifford(self, tmp_path):
        assert run(tmp_path, "verify-clifford") == cli.EXIT_OK
        rep = report(tmp_path, "verify-clifford")
        assert rep["decom_counts"]["alpha"] == {"enumerated": 128, "decom1": 8}
        assert rep["decom_counts"]["beta"]["decom1"] == 8
        assert rep["decom_count_discrepancy"]["paper_stated"] == 64
        assert all(c["pass"] for c in rep["checks"].values())

    def test_verify_sigma(self, tmp_path):
        assert run(tmp_path, "verify-clifford", {"family": "sigma"}) == cli.EXIT_OK
        assert report(tmp_path, "verify-clifford")["decom_counts"] == {"sigma": {"enumerated": 8, "decom1": 2}}

    def test_seminorms_beta_chain(self, tmp_path):
        assert run(tmp_path, "seminorms", {"family": "beta", "ps": [1.0, 2.0]}) == cli.EXIT_OK
        rows = cli.read_csv(tmp_path / "seminorms.csv")
        chain = [r for r in rows if r["kind"] == "chain_beta"]
        assert len(chain) == 4 and all(float(r["margin_lower"]) >= -float(r["slack"]) for r in chain)
        rep = report(tmp_path, "seminorms")
        assert rep["p2_grad_vs_dirac_max_rel_dev"] < 1e-12

    def test_seminorms_empty(self, tmp_path):
        assert run(tmp_path, "seminorms", {"count": 0}) == cli.EXIT_OK
        lines = (tmp_path / "seminorms.csv").read_text().splitlines()
        assert len(lines) == 2 and lines[0].startswith("# config:")

    def test_counterexample_sweep(self, tmp_path):
        cfg = {"n_list": [4, 8], "besov": {"alpha": {"N": 32, "n_max": 4}}}
        assert run(tmp_path, "counterexample-sweep", cfg) == cli.EXIT_OK
        rows = cli.read_csv(tmp_path / "counterexample_sweep.csv")
        assert all(float(r["l1_dirac"]) <= float(r["l1_bound_uniform"]) for r in rows)
        assert rows[0]["besov_numeric"] != "" and rows[1]["besov_numeric"] == ""
        rep = report(tmp_path, "counterexample-sweep")
        assert rep["targets"]["alpha"]["lq_exponent"] == pytest.approx(2 / 3)
        assert rep["targets"]["beta"]["lq_exponent"] == 0.75

    def test_ratio_sweep(self, tmp_path):
        assert run(tmp_path, "ratio-sweep", {"count": 2, "N": 24}) == cli.EXIT_OK
        rows = cli.read_csv(tmp_path / "ratio_sweep.csv")
        assert len(rows) == 6 and all(float(r["ratio"]) > 0 for r in rows)

    def test_lemma41(self, tmp_path):
        assert run(tmp_path, "lemma41") == cli.EXIT_OK
        rows = cli.read_csv(tmp_path / "lemma41.csv")
        assert all(float(r["rel_err"]) < 1e-2 for r in rows)

    def test_lemma41_failure_exit(self, tmp_path):
        assert run(tmp_path, "lemma41", {"rel_tol": 1e-12}) == cli.EXIT_CHECK
        assert report(tmp_path, "lemma41")["status"] == "fail"

    def test_divergence_alpha(self, tmp_path):
        assert run(tmp_path, "divergence", {"families": ["alpha"]}) == cli.EXIT_OK
        rows = [r for r in cli.read_csv(tmp_path / "divergence.csv") if r["kind"] == "dirac"]
        ratios = [float(r["ratio"]) for r in rows]
        assert ratios == sorted(ratios) and len(ratios) == 3

    def test_nonconvergence_exit(self, tmp_path):
        assert run(tmp_path, "divergence", {"families": ["alpha"], "tol": 1e-300}) == cli.EXIT_CONVERGENCE


class TestDeterminism:
    @pytest.mark.parametrize("command,config", [
        ("seminorms", {"count": 2}),
        ("ratio-sweep", {"count": 2, "N": 24}),
        ("verify-clifford", None),
    ])
    def test_byte_identical(self, tmp_path, command, config):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        assert run(a, command, config) == run(b, command, config) == cli.EXIT_OK
        stem = command.replace("-", "_")
        for ext in ("csv", "json"):
            assert (a / f"{stem}.{ext}").read_bytes() == (b / f"{stem}.{ext}").read_bytes()

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        run(a, "seminorms", {"count": 1}, "--seed", "1")
        run(b, "seminorms", {"count": 1}, "--seed", "2")
        assert (a / "seminorms.csv").read_bytes() != (b / "seminorms.csv").read_bytes()
