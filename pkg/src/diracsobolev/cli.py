"""Command line runner.

Every subcommand reads a JSON config (optional), merges it over the profile
defaults, writes ``<command>.csv`` and ``<command>.json`` into ``--out`` and
exits with 0 (all checks pass), 1 (a check failed), 2 (bad configuration)
or 3 (numerical non-convergence).  The first CSV line echoes the merged
config as ``# config: {...}``.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import clifford as cl
from . import counterexample as ce
from . import grid as fg
from . import inequalities as iq
from . import seminorms as sn
from .errors import ConfigError, ConvergenceError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

_SHAPES = {"alpha": (3, 4), "beta": (4, 4), "sigma3d": (3, 2)}

DEFAULTS: dict[str, dict] = {
    "verify-clifford": {"family": "all"},
    "seminorms": {"family": "alpha", "field_kind": "bandlimited", "count": 10, "ps": [1.0, 1.5, 2.0, 3.0],
                  "N": {"alpha": 64, "beta": 32, "sigma3d": 64}, "L": 10.0,
                  "kinds": None, "decom_spread_tol": 1e-12},
    "counterexample-sweep": {"families": ["alpha", "beta"], "n_list": [4, 8, 16, 32, 64], "tol": 1e-8,
                             "besov": {"alpha": {"N": 64, "n_max": 16}, "beta": {"N": 32, "n_max": 16}},
                             "besov_pad": 12.0, "besov_n_t": 40, "besov_factor": 1.05},
    "ratio-sweep": {"family": "alpha", "field_kind": "gaussian_bump", "count": 10, "p": 1.0, "q": 1.5,
                    "kinds": ["dirac_full", "grad", "m_canonical_alpha"], "weak": False,
                    "N": 64, "L": 10.0, "n_t": 60},
    "lemma41": {"family": "alpha", "settings": [[1.0, 1.5, 10.0], [2.0, 3.0, 5.0]], "N": 64, "L": 10.0,
                "n_u": 400, "rel_tol": 1e-2},
    "divergence": {"families": ["alpha", "beta"], "n_list": [4, 16, 64, 256], "tol": 1e-8,
                   "exponent_window": {"alpha": [0.2, 0.45], "beta": [0.15, 0.45]}},
}

QUICK: dict[str, dict] = {
    "seminorms": {"count": 4, "N": {"alpha": 16, "beta": 8, "sigma3d": 16}},
    "counterexample-sweep": {"n_list": [4, 8, 16], "besov": {}},
    "ratio-sweep": {"count": 3, "N": 32, "n_t": 30},
    "lemma41": {},
    "divergence": {"n_list": [4, 16, 64]},
    "verify-clifford": {},
}


@dataclass
class RunConfig:
    command: str
    profile: str
    seed: int
    params: dict = field(default_factory=dict)

    def echo(self) -> str:
        return json.dumps({"command": self.command, "profile": self.profile, "seed": self.seed,
                           "params": self.params}, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------- config handling

def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _positive_number(v, name):
    _require(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 and math.isfinite(v),
             f"{name} must be a positive number")


def _n_list(v, name="n_list"):
    _require(isinstance(v, list) and len(v) >= 1, f"{name} must be a non-empty list")
    for n in v:
        _positive_number(n, name)
        _require(n > 1, f"{name} entries must exceed 1")
    _require(all(a < b for a, b in zip(v, v[1:])), f"{name} must be strictly ascending")


def _pq(p, q):
    _positive_number(p, "p")
    _positive_number(q, "q")
    _require(1 <= p < q, f"need 1 <= p < q, got p={p}, q={q}")


def _grid(dim, m, L, N):
    _require(isinstance(N, int) and not isinstance(N, bool), "N must be an integer")
    _positive_number(L, "L")
    try:
        return fg.GridSpec(dim, m, float(L), N)
    except (ValueError, MemoryError) as exc:
        raise ConfigError(str(exc)) from None


def _validate(cfg: RunConfig):
    p = cfg.params
    c = cfg.command
    if c == "verify-clifford":
        _require(p["family"] in ("all", "alpha", "beta", "sigma"), "family must be all, alpha, beta or sigma")
    elif c == "seminorms":
        _require(p["family"] in _SHAPES, f"family must be one of {sorted(_SHAPES)}")
        _require(p["field_kind"] in ("bandlimited", "gaussian_bump", "multi_bump"), "unknown field_kind")
        _require(isinstance(p["count"], int) and p["count"] >= 0, "count must be a non-negative integer")
        _require(isinstance(p["ps"], list) and p["ps"], "ps must be a non-empty list")
        for v in p["ps"]:
            _positive_number(v, "ps")
            _require(v >= 1, "ps entries must be >= 1")
        _grid(*_SHAPES[p["family"]], p["L"], p["N"][p["family"]])
        if p["kinds"] is not None:
            _require(all(k in sn.KINDS and k != "m_decomposition" for k in p["kinds"]), "unknown seminorm kind")
    elif c == "counterexample-sweep":
        _require(set(p["families"]) <= {"alpha", "beta"} and p["families"], "families must be alpha and/or beta")
        _n_list(p["n_list"])
        for fam, b in p["besov"].items():
            _require(fam in ("alpha", "beta"), "besov keys must be families")
            _grid(ce.get_family(fam).dim, 4, 1.0, b["N"])
    elif c == "ratio-sweep":
        _require(p["family"] in _SHAPES, f"family must be one of {sorted(_SHAPES)}")
        _pq(p["p"], p["q"])
        _require(isinstance(p["count"], int) and p["count"] >= 0, "count must be a non-negative integer")
        _require(all(k in sn.KINDS and k != "m_decomposition" for k in p["kinds"]), "unknown seminorm kind")
        _grid(*_SHAPES[p["family"]], p["L"], p["N"])
    elif c == "lemma41":
        _require(p["family"] in _SHAPES, f"family must be one of {sorted(_SHAPES)}")
        _require(isinstance(p["settings"], list) and p["settings"], "settings must be a list of [p, q, c]")
        for s in p["settings"]:
            _require(isinstance(s, list) and len(s) == 3, "each setting is [p, q, c]")
            _pq(s[0], s[1])
            _require(s[2] > 1, "c must exceed 1")
        _require(isinstance(p["n_u"], int) and p["n_u"] >= 4, "n_u must be an integer >= 4")
        _grid(*_SHAPES[p["family"]], p["L"], p["N"])
    elif c == "divergence":
        _require(set(p["families"]) <= {"alpha", "beta"} and p["families"], "families must be alpha and/or beta")
        _n_list(p["n_list"])
        _require(len(p["n_list"]) >= 2, "divergence needs at least two n values")


def build_config(command: str, profile: str = "full", seed: int | None = None,
                 overrides: dict | None = None) -> RunConfig:
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    if profile not in ("quick", "full"):
        raise ConfigError("profile must be quick or full")
    params = copy.deepcopy(DEFAULTS[command])
    if profile == "quick":
        params.update(copy.deepcopy(QUICK[command]))
    overrides = dict(overrides or {})
    cfg_seed = overrides.pop("seed", 0)
    unknown = set(overrides) - set(params)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    for k, v in overrides.items():
        if k == "N" and isinstance(params[k], dict) and isinstance(v, int):
            v = {fam: v for fam in params[k]}
        params[k] = v
    if command == "ratio-sweep" and params["family"] != "alpha" and params["kinds"] == DEFAULTS[command]["kinds"]:
        params["kinds"] = ["dirac_full", "grad", iq.DEFAULT_M_KIND[_SHAPES[params["family"]]]]
    seed = cfg_seed if seed is None else seed
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    cfg = RunConfig(command, profile, seed, params)
    try:
        _validate(cfg)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return cfg


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


# ---------------------------------------------------------------- output helpers

def _num(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return repr(float(v))


@dataclass
class Outcome:
    header: list[str]
    rows: list[list[str]]
    report: dict
    passed: bool


def _check(report: dict, name: str, ok: bool, **info) -> bool:
    report.setdefault("checks", {})[name] = {"pass": bool(ok), **info}
    return bool(ok)


def write_outputs(cfg: RunConfig, out: Path, outcome: Outcome) -> tuple[Path, Path]:
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.command.replace("-", "_")
    buf = io.StringIO()
    buf.write(f"# config: {cfg.echo()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.header)
    w.writerows(outcome.rows)
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(buf.getvalue())
    report = {"config": json.loads(cfg.echo()), "status": "pass" if outcome.passed else "fail", **outcome.report}
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(report, sort_keys=True, indent=1, default=_json_default) + "\n")
    return csv_path, json_path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def read_csv(path) -> list[dict]:
    """Rows of a CSV written by this module, skipping the config line."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# ---------------------------------------------------------------- commands

def cmd_verify_clifford(cfg: RunConfig) -> Outcome:
    fam = cfg.params["family"]
    rep: dict = {}
    ok = True
    rows = []
    sets = {"alpha": (cl.alpha_matrices, cl.dirac_alpha_symbol, "m_canonical_alpha"),
            "beta": (cl.beta_matrices, cl.dirac_beta_symbol, "m_canonical_beta"),
            "sigma": (lambda: list(cl.pauli()), cl.sigma3d_symbol, "m_sigma3d")}
    chosen = list(sets) if fam == "all" else [fam]
    for name in chosen:
        mats_fn, sym_fn, kind = sets[name]
        res = cl.anticommutator_residuals(mats_fn())
        ok &= _check(rep, f"{name}_anticommutation", all(r.is_zero() for r in res.values()),
                     pairs=len(res))
        base = sym_fn()
        members = cl.decom1(base)
        total = len(cl.enumerate_decompositions(base))
        counts = {m.canonical_terms().counts().__repr__() for m in members}
        ok &= _check(rep, f"{name}_decom1_terms_identical", len(counts) == 1, members=len(members))
        expected = _terms_from_seminorm(kind)
        ok &= _check(rep, f"{name}_terms_match_expansion", members[0].canonical_terms().counts() == expected)
        rep.setdefault("decom_counts", {})[name] = {"enumerated": total, "decom1": len(members)}
        if name in ("alpha", "beta"):
            half = cl.Decomposition.from_parts(base, base.columns([1, 2]))
            other = cl.Decomposition.from_parts(base, base.columns([1, 3]))
            ok &= _check(rep, f"{name}_P12_P34_fails_row_condition", not half.row_condition())
            ok &= _check(rep, f"{name}_P13_P24_in_decom1", other.row_condition())
        rep.setdefault("decom1_members", {})[name] = [m.to_json() for m in members]
        for i, m in enumerate(members):
            rows.append([name, str(i), " ".join(map(str, m.labels)), _num(m.row_condition())])
    rep["decom_count_discrepancy"] = {"paper_stated": cl.PAPER_DECOM_COUNT, "enumerated": 128,
                                      "note": "unordered entrywise splits of 8 nonzero entries: 2^8/2 = 128"}
    if fam in ("all", "sigma"):
        for key, var in (("N", "b"), ("N'", "c")):
            u, uinv = cl.conjugators()[key]
            ok &= _check(rep, f"conjugation_{key}_{var}_to_a",
                         cl.conjugate(cl.weyl2d_symbol(var), u, uinv) == cl.weyl2d_symbol("a"))
            ok &= _check(rep, f"{key}_unitary", (u @ u.adjoint()).is_identity() and (u @ uinv).is_identity())
            ok &= _check(rep, f"{key}_induced_norms_le_sqrt2",
                         max(cl.induced_norm(u, k) for k in (1, 2, np.inf)) <= math.sqrt(2) + 1e-12)
    return Outcome(["family", "member", "assignment", "row_condition"], rows, rep, ok)


def _terms_from_seminorm(kind: str):
    """Canonical terms implied by a hand-written seminorm term list (p_j = -i d_j)."""
    from collections import Counter
    dim, _, terms = sn.kind_terms(kind)
    out = Counter()
    for term in terms:
        (comp, coeffs), = term
        entry = tuple(_exact(c) for c in coeffs[:dim])
        out[(comp + 1, cl.normalize_phase(entry))] += 1
    return out


def _exact(z) -> cl.Exact:
    z = complex(z)
    return cl.Exact(int(z.real), 0, int(z.imag), 0)


def _ensemble(cfg: RunConfig, spec: fg.GridSpec, real: bool = False) -> dict:
    p = cfg.params
    fields = fg.random_test_fields(cfg.seed, spec, p["field_kind"], p["count"], real=real)
    return {f"{p['field_kind']}-{cfg.seed}-{i:03d}": f for i, f in enumerate(fields)}


def cmd_seminorms(cfg: RunConfig) -> Outcome:
    p = cfg.params
    fam = p["family"]
    spec = _grid(*_SHAPES[fam], p["L"], p["N"][fam])
    fields = _ensemble(cfg, spec)
    canonical = {"alpha": "m_canonical_alpha", "beta": "m_canonical_beta", "sigma3d": "m_sigma3d"}[fam]
    kinds = p["kinds"] or ["grad", "dirac_full", canonical]
    rows = sn.seminorm_table(fields, kinds, p["ps"]) + sn.sandwich_rows(fields, p["ps"], fam)
    rep: dict = {}
    ok = True
    sand = [r for r in rows if r["kind"] == f"sandwich_{fam}"]
    worst = min((min(r["margin_lower"], r["margin_upper"],
                     r["margin_dirac"] if r["margin_dirac"] != "" else math.inf) / max(r["slack"], 1e-300)
                 for r in sand), default=math.inf)
    ok &= _check(rep, "sandwich", all(
        min(r["margin_lower"], r["margin_upper"]) >= -r["slack"]
        and (r["margin_dirac"] == "" or r["margin_dirac"] >= -r["slack"]) for r in sand),
        worst_margin_over_slack=_finite(worst))
    if fam == "beta" and 1.0 in p["ps"]:
        chain = sn.chain_rows(fields)
        rows += chain
        ok &= _check(rep, "chain_p1", all(r["margin_lower"] >= -r["slack"] and r["margin_upper"] >= 0 for r in chain))
    members = cl.decom1(cl.dirac_symbol_for(*_SHAPES[fam]))
    spread = 0.0
    for fid, f in fields.items():
        for pp in p["ps"]:
            vals = [sn.m_seminorm(d, f, pp) for d in members]
            s = (max(vals) - min(vals)) / max(vals) if max(vals) > 0 else 0.0
            spread = max(spread, s)
            rows.append({"record": "check", "field_id": fid, "kind": "decom1_spread", "p": pp,
                         "value": s, "margin_upper": p["decom_spread_tol"] - s, "slack": 0.0})
    ok &= _check(rep, "decom1_spread", spread < p["decom_spread_tol"], max_rel_spread=spread)
    if 2.0 in p["ps"] and fam in ("alpha", "beta"):
        dev = 0.0
        for f in fields.values():
            g, d = sn.grad_seminorm(f, 2.0), sn.seminorm("dirac_full", f, 2.0)
            dev = max(dev, abs(g - d) / max(g, 1e-300))
        rep["p2_grad_vs_dirac_max_rel_dev"] = dev
        ok &= _check(rep, "p2_grad_equals_dirac", dev < 1e-12, max_rel_dev=dev)
    rep["fields"] = {fid: fg.fingerprint(f) for fid, f in fields.items()}
    body = [[_num(r.get(k)) if k not in ("record", "field_id", "kind") else str(r.get(k, ""))
             for k in sn._CSV_FIELDS] for r in rows]
    return Outcome(sn._CSV_FIELDS, body, rep, ok)


def _finite(x):
    return x if math.isfinite(x) else None


def cmd_counterexample_sweep(cfg: RunConfig) -> Outcome:
    p = cfg.params
    rep: dict = {"fits": {}, "targets": {"alpha": {"lq_exponent": 2 / 3, "besov_log_power": 1.0},
                                         "beta": {"lq_exponent": 3 / 4, "besov_log_power": 1.0}}}
    ok = True
    rows = []
    for fam in p["families"]:
        b = p["besov"].get(fam)
        grid = {n: b["N"] for n in p["n_list"] if n <= b["n_max"]} if b else None
        res = ce.sweep(fam, p["n_list"], tol=p["tol"])
        if grid:
            for r in res.records:
                if r.n in grid:
                    est = ce.besov_numeric(fam, r.n, grid[r.n], L=ce.besov_box(r.n, p["besov_pad"]),
                                           n_t=p["besov_n_t"])
                    r.besov_numeric = est.value
        for r in res.records:
            bd = r.bounds
            lower = bd.lq_lower if fam == "alpha" else bd.lq_envelope
            checks = {
                "l1_le_intermediate": r.l1_dirac <= bd.l1_intermediate,
                "l1_le_uniform": r.l1_dirac <= bd.l1_uniform,
                "lq_ge_lower": r.lq_norm >= lower,
                "besov_numeric_le_bound": r.besov_numeric is None or r.besov_numeric <= p["besov_factor"] * r.besov_bound,
            }
            for name, good in checks.items():
                ok &= _check(rep, f"{fam}_n{r.n:g}_{name}", good)
            rows.append([fam, _num(r.n), _num(r.l1_dirac), _num(r.l1_rel_change), _num(r.lq_norm),
                         _num(r.lq_rel_change), _num(bd.l1_intermediate), _num(bd.l1_uniform), _num(lower),
                         _num(r.besov_bound), _num(r.besov_numeric)])
        rep["fits"][fam] = {k: {"model": v[0], "params": list(v[1])} for k, v in res.fits.items()}
        if "l1_dirac" in res.fits:
            rep["fits"][fam]["l1_dirac"]["relative_log_slope"] = res.fits["l1_dirac"][2]
    header = ["family", "n", "l1_dirac", "l1_rel_change", "lq_norm", "lq_rel_change", "l1_bound_intermediate",
              "l1_bound_uniform", "lq_lower_bound", "besov_bound", "besov_numeric"]
    return Outcome(header, rows, rep, ok)


def cmd_ratio_sweep(cfg: RunConfig) -> Outcome:
    p = cfg.params
    spec = _grid(*_SHAPES[p["family"]], p["L"], p["N"])
    fields = _ensemble(cfg, spec)
    probes = iq.ratio_sweep(fields, p["p"], p["q"], p["kinds"], weak=p["weak"], n_t=p["n_t"])
    rep: dict = {"empirical_constant": {}}
    ok = True
    for kind in p["kinds"]:
        sel = [pr for _, pr in probes if pr.kind == kind]
        rep["empirical_constant"][kind] = _finite(iq.empirical_constant(sel)) if sel else None
        ok &= _check(rep, f"{kind}_ratios_finite", all(pr.degenerate or math.isfinite(pr.ratio) for pr in sel))
    rep["ensemble"] = {"kind": p["field_kind"], "count": p["count"], "seed": cfg.seed, "N": p["N"], "L": p["L"]}
    return Outcome(iq.PROBE_COLUMNS, iq.probe_rows(probes, p["family"]), rep, ok)


def cmd_lemma41(cfg: RunConfig) -> Outcome:
    p = cfg.params
    spec = _grid(*_SHAPES[p["family"]], p["L"], p["N"])
    f = fg.random_test_fields(cfg.seed, spec, "gaussian_bump", 1, real=True)[0]
    rep: dict = {"field": fg.fingerprint(f)}
    ok = True
    rows = []
    for pp, q, c in p["settings"]:
        r = iq.lemma41_check(f, pp, q, c, n_u=p["n_u"])
        tag = f"p{pp:g}_q{q:g}_c{c:g}"
        ok &= _check(rep, f"{tag}_rel_err", r.rel_err < p["rel_tol"], rel_err=r.rel_err)
        _check(rep, f"{tag}_halves_under_doubling", r.rel_err_refined <= r.rel_err / 2,
               rel_err_refined=r.rel_err_refined)
        rows.append([_num(pp), _num(q), _num(c), str(p["n_u"]), _num(r.lhs), _num(r.rhs), _num(r.rel_err),
                     _num(r.lhs_refined), _num(r.rel_err_refined)])
    header = ["p", "q", "c", "n_u", "lhs", "rhs", "rel_err", "lhs_refined", "rel_err_refined"]
    return Outcome(header, rows, rep, ok)


def cmd_divergence(cfg: RunConfig) -> Outcome:
    p = cfg.params
    rep: dict = {"fits": {}}
    ok = True
    rows = []
    for fam in p["families"]:
        res = iq.divergence_probe(fam, p["n_list"], tol=p["tol"])
        ok &= _check(rep, f"{fam}_dirac_ratio_increasing", res.increasing("dirac"),
                     ratios=res.ratios["dirac"])
        lo, hi = p["exponent_window"][fam]
        gamma = res.exponent("dirac")
        _check(rep, f"{fam}_exponent_in_window", lo <= gamma <= hi, exponent=gamma, window=[lo, hi])
        rep["fits"][fam] = {k: {"exponent": v[0], "prefactor": v[1], "rms": v[2]} for k, v in res.fits.items()}
        rep.setdefault("increasing", {})[fam] = {k: res.increasing(k) for k in res.ratios}
        rows += iq.divergence_rows(res)
    return Outcome(iq.PROBE_COLUMNS, rows, rep, ok)


COMMANDS = {
    "verify-clifford": cmd_verify_clifford,
    "seminorms": cmd_seminorms,
    "counterexample-sweep": cmd_counterexample_sweep,
    "ratio-sweep": cmd_ratio_sweep,
    "lemma41": cmd_lemma41,
    "divergence": cmd_divergence,
}


def run(cfg: RunConfig, out: Path) -> int:
    outcome = COMMANDS[cfg.command](cfg)
    csv_path, json_path = write_outputs(cfg, out, outcome)
    failed = [k for k, v in outcome.report.get("checks", {}).items() if not v["pass"]]
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{cfg.command}: {status} ({len(outcome.rows)} rows) -> {csv_path}, {json_path}")
    for name in failed:
        print(f"  not satisfied: {name}")
    return EXIT_OK if outcome.passed else EXIT_CHECK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diracsobolev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON file with parameter overrides")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--profile", choices=["quick", "full"], default="full")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        overrides = load_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, args.profile, args.seed, overrides)
        return run(cfg, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
