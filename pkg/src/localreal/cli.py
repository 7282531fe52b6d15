"""Scenario-driven experiment runner.

A scenario file is YAML with ``kind``, ``seed``, optional ``output`` stem,
kind-specific ``params``, and optional ``expect`` assertions. Validation runs
before any computation; a run writes CSV tables, a JSON summary, and a figure.
Exit codes: 0 all assertions pass, 1 an assertion fails, 2 parse/validation
error. ``--threads`` only parallelizes chunked sampling and never changes
numeric results.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from . import __version__, context, epr, lhv, sampling, spatial, spin
from .hilbert import Operator
from .report import Check, RunReport, Table, write_report


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


KINDS = (
    "spin-corr",
    "chsh",
    "lhv-verify",
    "epr-construct",
    "epr-sample",
    "spatial-scan",
    "theorem4",
    "context-check",
)

CATALOG = (
    ("singlet-identity", "singlet_identity.yaml",
     "operator-algebra singlet correlation equals the negated inner product on random directions"),
    ("three-point-model", "three_point_model.yaml",
     "three-point hidden-variable model reproduces the inner product; its variables reach sqrt(3), so the unit bound fails"),
    ("bounded-model-sweep", "bounded_model_sweep.yaml",
     "random unit-bounded hidden-variable model stays below the classical CHSH bound at random settings"),
    ("quantum-chsh", "quantum_chsh.yaml",
     "CHSH optimization over the quantum singlet correlation reaches 2*sqrt(2)"),
    ("moment-factorization", "moment_factorization.yaml",
     "cross moments factor into separated processes; rotated and process correlations agree on a grid"),
    ("squeezed-factorization", "squeezed_factorization.yaml",
     "two-mode squeezed-vacuum moments run through the same factorization machinery"),
    ("process-sampling", "process_sampling.yaml",
     "sampled process products converge to the analytic rotated correlation"),
    ("localization-scan", "localization_scan.yaml",
     "joint detection probability and localized correlation decay as one detector region moves away"),
    ("bounded-localized-model", "bounded_localized_model.yaml",
     "unit-bounded three-point model reproduces the localized correlation when g1*g2 <= 1/3"),
    ("commuting-families", "commuting_families.yaml",
     "commuting-family acceptance, a non-commuting pair rejection, and lattice translation covariance"),
)


@dataclass(frozen=True)
class Scenario:
    kind: str
    seed: int
    output: str
    params: dict
    expect: dict

    def echo(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "output": self.output,
            "params": self.params,
            "expect": self.expect,
        }


# ---------------------------------------------------------------------------
# validation helpers

def _fail(path: str, message: str):
    raise ScenarioError(f"{path}: {message}")


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        _fail(path, f"missing required key {key!r}")
    return mapping[key]


def _as_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool):
        _fail(path, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            _fail(path, f"expected a number, got {value!r}")
    _fail(path, f"expected a number, got {type(value).__name__}")


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _as_positive_int(value, path: str) -> int:
    n = _as_int(value, path)
    if n < 1:
        _fail(path, f"expected a positive integer, got {n}")
    return n


def _as_vec3(value, path: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        _fail(path, f"expected a 3-component list, got {value!r}")
    return np.array([_as_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _as_unit(value, path: str) -> np.ndarray:
    v = _as_vec3(value, path)
    try:
        return spin.as_unit_vector(v)
    except ValueError as exc:
        _fail(path, str(exc))


def _as_region(value, path: str) -> spatial.DetectorRegion:
    m = _as_mapping(value, path)
    bounds = []
    for axis in ("x", "y", "z"):
        pair = _require(m, axis, path)
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            _fail(f"{path}.{axis}", f"expected [lo, hi], got {pair!r}")
        bounds.append([_as_number(pair[0], f"{path}.{axis}[0]"), _as_number(pair[1], f"{path}.{axis}[1]")])
    try:
        return spatial.DetectorRegion(np.array(bounds))
    except ValueError as exc:
        _fail(path, str(exc))


def _as_packet(value, path: str) -> spatial.Wavepacket:
    m = _as_mapping(value, path)
    center = _as_vec3(_require(m, "center", path), f"{path}.center")
    sigma = _as_number(_require(m, "sigma", path), f"{path}.sigma")
    try:
        return spatial.Wavepacket(center, sigma)
    except ValueError as exc:
        _fail(path, str(exc))


def _as_distances(value, path: str) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [_as_number(v, f"{path}[{i}]") for i, v in enumerate(value)]
    m = _as_mapping(value, path)
    start = _as_number(_require(m, "start", path), f"{path}.start")
    stop = _as_number(_require(m, "stop", path), f"{path}.stop")
    count = _as_positive_int(_require(m, "count", path), f"{path}.count")
    return [float(x) for x in np.linspace(start, stop, count)]


def _as_moments(value, path: str) -> epr.CrossMoments:
    m = _as_mapping(value, path)
    if "tmsv" in m:
        try:
            return epr.tmsv_moments(_as_number(m["tmsv"], f"{path}.tmsv"))
        except ValueError as exc:
            _fail(f"{path}.tmsv", str(exc))
    return epr.CrossMoments(
        qq=_as_number(_require(m, "qq", path), f"{path}.qq"),
        pq=_as_number(_require(m, "pq", path), f"{path}.pq"),
        qp=_as_number(_require(m, "qp", path), f"{path}.qp"),
        pp=_as_number(_require(m, "pp", path), f"{path}.pp"),
    )


def _validate_model_cfg(value, path: str) -> dict:
    m = _as_mapping(value, path)
    try:
        lhv.model_from_config(m, seed=0)
    except (ValueError, KeyError) as exc:
        _fail(path, f"invalid model: {exc}")
    return m


def _as_settings(value, path: str) -> spin.ChshSettings:
    m = _as_mapping(value, path)
    if "planar_degrees" in m:
        angles = m["planar_degrees"]
        if not isinstance(angles, (list, tuple)) or len(angles) != 4:
            _fail(f"{path}.planar_degrees", "expected four angles in degrees")
        return spin.planar_settings(*(math.radians(_as_number(t, f"{path}.planar_degrees[{i}]"))
                                      for i, t in enumerate(angles)))
    return spin.ChshSettings(
        _as_unit(_require(m, "a", path), f"{path}.a"),
        _as_unit(_require(m, "a_prime", path), f"{path}.a_prime"),
        _as_unit(_require(m, "b", path), f"{path}.b"),
        _as_unit(_require(m, "b_prime", path), f"{path}.b_prime"),
    )


# ---------------------------------------------------------------------------
# scenario loading

def load_scenario(path: Path) -> Scenario:
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    top = _as_mapping(raw, str(path))
    unknown = set(top) - {"kind", "seed", "output", "params", "expect"}
    if unknown:
        _fail(str(path), f"unknown top-level keys: {sorted(unknown)}")
    kind = _require(top, "kind", str(path))
    if kind not in KINDS:
        _fail(str(path), f"unknown kind {kind!r}; expected one of {KINDS}")
    seed = _as_int(_require(top, "seed", str(path)), f"{path}.seed")
    output = top.get("output", path.stem)
    if not isinstance(output, str) or not output:
        _fail(f"{path}.output", "expected a nonempty string")
    params = _as_mapping(top.get("params", {}), f"{path}.params")
    expect = _as_mapping(top.get("expect", {}), f"{path}.expect")
    scenario = Scenario(kind=kind, seed=seed, output=output, params=params, expect=expect)
    _VALIDATORS[kind](scenario)
    return scenario


def _validate_spin_corr(sc: Scenario) -> None:
    p = sc.params
    if ("pairs" in p) == ("n_random" in p):
        _fail("params", "give exactly one of 'pairs' or 'n_random'")
    if "pairs" in p:
        if not isinstance(p["pairs"], list) or not p["pairs"]:
            _fail("params.pairs", "expected a nonempty list of [a, b] pairs")
        for i, pair in enumerate(p["pairs"]):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                _fail(f"params.pairs[{i}]", "expected [a, b]")
            _as_unit(pair[0], f"params.pairs[{i}][0]")
            _as_unit(pair[1], f"params.pairs[{i}][1]")
    else:
        _as_positive_int(p["n_random"], "params.n_random")
    if "identity_atol" in sc.expect:
        _as_number(sc.expect["identity_atol"], "expect.identity_atol")


def _validate_chsh(sc: Scenario) -> None:
    p = sc.params
    corr = _as_mapping(_require(p, "correlation", "params"), "params.correlation")
    source = _require(corr, "source", "params.correlation")
    if source == "model":
        _validate_model_cfg(_require(corr, "model", "params.correlation"), "params.correlation.model")
    elif source == "localized":
        g = _as_number(_require(corr, "g", "params.correlation"), "params.correlation.g")
        if not 0.0 <= g <= 1.0:
            _fail("params.correlation.g", f"localization factor {g} outside [0, 1]")
    elif source != "quantum":
        _fail("params.correlation.source", f"unknown source {source!r}")
    settings = _require(p, "settings", "params")
    if settings != "optimize":
        _as_settings(settings, "params.settings")
    for key in ("value", "atol", "at_most"):
        if key in sc.expect:
            _as_number(sc.expect[key], f"expect.{key}")


def _validate_lhv_verify(sc: Scenario) -> None:
    p = sc.params
    _validate_model_cfg(_require(p, "model", "params"), "params.model")
    settings = _require(p, "settings", "params")
    if isinstance(settings, dict) and "n_random" in settings:
        _as_positive_int(settings["n_random"], "params.settings.n_random")
    elif isinstance(settings, list) and settings:
        for i, s in enumerate(settings):
            _as_settings(s, f"params.settings[{i}]")
    else:
        _fail("params.settings", "expected {n_random: N} or a nonempty list of settings")
    if "correlation_check" in p:
        cc = _as_mapping(p["correlation_check"], "params.correlation_check")
        _as_positive_int(_require(cc, "n_random", "params.correlation_check"), "params.correlation_check.n_random")
        target = cc.get("target", "inner_product")
        if target != "inner_product":
            _fail("params.correlation_check.target", f"unknown target {target!r}")
    if "mc" in p:
        mc = _as_mapping(p["mc"], "params.mc")
        _as_positive_int(_require(mc, "n", "params.mc"), "params.mc.n")
        pairs = _require(mc, "pairs", "params.mc")
        if not isinstance(pairs, list) or not pairs:
            _fail("params.mc.pairs", "expected a nonempty list of [a, b] pairs")
        for i, pair in enumerate(pairs):
            _as_unit(pair[0], f"params.mc.pairs[{i}][0]")
            _as_unit(pair[1], f"params.mc.pairs[{i}][1]")
    if "sup_norm" in sc.expect:
        sn = _as_mapping(sc.expect["sup_norm"], "expect.sup_norm")
        for key in ("xi", "eta"):
            if key in sn:
                _as_number(sn[key], f"expect.sup_norm.{key}")


def _validate_epr_construct(sc: Scenario) -> None:
    _as_moments(_require(sc.params, "moments", "params"), "params.moments")
    if "grid" in sc.params:
        n = _as_positive_int(sc.params["grid"], "params.grid")
        if n < 2:
            _fail("params.grid", "need at least a 2x2 grid")


def _validate_epr_sample(sc: Scenario) -> None:
    p = sc.params
    _as_moments(_require(p, "moments", "params"), "params.moments")
    _as_number(_require(p, "alpha1", "params"), "params.alpha1")
    _as_number(_require(p, "alpha2", "params"), "params.alpha2")
    _as_positive_int(_require(p, "n", "params"), "params.n")
    noise = p.get("noise", "rademacher")
    if noise not in epr.NOISE_KINDS:
        _fail("params.noise", f"expected one of {epr.NOISE_KINDS}, got {noise!r}")


def _validate_spatial_scan(sc: Scenario) -> None:
    p = sc.params
    _as_packet(_require(p, "packet1", "params"), "params.packet1")
    _as_packet(_require(p, "packet2", "params"), "params.packet2")
    region1 = _as_region(_require(p, "region1", "params"), "params.region1")
    if not region1.bounded:
        _fail("params.region1", "the shifted region must be bounded")
    _as_region(_require(p, "region2", "params"), "params.region2")
    direction = _as_vec3(_require(p, "direction", "params"), "params.direction")
    if float(np.linalg.norm(direction)) == 0.0:
        _fail("params.direction", "direction must be nonzero")
    _as_distances(_require(p, "distances", "params"), "params.distances")
    _as_unit(_require(p, "a", "params"), "params.a")
    _as_unit(_require(p, "b", "params"), "params.b")


def _validate_theorem4(sc: Scenario) -> None:
    p = sc.params
    _as_unit(_require(p, "a", "params"), "params.a")
    _as_unit(_require(p, "b", "params"), "params.b")
    if ("cases" in p) == ("spatial" in p):
        _fail("params", "give exactly one of 'cases' or 'spatial'")
    if "cases" in p:
        if not isinstance(p["cases"], list) or not p["cases"]:
            _fail("params.cases", "expected a nonempty list")
        for i, case in enumerate(p["cases"]):
            m = _as_mapping(case, f"params.cases[{i}]")
            for key in ("g1", "g2"):
                g = _as_number(_require(m, key, f"params.cases[{i}]"), f"params.cases[{i}].{key}")
                if not 0.0 <= g <= 1.0:
                    _fail(f"params.cases[{i}].{key}", f"probability {g} outside [0, 1]")
    else:
        s = _as_mapping(p["spatial"], "params.spatial")
        _as_packet(_require(s, "packet1", "params.spatial"), "params.spatial.packet1")
        _as_packet(_require(s, "packet2", "params.spatial"), "params.spatial.packet2")
        region1 = _as_region(_require(s, "region1", "params.spatial"), "params.spatial.region1")
        if not region1.bounded:
            _fail("params.spatial.region1", "the shifted region must be bounded")
        _as_region(_require(s, "region2", "params.spatial"), "params.spatial.region2")
        direction = _as_vec3(_require(s, "direction", "params.spatial"), "params.spatial.direction")
        if float(np.linalg.norm(direction)) == 0.0:
            _fail("params.spatial.direction", "direction must be nonzero")
        _as_distances(_require(s, "distances", "params.spatial"), "params.spatial.distances")


_CONTEXT_FAMILIES = ("pauli-pair", "circulant", "charges", "explicit")


def _validate_context_check(sc: Scenario) -> None:
    families = _require(sc.params, "families", "params")
    if not isinstance(families, list) or not families:
        _fail("params.families", "expected a nonempty list")
    for i, fam in enumerate(families):
        m = _as_mapping(fam, f"params.families[{i}]")
        name = _require(m, "name", f"params.families[{i}]")
        if name not in _CONTEXT_FAMILIES:
            _fail(f"params.families[{i}].name", f"expected one of {_CONTEXT_FAMILIES}, got {name!r}")
        if name == "circulant":
            n = _as_int(_require(m, "sites", f"params.families[{i}]"), f"params.families[{i}].sites")
            if n < 2:
                _fail(f"params.families[{i}].sites", "need at least 2 sites")
        if name == "charges":
            charges = _require(m, "charges", f"params.families[{i}]")
            if not isinstance(charges, list) or not charges:
                _fail(f"params.families[{i}].charges", "expected a nonempty list of integers")
        if name == "explicit":
            mats = _parse_matrices(_require(m, "matrices", f"params.families[{i}]"),
                                   f"params.families[{i}].matrices")
            if len({mat.shape for mat in mats}) != 1:
                _fail(f"params.families[{i}].matrices", "all matrices must share one dimension")
            if not isinstance(m.get("label", "explicit"), str):
                _fail(f"params.families[{i}].label", "expected a string")
        if "expect" in m:
            e = _as_mapping(m["expect"], f"params.families[{i}].expect")
            if "accepted" not in e or not isinstance(e["accepted"], bool):
                _fail(f"params.families[{i}].expect", "needs a boolean 'accepted'")
            for key in ("worst_norm", "atol"):
                if key in e:
                    _as_number(e[key], f"params.families[{i}].expect.{key}")


def _parse_matrices(value, path: str) -> list[np.ndarray]:
    if not isinstance(value, list) or not value:
        _fail(path, "expected a nonempty list of matrices")
    out = []
    for k, mat in enumerate(value):
        if not isinstance(mat, list) or not mat:
            _fail(f"{path}[{k}]", "expected a matrix as a list of rows")
        rows = []
        for r, row in enumerate(mat):
            if not isinstance(row, list):
                _fail(f"{path}[{k}][{r}]", "expected a list of entries")
            entries = []
            for c, entry in enumerate(row):
                where = f"{path}[{k}][{r}][{c}]"
                if isinstance(entry, (list, tuple)):
                    if len(entry) != 2:
                        _fail(where, "complex entries are [re, im]")
                    entries.append(complex(_as_number(entry[0], where), _as_number(entry[1], where)))
                else:
                    entries.append(complex(_as_number(entry, where), 0.0))
            rows.append(entries)
        m = np.array(rows, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            _fail(f"{path}[{k}]", f"matrix must be square, got shape {m.shape}")
        out.append(m)
    return out


_VALIDATORS: dict[str, Callable[[Scenario], None]] = {
    "spin-corr": _validate_spin_corr,
    "chsh": _validate_chsh,
    "lhv-verify": _validate_lhv_verify,
    "epr-construct": _validate_epr_construct,
    "epr-sample": _validate_epr_sample,
    "spatial-scan": _validate_spatial_scan,
    "theorem4": _validate_theorem4,
    "context-check": _validate_context_check,
}


# ---------------------------------------------------------------------------
# runners

def _correlation_from_config(cfg: dict, seed: int) -> spin.Correlation:
    source = cfg["source"]
    if source == "quantum":
        return spin.spin_correlation
    if source == "localized":
        g = float(cfg["g"])
        return lambda a, b: spatial.localized_correlation(g, a, b)
    model = lhv.model_from_config(cfg["model"], seed=seed)
    return lambda a, b: lhv.model_correlation(model, a, b)


def _random_settings(rng: np.random.Generator) -> spin.ChshSettings:
    return spin.ChshSettings(*(sampling.random_unit_vector(rng) for _ in range(4)))


def _run_spin_corr(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    atol = float(sc.expect.get("identity_atol", 1e-12))
    if "pairs" in sc.params:
        pairs = [(spin.as_unit_vector(a), spin.as_unit_vector(b)) for a, b in sc.params["pairs"]]
    else:
        rng = sampling.generator(sc.seed, 0)
        pairs = [(sampling.random_unit_vector(rng), sampling.random_unit_vector(rng))
                 for _ in range(int(sc.params["n_random"]))]
    rows = []
    worst = 0.0
    for a, b in pairs:
        value = spin.spin_correlation(a, b)
        inner = float(np.dot(a, b))
        diff = abs(value + inner)
        worst = max(worst, diff)
        rows.append((a[0], a[1], a[2], b[0], b[1], b[2], value, inner, diff))
    report.tables["main"] = Table(
        ("ax", "ay", "az", "bx", "by", "bz", "quantum", "inner_product", "difference"), rows
    )
    report.results = {"n_pairs": len(pairs), "max_difference": worst}
    report.checks.append(Check(
        "correlation equals negated inner product",
        worst <= atol,
        f"max |corr + a.b| = {worst:.3e} (atol {atol:.1e})",
    ))
    return report


def _run_chsh(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    corr = _correlation_from_config(sc.params["correlation"], sc.seed)
    if sc.params["settings"] == "optimize":
        settings, value = spin.chsh_optimize(corr)
    else:
        settings = _as_settings(sc.params["settings"], "params.settings")
        value = spin.chsh_value(corr, settings)
    parts = (
        corr(settings.a, settings.b),
        corr(settings.a, settings.b_prime),
        corr(settings.a_prime, settings.b),
        corr(settings.a_prime, settings.b_prime),
    )
    report.tables["main"] = Table(
        ("corr_ab", "corr_ab_prime", "corr_a_prime_b", "corr_a_prime_b_prime", "value"),
        [(*parts, value)],
    )
    report.results = {
        "value": value,
        "settings": {
            "a": settings.a.tolist(),
            "a_prime": settings.a_prime.tolist(),
            "b": settings.b.tolist(),
            "b_prime": settings.b_prime.tolist(),
        },
    }
    if "value" in sc.expect:
        target = float(sc.expect["value"])
        atol = float(sc.expect.get("atol", 1e-9))
        report.checks.append(Check(
            "value matches expectation",
            abs(value - target) <= atol,
            f"value {value!r}, target {target!r}, atol {atol:.1e}",
        ))
    if "at_most" in sc.expect:
        cap = float(sc.expect["at_most"])
        report.checks.append(Check(
            "value within cap", value <= cap, f"value {value!r} vs cap {cap!r}"
        ))
    return report


def _run_lhv_verify(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    model = lhv.model_from_config(sc.params["model"], seed=sc.seed)
    settings_cfg = sc.params["settings"]
    if isinstance(settings_cfg, dict):
        rng = sampling.generator(sc.seed, 0)
        all_settings = [_random_settings(rng) for _ in range(int(settings_cfg["n_random"]))]
    else:
        all_settings = [_as_settings(s, "params.settings") for s in settings_cfg]
    rows = []
    bound_violated = 0
    for i, s in enumerate(all_settings):
        check = lhv.chsh_bound_check(model, s)
        if check.applicable and not check.satisfied:
            bound_violated += 1
        rows.append((i, check.value, check.sup_norm_product, check.applicable,
                     "" if check.satisfied is None else check.satisfied))
    report.tables["main"] = Table(
        ("index", "chsh", "sup_norm_product", "applicable", "satisfied"), rows
    )
    applicable = bool(rows) and bool(rows[0][3])
    report.results = {
        "n_settings": len(all_settings),
        "sup_norm_product": float(model.sup_norm_xi * model.sup_norm_eta),
        "max_chsh": max(r[1] for r in rows),
        "bound_applicable": applicable,
    }
    if applicable:
        report.checks.append(Check(
            "classical bound holds at every settings tuple",
            bound_violated == 0,
            f"{bound_violated} of {len(rows)} tuples exceeded 2 + 1e-12",
        ))

    if "correlation_check" in sc.params:
        cc = sc.params["correlation_check"]
        rng = sampling.generator(sc.seed, 1)
        worst = 0.0
        cc_rows = []
        for i in range(int(cc["n_random"])):
            a = sampling.random_unit_vector(rng)
            b = sampling.random_unit_vector(rng)
            value = lhv.model_correlation(model, a, b)
            inner = float(np.dot(a, b))
            diff = abs(value - inner)
            worst = max(worst, diff)
            cc_rows.append((a[0], a[1], a[2], b[0], b[1], b[2], value, inner, diff))
        atol = float(cc.get("atol", 1e-14))
        report.tables["correlation"] = Table(
            ("ax", "ay", "az", "bx", "by", "bz", "model", "inner_product", "difference"), cc_rows
        )
        report.results["max_correlation_difference"] = worst
        report.checks.append(Check(
            "model correlation equals the inner product",
            worst <= atol,
            f"max |corr - a.b| = {worst:.3e} (atol {atol:.1e})",
        ))

    if "sup_norm" in sc.expect:
        sn = sc.expect["sup_norm"]
        atol = float(sn.get("atol", 1e-15))
        probes = [np.eye(3)[k] for k in range(3)]
        probes += [s.a for s in all_settings] + [s.a_prime for s in all_settings]
        measured_xi = max(float(np.max(np.abs(model.xi_row(v)))) for v in probes)
        probes_b = [np.eye(3)[k] for k in range(3)]
        probes_b += [s.b for s in all_settings] + [s.b_prime for s in all_settings]
        measured_eta = max(float(np.max(np.abs(model.eta_row(v)))) for v in probes_b)
        report.results["measured_sup_norm_xi"] = measured_xi
        report.results["measured_sup_norm_eta"] = measured_eta
        if "xi" in sn:
            report.checks.append(Check(
                "measured xi sup-norm",
                abs(measured_xi - float(sn["xi"])) <= atol,
                f"measured {measured_xi!r}, expected {float(sn['xi'])!r} (atol {atol:.1e})",
            ))
        if "eta" in sn:
            report.checks.append(Check(
                "measured eta sup-norm",
                abs(measured_eta - float(sn["eta"])) <= atol,
                f"measured {measured_eta!r}, expected {float(sn['eta'])!r} (atol {atol:.1e})",
            ))

    if "mc" in sc.params:
        mc = sc.params["mc"]
        max_sigma = float(mc.get("max_sigma", 5.0))
        mc_rows = []
        all_ok = True
        for i, (a, b) in enumerate(mc["pairs"]):
            a = spin.as_unit_vector(a)
            b = spin.as_unit_vector(b)
            exact = lhv.model_correlation(model, a, b)
            est = lhv.mc_correlation(model, a, b, int(mc["n"]), sc.seed + i, threads=threads)
            err = abs(est.mean - exact)
            ok = err <= max_sigma * est.std_error or err <= 1e-15
            all_ok = all_ok and ok
            mc_rows.append((i, exact, est.mean, est.std_error, est.n_samples, est.seed, err, ok))
        report.tables["mc"] = Table(
            ("index", "exact", "mean", "std_error", "n", "seed", "abs_error", "within"), mc_rows
        )
        report.checks.append(Check(
            f"sampled means within {max_sigma:g} standard errors",
            all_ok,
            f"{sum(1 for r in mc_rows if r[-1])} of {len(mc_rows)} pairs in range",
        ))
    return report


def _run_epr_construct(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    moments = _as_moments(sc.params["moments"], "params.moments")
    grid = int(sc.params.get("grid", 20))
    pair = epr.process_pair_identity(moments)
    identity_residual = epr.verify_moments(pair, moments)
    triangular_residual = None
    triangular_agreement = None
    try:
        tri = epr.process_pair_triangular(moments)
        triangular_residual = epr.verify_moments(tri, moments)
    except epr.DegenerateMomentError:
        tri = None
    angles = [2.0 * math.pi * k / grid for k in range(grid)]
    rows = []
    worst = 0.0
    worst_tri = 0.0
    for a1 in angles:
        for a2 in angles:
            rot = epr.rotated_correlation(moments, a1, a2)
            proc = epr.process_correlation(pair, a1, a2)
            diff = abs(proc - rot)
            worst = max(worst, diff)
            if tri is not None:
                worst_tri = max(worst_tri, abs(epr.process_correlation(tri, a1, a2) - rot))
            rows.append((a1, a2, rot, proc, diff))
    if tri is not None:
        triangular_agreement = worst_tri
    report.tables["main"] = Table(("alpha1", "alpha2", "rotated", "process", "difference"), rows)
    report.results = {
        "moments": {"qq": moments.qq, "pq": moments.pq, "qp": moments.qp, "pp": moments.pp},
        "identity_residual": identity_residual,
        "triangular_residual": triangular_residual,
        "grid_max_difference": worst,
        "triangular_grid_max_difference": triangular_agreement,
        "f_coeffs": pair.f_coeffs.tolist(),
        "g_coeffs": pair.g_coeffs.tolist(),
    }
    report.checks.append(Check(
        "identity construction reproduces the moments exactly",
        identity_residual == 0.0,
        f"residual {identity_residual!r}",
    ))
    if triangular_residual is not None:
        report.checks.append(Check(
            "triangular construction reproduces the moments",
            triangular_residual <= 1e-12,
            f"residual {triangular_residual:.3e}",
        ))
        report.checks.append(Check(
            "triangular and rotated correlations agree on the grid",
            triangular_agreement <= 1e-12,
            f"max difference {triangular_agreement:.3e}",
        ))
    report.checks.append(Check(
        "process correlation equals rotated correlation on the grid",
        worst <= 1e-12,
        f"max difference {worst:.3e} over {grid}x{grid} angles",
    ))
    return report


def _run_epr_sample(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    moments = _as_moments(sc.params["moments"], "params.moments")
    a1 = float(sc.params["alpha1"])
    a2 = float(sc.params["alpha2"])
    noise = sc.params.get("noise", "rademacher")
    n = int(sc.params["n"])
    max_sigma = float(sc.expect.get("max_sigma", 4.0))
    pair = epr.process_pair_identity(moments)
    analytic = epr.process_correlation(pair, a1, a2)
    est = epr.sample_processes(pair, a1, a2, n=n, seed=sc.seed, dist=noise, threads=threads)
    err = abs(est.mean - analytic)
    sigmas = err / est.std_error if est.std_error > 0 else 0.0
    report.tables["main"] = Table(
        ("analytic", "mean", "std_error", "n", "seed", "abs_error", "sigmas"),
        [(analytic, est.mean, est.std_error, est.n_samples, est.seed, err, sigmas)],
    )
    report.results = {"analytic": analytic, "mean": est.mean, "std_error": est.std_error}
    ok = err <= max_sigma * est.std_error or err <= 1e-15
    report.checks.append(Check(
        f"sampled mean within {max_sigma:g} standard errors",
        ok,
        f"error {err:.3e} vs {max_sigma:g} * {est.std_error:.3e}",
    ))
    return report


def _run_spatial_scan(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    p = sc.params
    p1 = _as_packet(p["packet1"], "params.packet1")
    p2 = _as_packet(p["packet2"], "params.packet2")
    o1 = _as_region(p["region1"], "params.region1")
    o2 = _as_region(p["region2"], "params.region2")
    direction = spin.normalized(_as_vec3(p["direction"], "params.direction"))
    distances = _as_distances(p["distances"], "params.distances")
    a = spin.as_unit_vector(_as_vec3(p["a"], "params.a"))
    b = spin.as_unit_vector(_as_vec3(p["b"], "params.b"))
    shifts = [d * direction for d in distances]
    points = spatial.disentanglement_scan(p1, p2, o1, o2, shifts, a, b)
    rows = [(pt.distance, pt.g, pt.omega, pt.residual, pt.chsh) for pt in points]
    report.tables["main"] = Table(("distance", "g", "omega", "residual", "chsh"), rows)
    gs = [pt.g for pt in points]
    inner = abs(float(np.dot(a, b)))
    residual_atol = float(sc.expect.get("residual_atol", 1e-12))
    worst_identity = max(abs(pt.residual - pt.g * inner) for pt in points)
    report.results = {
        "n_shifts": len(points),
        "final_g": gs[-1],
        "max_g": max(gs),
        "max_residual_identity_error": worst_identity,
    }
    report.checks.append(Check(
        "localization factor stays within [0, 1]",
        all(0.0 <= g <= 1.0 for g in gs),
        f"range [{min(gs):.3e}, {max(gs):.3e}]",
    ))
    report.checks.append(Check(
        "factorization residual equals g * |a.b|",
        worst_identity <= residual_atol,
        f"max deviation {worst_identity:.3e} (atol {residual_atol:.1e})",
    ))
    if "final_g_below" in sc.expect:
        cap = float(sc.expect["final_g_below"])
        report.checks.append(Check(
            "joint probability decays below the cap",
            gs[-1] < cap and points[-1].residual < cap,
            f"final g {gs[-1]:.3e}, final residual {points[-1].residual:.3e}, cap {cap:.1e}",
        ))
    if "monotone_after" in sc.expect:
        start = float(sc.expect["monotone_after"])
        tail = [pt.g for pt in points if pt.distance >= start]
        ok = all(tail[i + 1] <= tail[i] for i in range(len(tail) - 1))
        report.checks.append(Check(
            "g is non-increasing beyond the overlap point",
            ok,
            f"{len(tail)} tail points from distance {start:g}",
        ))
    return report


def _run_theorem4(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    p = sc.params
    a = spin.as_unit_vector(_as_vec3(p["a"], "params.a"))
    b = spin.as_unit_vector(_as_vec3(p["b"], "params.b"))
    if "cases" in p:
        cases = [(float(c["g1"]), float(c["g2"])) for c in p["cases"]]
    else:
        s = p["spatial"]
        p1 = _as_packet(s["packet1"], "params.spatial.packet1")
        p2 = _as_packet(s["packet2"], "params.spatial.packet2")
        o1 = _as_region(s["region1"], "params.spatial.region1")
        o2 = _as_region(s["region2"], "params.spatial.region2")
        direction = spin.normalized(_as_vec3(s["direction"], "params.spatial.direction"))
        g2 = spatial.region_probability(p2, o2)
        cases = [
            (spatial.region_probability(p1, o1.shifted(d * direction)), g2)
            for d in _as_distances(s["distances"], "params.spatial.distances")
        ]
    atol = float(sc.expect.get("exactness_atol", 1e-14))
    rows = []
    worst = 0.0
    bounded_ok = True
    for g1, g2 in cases:
        model, cert = spatial.bounded_localized_model(a, b, g1, g2)
        model_value = lhv.model_correlation(model, a, b)
        localized = spatial.localized_correlation(g1 * g2, a, b)
        diff = abs(model_value - localized)
        worst = max(worst, diff)
        if cert.product_ok and (cert.sup_norm_xi > 1.0 or cert.sup_norm_eta > 1.0):
            bounded_ok = False
        rows.append((g1, g2, g1 * g2, model_value, localized, diff,
                     cert.product_ok, cert.sup_norm_xi, cert.sup_norm_eta))
    report.tables["main"] = Table(
        ("g1", "g2", "product", "model_value", "localized_value", "difference",
         "product_ok", "sup_norm_xi", "sup_norm_eta"),
        rows,
    )
    n_bounded = sum(1 for r in rows if r[6])
    report.results = {
        "n_cases": len(rows),
        "n_bounded": n_bounded,
        "max_difference": worst,
    }
    report.checks.append(Check(
        "model expectation reproduces the localized correlation",
        worst <= atol,
        f"max |model - localized| = {worst:.3e} (atol {atol:.1e})",
    ))
    report.checks.append(Check(
        "bounded certificates keep both sup-norms within 1",
        bounded_ok,
        f"{n_bounded} of {len(rows)} cases in the bounded regime",
    ))
    return report


def _context_family(fam: dict) -> tuple[str, list, float, float | str]:
    """Build (label, operators, tolerance, covariance residual or '') for one family."""
    name = fam["name"]
    tol = context.DEFAULT_TOLERANCE
    covariance = ""
    if name == "pauli-pair":
        ops = [spin.pauli_dot([1.0, 0.0, 0.0]), spin.pauli_dot([0.0, 0.0, 1.0])]
        label = "pauli-pair"
    elif name == "circulant":
        n = int(fam["sites"])
        ops = list(context.translation_context(n).operators)
        label = f"circulant-{n}"
        ts = context.translation_system(n)
        worst = 0.0
        subsets = [[s] for s in range(n)]
        subsets += [[(start + k) % n for k in range(length)]
                    for start in range(n) for length in range(2, n + 1)]
        for subset in subsets:
            for d in range(n):
                worst = max(worst, context.covariance_check(ts, subset, d))
        covariance = worst
    elif name == "charges":
        charges = [int(c) for c in fam["charges"]]
        ops = list(context.internal_symmetry_context(charges).operators)
        label = "charges-" + ",".join(str(c) for c in charges)
    else:
        ops = [Operator(m) for m in _parse_matrices(fam["matrices"], "params.families.matrices")]
        label = fam.get("label", "explicit")
    return label, ops, tol, covariance


def _run_context_check(sc: Scenario, threads: int) -> RunReport:
    report = RunReport(scenario=sc.echo(), version=__version__)
    rows = []
    all_ok = True
    for fam in sc.params["families"]:
        label, ops, tol, covariance = _context_family(fam)
        (wi, wj), worst = context.worst_commutator(ops)
        try:
            context.make_context(ops, tol)
            accepted = True
        except (context.NonCommutingError, context.NonHermitianError):
            accepted = False
        rows.append((label, ops[0].dim, len(ops), accepted, worst, wi, wj, tol, covariance))
        expect = fam.get("expect")
        if expect is not None:
            ok = accepted == bool(expect["accepted"])
            detail = f"{label}: accepted={accepted}, expected {expect['accepted']}"
            if "worst_norm" in expect:
                atol = float(expect.get("atol", 1e-12))
                norm_ok = abs(worst - float(expect["worst_norm"])) <= atol
                ok = ok and norm_ok
                detail += f"; worst norm {worst!r} vs {float(expect['worst_norm'])!r} (atol {atol:.1e})"
            all_ok = all_ok and ok
            report.checks.append(Check(f"family verdict: {label}", ok, detail))
        if covariance != "":
            ok = covariance <= 1e-12
            all_ok = all_ok and ok
            report.checks.append(Check(
                f"translation covariance: {label}",
                ok,
                f"max residual {covariance:.3e} over all subsets and shifts",
            ))
    report.tables["main"] = Table(
        ("family", "dim", "n_ops", "accepted", "worst_norm", "worst_i", "worst_j",
         "tolerance", "covariance_residual"),
        rows,
    )
    report.results = {"n_families": len(rows), "all_expectations_met": all_ok}
    return report


_RUNNERS: dict[str, Callable[[Scenario, int], RunReport]] = {
    "spin-corr": _run_spin_corr,
    "chsh": _run_chsh,
    "lhv-verify": _run_lhv_verify,
    "epr-construct": _run_epr_construct,
    "epr-sample": _run_epr_sample,
    "spatial-scan": _run_spatial_scan,
    "theorem4": _run_theorem4,
    "context-check": _run_context_check,
}


# ---------------------------------------------------------------------------
# entry points

def bundled_scenarios() -> list[tuple[str, str, Path]]:
    """(name, description, path) for every bundled scenario."""
    base = resources.files("localreal") / "scenarios"
    return [(name, description, Path(str(base / filename)))
            for name, filename, description in CATALOG]


def resolve_scenario_path(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    for name, _description, bundled in bundled_scenarios():
        if ref == name:
            return bundled
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def run_scenario(
    scenario: Scenario,
    out_dir: Path,
    threads: int = 1,
    plots: bool = True,
) -> RunReport:
    start = time.perf_counter()
    report = _RUNNERS[scenario.kind](scenario, threads)
    report.wall_clock_s = time.perf_counter() - start
    write_report(report, out_dir, scenario.output, plots=plots)
    return report


def run_file(
    ref: str,
    seed: int | None = None,
    out_dir: Path | None = None,
    threads: int = 1,
    plots: bool = True,
) -> RunReport:
    scenario = load_scenario(resolve_scenario_path(ref))
    if seed is not None:
        scenario = Scenario(scenario.kind, int(seed), scenario.output, scenario.params, scenario.expect)
    return run_scenario(scenario, out_dir or Path.cwd(), threads=threads, plots=plots)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="localreal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    run_p.add_argument("scenario", help="path to a YAML scenario, or a bundled scenario name")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--out-dir", type=Path, default=Path.cwd(), help="output directory")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker threads for chunked sampling (never changes results)")
    run_p.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    sub.add_parser("list", help="list bundled scenarios")
    sub.add_parser("version", help="print the tool version")

    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "list":
        for name, description, path in bundled_scenarios():
            kind = yaml.safe_load(path.read_text())["kind"]
            print(f"{name:24s} [{kind}] {description}")
        return 0

    try:
        report = run_file(
            args.scenario,
            seed=args.seed,
            out_dir=args.out_dir,
            threads=max(1, args.threads),
            plots=not args.no_plots,
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for check in report.checks:
        marker = "PASS" if check.passed else "FAIL"
        print(f"[{marker}] {check.name}: {check.detail}")
    print(f"wrote outputs for {report.scenario['output']!r} "
          f"({report.wall_clock_s:.2f} s, version {report.version})")
    return 0 if report.passed else 1


def entry() -> None:
    raise SystemExit(main())
