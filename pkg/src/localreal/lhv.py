"""Finite hidden-variable models: exact expectations, Monte Carlo, and bound checks.

A model is a finite probability space plus two setting-indexed families of real
variables. Correlations are exact finite sums; the Monte Carlo path exists to
demonstrate that sampled estimates converge to them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import sampling
from .spin import ChshSettings, as_unit_vector, chsh_value

WEIGHT_ATOL = 1e-14
CHSH_BOUND_ATOL = 1e-12

RowFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LhvModel:
    """Finite probability space with setting-indexed variables.

    ``xi_row(a)`` and ``eta_row(b)`` return the variable values over all points
    for one setting; ``sup_norm_xi`` / ``sup_norm_eta`` are the declared bounds
    over all settings and points.
    """

    points: tuple
    weights: np.ndarray
    xi_row: RowFn
    eta_row: RowFn
    sup_norm_xi: float
    sup_norm_eta: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != len(self.points):
            raise ValueError("weights must align with the hidden-variable points")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_ATOL:
            raise ValueError(f"weights sum to {float(np.sum(w))!r}, not 1 within {WEIGHT_ATOL}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def xi(self, a, lam: int) -> float:
        return float(self.xi_row(as_unit_vector(a))[lam])

    def eta(self, b, lam: int) -> float:
        return float(self.eta_row(as_unit_vector(b))[lam])


@dataclass(frozen=True)
class McEstimate:
    """Seeded Monte Carlo estimate; identical (seed, n) reproduce it bit for bit."""

    mean: float
    std_error: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of the classical-bound test at one settings tuple.

    ``applicable`` is False when the declared sup-norm product exceeds 1, in
    which case the bound simply does not apply and ``satisfied`` is None.
    """

    value: float
    sup_norm_product: float
    applicable: bool
    satisfied: bool | None


_SQRT3 = math.sqrt(3.0)


def sqrt3_model() -> LhvModel:
    """Three-point model whose variables are the sqrt(3)-scaled components.

    Reproduces the inner product a.b exactly; its variables reach sqrt(3), so
    the unit-bound hypothesis of the classical CHSH bound fails for it.
    """

    def row(v: np.ndarray) -> np.ndarray:
        return _SQRT3 * as_unit_vector(v)

    return LhvModel(
        points=(1, 2, 3),
        weights=np.full(3, 1.0 / 3.0),
        xi_row=row,
        eta_row=row,
        sup_norm_xi=_SQRT3,
        sup_norm_eta=_SQRT3,
    )


def random_model(seed: int, n_points: int | None = None) -> LhvModel:
    """Random model with |xi|, |eta| <= 1 for bound-check sweeps.

    Values at a setting come from a keyed hash of the setting vector, so each
    model is a fixed measurable family over all unit vectors, reproducible
    from its seed alone.
    """
    rng = sampling.generator(seed, 0)
    k = int(n_points) if n_points is not None else int(rng.integers(2, 17))
    if k < 1:
        raise ValueError("need at least one hidden-variable point")
    w = rng.dirichlet(np.ones(k))
    w = w / w.sum()

    def make_row(role: int) -> RowFn:
        cache: dict[bytes, np.ndarray] = {}

        def row(v: np.ndarray) -> np.ndarray:
            key = as_unit_vector(v).tobytes()
            values = cache.get(key)
            if values is None:
                values = 2.0 * sampling.keyed_uniform(k, seed, role, key) - 1.0
                values.setflags(write=False)
                cache[key] = values
            return values

        return row

    return LhvModel(tuple(range(k)), w, make_row(0), make_row(1), 1.0, 1.0)


def tabulated_model(
    points: Sequence,
    weights: Sequence[float],
    settings_a: Sequence,
    xi_table: Sequence[Sequence[float]],
    settings_b: Sequence,
    eta_table: Sequence[Sequence[float]],
    sup_norm_xi: float | None = None,
    sup_norm_eta: float | None = None,
) -> LhvModel:
    """Model with explicitly tabulated variable values at named settings.

    Lookup matches a queried vector against the declared settings within
    1e-12; anything else raises KeyError.
    """
    def make_row(declared: Sequence, table: Sequence[Sequence[float]]) -> RowFn:
        vecs = [as_unit_vector(v) for v in declared]
        rows = [np.array(r, dtype=float) for r in table]
        if len(vecs) != len(rows):
            raise ValueError("one table row per declared setting")
        for r in rows:
            if len(r) != len(points):
                raise ValueError("table rows must cover every point")
            r.setflags(write=False)

        def row(v: np.ndarray) -> np.ndarray:
            u = as_unit_vector(v)
            for decl, values in zip(vecs, rows):
                if float(np.max(np.abs(u - decl))) <= 1e-12:
                    return values
            raise KeyError(f"setting {u.tolist()} is not tabulated")

        return row

    xi = make_row(settings_a, xi_table)
    eta = make_row(settings_b, eta_table)
    if sup_norm_xi is None:
        sup_norm_xi = max((float(np.max(np.abs(np.asarray(r, float)))) for r in xi_table), default=0.0)
    if sup_norm_eta is None:
        sup_norm_eta = max((float(np.max(np.abs(np.asarray(r, float)))) for r in eta_table), default=0.0)
    return LhvModel(tuple(points), np.asarray(weights, float), xi, eta, float(sup_norm_xi), float(sup_norm_eta))


def tabulate_model(m: LhvModel, settings_a: Sequence, settings_b: Sequence) -> dict:
    """Declarative snapshot of ``m`` at the given settings (CLI replay format)."""
    return {
        "points": list(m.points),
        "weights": [float(w) for w in m.weights],
        "settings_a": [list(map(float, as_unit_vector(v))) for v in settings_a],
        "xi": [[float(x) for x in m.xi_row(as_unit_vector(v))] for v in settings_a],
        "settings_b": [list(map(float, as_unit_vector(v))) for v in settings_b],
        "eta": [[float(x) for x in m.eta_row(as_unit_vector(v))] for v in settings_b],
        "sup_norm_xi": float(m.sup_norm_xi),
        "sup_norm_eta": float(m.sup_norm_eta),
    }


def model_from_config(cfg: dict, seed: int = 0) -> LhvModel:
    """Build a model from its declarative form: a named family or a table."""
    if "family" in cfg:
        family = cfg["family"]
        if family == "sqrt3":
            return sqrt3_model()
        if family == "random":
            return random_model(int(cfg.get("model_seed", seed)), cfg.get("points"))
        raise ValueError(f"unknown model family {family!r}")
    required = {"points", "weights", "settings_a", "xi", "settings_b", "eta"}
    missing = required - set(cfg)
    if missing:
        raise ValueError(f"tabulated model is missing keys: {sorted(missing)}")
    return tabulated_model(
        cfg["points"],
        cfg["weights"],
        cfg["settings_a"],
        cfg["xi"],
        cfg["settings_b"],
        cfg["eta"],
        cfg.get("sup_norm_xi"),
        cfg.get("sup_norm_eta"),
    )


def model_correlation(m: LhvModel, a, b) -> float:
    """Exact finite sum of weight * xi(a) * eta(b) over the hidden variable."""
    xa = m.xi_row(as_unit_vector(a))
    yb = m.eta_row(as_unit_vector(b))
    return float(np.dot(m.weights, xa * yb))


def mc_correlation(m: LhvModel, a, b, n: int, seed: int, threads: int = 1) -> McEstimate:
    """Sample the hidden variable i.i.d. from the weights and average xi*eta."""
    if n < 1:
        raise ValueError("need at least one sample")
    xa = m.xi_row(as_unit_vector(a))
    yb = m.eta_row(as_unit_vector(b))
    cum = np.cumsum(m.weights)
    top = len(cum) - 1

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        u = rng.random(count)
        idx = np.minimum(np.searchsorted(cum, u, side="right"), top)
        return xa[idx] * yb[idx]

    mean, std_error = sampling.chunked_mean(chunk, n, seed, threads)
    return McEstimate(mean, std_error, n, seed)


def chsh_bound_check(m: LhvModel, s: ChshSettings) -> BoundCheck:
    """Exact CHSH value of the model at ``s``, judged against the classical bound.

    The bound only applies when the declared sup-norm product is at most 1;
    otherwise the check reports not-applicable rather than failure.
    """
    value = chsh_value(lambda a, b: model_correlation(m, a, b), s)
    product = float(m.sup_norm_xi * m.sup_norm_eta)
    applicable = product <= 1.0
    satisfied = (value <= 2.0 + CHSH_BOUND_ATOL) if applicable else None
    return BoundCheck(value=value, sup_norm_product=product, applicable=applicable, satisfied=satisfied)
