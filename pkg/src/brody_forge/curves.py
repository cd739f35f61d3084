"""The non-Brody curve and its derivative-length diagnostics.

For the punctured variant the curve is ``F(z) = (e^z, f(g(e^z)))`` in
``C* x X``; the plane variant uses ``F(z) = (z, f(g(z)))`` in ``C x X``. The
derivatives ``k_j = g'(alpha_j)`` are scheduled so that the speed of ``F`` at
the node preimages grows at least linearly in ``j``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ResidualError
from .geometry import MetricSpec
from .interpolation import (
    HermiteInterpolant,
    InterpolationTargets,
    build_interpolant,
    eval_g,
    eval_g_deriv,
    residual_report,
)
from .products import NodeSystem, _complex_from_json, _complex_to_json, validate_nodes

__all__ = [
    "InnerCurve",
    "CurveSpec",
    "BlowupRow",
    "schedule_kj",
    "schedule_terms",
    "build_curve",
    "eval_F",
    "eval_F_tangent",
    "eval_F_deriv_length",
    "blowup_table",
    "first_crossing",
    "blowup_to_csv",
]

VARIANTS = ("punctured", "plane")


@dataclass(frozen=True)
class InnerCurve:
    """Entire curve ``f: C -> X`` with nowhere-vanishing derivative.

    ``exp_to_cstar`` and ``identity_to_c`` land in one-dimensional ``X``;
    ``diagonal_to_cn`` maps ``w`` to ``(w, ..., w)`` in ``C^{n-1}``.
    """

    kind: str
    n: int = 2

    def __post_init__(self):
        if self.kind not in ("exp_to_cstar", "identity_to_c", "diagonal_to_cn"):
            raise ValueError(f"unknown inner curve {self.kind!r}")
        if self.kind == "diagonal_to_cn" and self.n < 2:
            raise ValueError("diagonal_to_cn needs n >= 2")

    @property
    def target_dim(self) -> int:
        return self.n - 1 if self.kind == "diagonal_to_cn" else 1

    def f(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "exp_to_cstar":
            with np.errstate(over="ignore"):
                out = np.exp(w)[..., None]
        elif self.kind == "identity_to_c":
            out = w[..., None]
        else:
            out = np.repeat(w[..., None], self.target_dim, axis=-1)
        return out

    def fprime(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "exp_to_cstar":
            with np.errstate(over="ignore"):
                return np.exp(w)[..., None]
        return np.ones(w.shape + (self.target_dim,), dtype=complex)

    def to_json(self):
        if self.kind == "diagonal_to_cn":
            return {"kind": self.kind, "n": self.n}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, obj) -> "InnerCurve":
        if isinstance(obj, str):
            return cls(obj)
        extra = set(obj) - {"kind", "n"}
        if extra:
            raise ConfigError(f"unknown key(s): {', '.join(sorted(extra))}")
        return cls(obj["kind"], int(obj.get("n", 2)))


@dataclass(frozen=True)
class CurveSpec:
    variant: str
    inner: InnerCurve
    metric: MetricSpec
    nodes: NodeSystem
    p_targets: tuple
    k_targets: tuple
    interpolant: HermiteInterpolant
    e1: tuple
    e2: tuple

    @property
    def q(self) -> np.ndarray:
        """Parameter points hitting the nodes: ``Log alpha_j`` or ``alpha_j``."""
        if self.variant == "punctured":
            return np.log(self.nodes.alpha)
        return self.nodes.alpha.copy()

    def g(self, w):
        return eval_g(self.interpolant, w)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "inner": self.inner.to_json(),
            "metric": self.metric.to_json(),
            "nodes": self.nodes.to_json(),
            "p_targets": [_complex_to_json(p) for p in self.p_targets],
            "k_targets": [_complex_to_json(k) for k in self.k_targets],
            "e1": list(self.e1),
            "e2": list(self.e2),
            "interpolant": self.interpolant.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "CurveSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            obj["variant"],
            InnerCurve.from_json(obj["inner"]),
            MetricSpec.from_json(obj["metric"]),
            NodeSystem.from_json(obj["nodes"]),
            tuple(_complex_from_json(p) for p in obj["p_targets"]),
            tuple(_complex_from_json(k) for k in obj["k_targets"]),
            HermiteInterpolant.from_json(obj["interpolant"]),
            tuple(float(x) for x in obj["e1"]),
            tuple(float(x) for x in obj["e2"]),
        )


def _check_dims(variant, inner, metric):
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if metric.dim != 1 + inner.target_dim:
        raise ValueError(
            f"metric dimension {metric.dim} does not match C x X of dimension {1 + inner.target_dim}"
        )


def schedule_terms(j: int, alpha: complex, p: complex, inner: InnerCurve,
                   metric: MetricSpec, variant: str = "punctured"):
    """Return ``(E1_j, E2_j)``, the two lengths entering ``k_j``.

    ``E1_j`` measures ``(0, f'(p_j) * s)`` and ``E2_j`` measures ``(s, 0)`` at
    ``(alpha_j, f(p_j))``, with ``s = alpha_j`` (punctured) or ``s = 1`` (plane).
    """
    _check_dims(variant, inner, metric)
    s = alpha if variant == "punctured" else 1.0
    base = np.concatenate([[alpha], inner.f(p)])
    fp = inner.fprime(p)
    zeros = np.zeros(inner.target_dim, dtype=complex)
    e1 = metric.length(base, np.concatenate([[0.0], fp * s]))
    e2 = metric.length(base, np.concatenate([[s], zeros]))
    if not e1 > 0:
        raise ArithmeticError(f"degenerate direction at node {j}: E1 = {e1}")
    return e1, e2


def schedule_kj(j: int, nodes: NodeSystem, p_targets, inner: InnerCurve,
                metric: MetricSpec, variant: str = "punctured") -> complex:
    """``k_j = j * (1/E1_j + E2_j)``, real and positive."""
    e1, e2 = schedule_terms(j, nodes.alpha[j - 1], complex(p_targets[j - 1]), inner, metric, variant)
    return complex(j * (1.0 / e1 + e2))


def build_curve(
    variant: str = "punctured",
    inner: InnerCurve | None = None,
    metric: MetricSpec | None = None,
    nodes: NodeSystem | None = None,
    p_targets=None,
    *,
    residual_tol: float = 1e-6,
) -> CurveSpec:
    """Schedule the ``k_j``, interpolate and verify the jets.

    Defaults give the punctured ``(C*)^2`` configuration: geometric nodes
    ``4 * 4**(j-1)`` with ``J_max = 8``, ``f = exp``, Fubini-Study metric and
    ``p_j = j``.
    """
    if inner is None:
        inner = InnerCurve("exp_to_cstar" if variant == "punctured" else "identity_to_c")
    if metric is None:
        metric = MetricSpec("fs_p2") if variant == "punctured" else MetricSpec("euclidean", 2)
    if nodes is None:
        nodes = NodeSystem.geometric(4.0, 4.0, 8)
    validate_nodes(nodes).raise_if_invalid()
    _check_dims(variant, inner, metric)
    if p_targets is None:
        p_targets = np.arange(1, nodes.j_max + 1)
    p_targets = tuple(complex(p) for p in p_targets)
    if len(p_targets) != nodes.j_max:
        raise ValueError(f"{len(p_targets)} values for {nodes.j_max} nodes")

    if variant == "punctured":
        q = np.log(nodes.alpha)
        drift = np.abs(np.exp(q) - nodes.alpha) / np.abs(nodes.alpha)
        if np.max(drift) > 1e-14:
            raise ArithmeticError("exp(Log alpha_j) drifts from alpha_j")

    e1, e2, ks = [], [], []
    for j in range(1, nodes.j_max + 1):
        a, b = schedule_terms(j, nodes.alpha[j - 1], p_targets[j - 1], inner, metric, variant)
        e1.append(float(a))
        e2.append(float(b))
        ks.append(complex(j * (1.0 / a + b)))

    targets = InterpolationTargets(p_targets, ks)
    interp = build_interpolant(nodes, targets, residual_tol=None)
    worst = max(max(r.rel_val_res, r.rel_der_res) for r in residual_report(interp))
    if not worst <= residual_tol:
        raise ResidualError(f"relative jet residual {worst:.3g} exceeds {residual_tol:.3g}")
    return CurveSpec(variant, inner, metric, nodes, p_targets, tuple(ks), interp,
                     tuple(e1), tuple(e2))


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise OverflowError(f"{what} left the binary64 range")
    return x


_SNAP_ULPS = 4.0


def _snap_to_nodes(w, alpha):
    # within a few ulps of a node the chart point is taken to be the node
    # itself; the interpolant is far too steep there to survive exp rounding
    w = np.array(w, dtype=complex)
    hit = np.abs(w[..., None] - alpha) <= _SNAP_ULPS * np.finfo(float).eps * np.abs(alpha)
    if np.any(hit):
        idx = np.argmax(hit, axis=-1)
        w = np.where(np.any(hit, axis=-1), alpha[idx], w)
    return w


def _chart(spec: CurveSpec, z):
    """First coordinate ``w`` of ``F(z)`` and its derivative ``dw/dz``."""
    z = np.asarray(z, dtype=complex)
    if spec.variant == "punctured":
        with np.errstate(over="ignore"):
            w = _check_finite(np.exp(z), "e^z")
        w = _snap_to_nodes(w, spec.nodes.alpha)
        return w, w
    return _snap_to_nodes(z, spec.nodes.alpha), np.ones_like(z)


def eval_F(spec: CurveSpec, z):
    """``F(z)`` with the coordinates on the last axis."""
    w, _ = _chart(spec, z)
    second = spec.inner.f(eval_g(spec.interpolant, w))
    return _check_finite(np.concatenate([w[..., None], second], axis=-1), "F(z)")


def eval_F_tangent(spec: CurveSpec, z):
    """Base point ``F(z)`` and velocity ``F'(z)``."""
    w, dw = _chart(spec, z)
    gw = eval_g(spec.interpolant, w)
    dg = eval_g_deriv(spec.interpolant, w)
    base = np.concatenate([w[..., None], spec.inner.f(gw)], axis=-1)
    vel = np.concatenate([dw[..., None], spec.inner.fprime(gw) * (dg * dw)[..., None]], axis=-1)
    return _check_finite(base, "F(z)"), _check_finite(vel, "F'(z)")


def eval_F_deriv_length(spec: CurveSpec, z):
    base, vel = eval_F_tangent(spec, z)
    return spec.metric.length(base, vel)


@dataclass(frozen=True)
class BlowupRow:
    j: int
    point: complex
    length_E: float
    lower_bound: float
    ratio: float
    e1: float
    e2: float

    def holds(self, rel_tol: float = 1e-9) -> bool:
        return self.length_E >= self.lower_bound - rel_tol * (1.0 + abs(self.lower_bound))


def blowup_table(spec: CurveSpec, rel_tol: float = 1e-9) -> list[BlowupRow]:
    """Speed of ``F`` at the node preimages against its certified lower bound.

    Raises :class:`ArithmeticError` if a row breaks the bound or the bounds
    fail to increase strictly.
    """
    q = spec.q
    lengths = np.atleast_1d(eval_F_deriv_length(spec, q))
    rows = []
    for j in range(1, spec.nodes.j_max + 1):
        e1, e2 = spec.e1[j - 1], spec.e2[j - 1]
        lb = j * (1.0 + e1 * e2) - e2
        rows.append(BlowupRow(j, complex(q[j - 1]), float(lengths[j - 1]), lb,
                              float(lengths[j - 1]) / j, e1, e2))
    bad = [r.j for r in rows if not r.holds(rel_tol)]
    if bad:
        raise ArithmeticError(f"speed below the certified lower bound at j = {bad}")
    bounds = [r.lower_bound for r in rows]
    if any(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:])):
        raise ArithmeticError("lower bounds are not strictly increasing")
    return rows


def first_crossing(rows, c: float, *, use: str = "lower_bound"):
    """Smallest ``j`` whose certified bound (or measured length) reaches ``c``."""
    for r in rows:
        value = r.lower_bound if use == "lower_bound" else r.length_E
        if value >= c:
            return r.j
    return None


def blowup_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["j", "re(point)", "im(point)", "length_E", "lower_bound", "ratio", "E1", "E2"])
    for r in rows:
        writer.writerow([r.j] + [format(x, ".17g") for x in
                                 (r.point.real, r.point.imag, r.length_E, r.lower_bound,
                                  r.ratio, r.e1, r.e2)])
    return buf.getvalue()
