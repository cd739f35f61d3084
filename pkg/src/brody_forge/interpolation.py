r"""Entire Hermite interpolation at the nodes of a :class:`NodeSystem`.

Given values ``p_j`` and derivatives ``k_j`` the interpolant is

.. math::

    g(z) = \sum_j H_j(z) \, \frac{a_j + b_j (z - \alpha_j)}{\alpha_j^2},

with ``a_j = p_j alpha_j^2 / H_j(alpha_j)`` and
``b_j = (k_j - p_j H_j'(alpha_j)/H_j(alpha_j)) alpha_j^2 / H_j(alpha_j)``.
Each ``H_j`` keeps a double zero at every other node, so term ``j`` alone
carries the jet at ``alpha_j``. Coefficients are stored in log form since
``H_j(alpha_j)`` grows like ``rho^{j(j-1)}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResidualError
from .products import (
    LogComplex,
    NodeSystem,
    _complex_from_json,
    _complex_to_json,
    _log_factors,
    eval_H_excl,
    eval_H_excl_logderiv,
    validate_nodes,
)

__all__ = [
    "InterpolationTargets",
    "HermiteInterpolant",
    "ResidualRow",
    "build_interpolant",
    "eval_g",
    "eval_g_deriv",
    "eval_term",
    "residual_report",
    "residuals_to_csv",
]


@dataclass(frozen=True)
class InterpolationTargets:
    p: tuple
    k: tuple

    def __post_init__(self):
        p = tuple(complex(x) for x in self.p)
        k = tuple(complex(x) for x in self.k)
        if len(p) != len(k):
            raise ValueError(f"{len(p)} values but {len(k)} derivatives")
        if not all(math.isfinite(abs(x)) for x in p + k):
            raise ValueError("interpolation targets must be finite")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)

    def __len__(self):
        return len(self.p)

    def scaled(self, lam: complex) -> "InterpolationTargets":
        return InterpolationTargets([lam * x for x in self.p], [lam * x for x in self.k])

    def to_json(self) -> dict:
        return {"p": [_complex_to_json(x) for x in self.p],
                "k": [_complex_to_json(x) for x in self.k]}

    @classmethod
    def from_json(cls, obj) -> "InterpolationTargets":
        return cls([_complex_from_json(x) for x in obj["p"]],
                   [_complex_from_json(x) for x in obj["k"]])


@dataclass(frozen=True)
class HermiteInterpolant:
    nodes: NodeSystem
    coeff_a: tuple
    coeff_b: tuple
    targets: InterpolationTargets
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _scaled_coeffs(self):
        # log(a_j / alpha_j^2), log(b_j / alpha_j^2) as complex arrays
        if "scaled" not in self._cache:
            log_alpha2 = 2.0 * np.log(self.nodes.alpha)
            la = np.array([c.log() for c in self.coeff_a]) - log_alpha2
            lb = np.array([c.log() for c in self.coeff_b]) - log_alpha2
            self._cache["scaled"] = (la, lb)
        return self._cache["scaled"]

    def __call__(self, z):
        return eval_g(self, z)

    def deriv(self, z):
        return eval_g_deriv(self, z)

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes.to_json(),
            "coeff_a": [c.to_json() for c in self.coeff_a],
            "coeff_b": [c.to_json() for c in self.coeff_b],
            "targets": self.targets.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "HermiteInterpolant":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            NodeSystem.from_json(obj["nodes"]),
            tuple(LogComplex.from_json(c) for c in obj["coeff_a"]),
            tuple(LogComplex.from_json(c) for c in obj["coeff_b"]),
            InterpolationTargets.from_json(obj["targets"]),
        )


def _log_of(value: complex) -> LogComplex:
    return LogComplex.from_complex(complex(value))


def build_interpolant(
    nodes: NodeSystem,
    targets: InterpolationTargets,
    *,
    residual_tol: float | None = None,
    decay_radius: float | None = 10.0,
    decay_from: int = 4,
) -> HermiteInterpolant:
    """Compute the coefficients ``a_j, b_j`` in log form.

    Parameters
    ----------
    residual_tol : float, optional
        If given, the construction is rejected with :class:`ResidualError`
        when any relative jet residual exceeds it.
    decay_radius : float, optional
        Radius of the circle on which term magnitudes must decrease
        monotonically beyond ``decay_from``; ``None`` disables the guard.
    """
    validate_nodes(nodes).raise_if_invalid()
    if len(targets) != nodes.j_max:
        raise ValueError(f"{len(targets)} targets for {nodes.j_max} nodes")

    alpha = nodes.alpha
    coeff_a, coeff_b = [], []
    for j in range(1, nodes.j_max + 1):
        a = alpha[j - 1]
        log_H = eval_H_excl(j, a, nodes)
        if not math.isfinite(log_H.log_mag):
            raise ArithmeticError(f"H_{j}(alpha_{j}) is not finite")
        scale = LogComplex(2.0 * math.log(abs(a)), float(np.angle(a) * 2.0)) / log_H
        p, k = targets.p[j - 1], targets.k[j - 1]
        logderiv = eval_H_excl_logderiv(j, a, nodes)
        coeff_a.append(_log_of(p) * scale)
        coeff_b.append(_log_of(k - p * logderiv) * scale)
        for c in (coeff_a[-1], coeff_b[-1]):
            if math.isnan(c.log_mag) or c.log_mag == math.inf:
                raise ArithmeticError(f"non-finite coefficient at node {j}")

    interp = HermiteInterpolant(nodes, tuple(coeff_a), tuple(coeff_b), targets)
    if decay_radius is not None and nodes.j_max > decay_from + 1:
        _check_decay(interp, decay_radius, decay_from)
    if residual_tol is not None:
        worst = max(max(r.rel_val_res, r.rel_der_res) for r in residual_report(interp))
        if not worst <= residual_tol:
            raise ResidualError(f"relative jet residual {worst:.3g} exceeds {residual_tol:.3g}")
    return interp


def _check_decay(interp: HermiteInterpolant, radius: float, start: int, samples: int = 64):
    ring = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    sizes = np.max(np.abs(_terms(interp, ring)[0]), axis=0)
    tail = sizes[start:]
    if np.any(np.diff(tail) > 0):
        raise ArithmeticError(
            f"interpolant terms do not decay monotonically beyond j={start} on |z|={radius}"
        )


def _log_H_all(interp: HermiteInterpolant, z):
    """``log H_j(z)`` for every j as (magnitude, phase) arrays of shape (..., J)."""
    alpha = interp.nodes.alpha
    log_mag, phase = _log_factors(z[..., None] / alpha)
    keep = ~np.eye(alpha.shape[0], dtype=bool)
    ex_mag = 2.0 * np.sum(np.where(keep, log_mag[..., None, :], 0.0), axis=-1)
    ex_ph = 2.0 * np.sum(np.where(keep, phase[..., None, :], 0.0), axis=-1)
    return ex_mag, ex_ph


def _scaled_exp(zero, logH, coeff):
    dead = zero | np.isneginf(coeff.real)
    with np.errstate(over="ignore", under="ignore"):
        out = np.exp(np.where(dead, 0.0, logH + np.where(np.isneginf(coeff.real), 0.0, coeff)))
    return np.where(dead, 0.0, out)


def _terms(interp: HermiteInterpolant, z):
    """Per-node terms of g and g'; arrays of shape (..., J)."""
    z = np.asarray(z, dtype=complex)
    alpha = interp.nodes.alpha
    la, lb = interp._scaled_coeffs()
    ex_mag, ex_ph = _log_H_all(interp, z)
    zero = np.isneginf(ex_mag)
    logH = np.where(zero, 0.0, ex_mag) + 1j * ex_ph
    A = _scaled_exp(zero, logH, la)
    B = _scaled_exp(zero, logH, lb)
    dz = z[..., None] - alpha
    value = A + B * dz
    # H_j' = H_j * sum_{i != j} 2/(z - alpha_i); at another node both vanish
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(dz == 0, 0.0, 2.0 / dz)
    keep = ~np.eye(alpha.shape[0], dtype=bool)
    logderiv = np.sum(np.where(keep, inv[..., None, :], 0.0), axis=-1)
    deriv = np.where(zero, 0.0, logderiv * value + B)
    return value, deriv


def _finish(total):
    if not np.all(np.isfinite(total)):
        raise OverflowError("interpolant evaluation left the binary64 range")
    return complex(total) if np.ndim(total) == 0 else total


def eval_g(interp: HermiteInterpolant, z):
    value, _ = _terms(interp, z)
    return _finish(np.sum(value, axis=-1))


def eval_g_deriv(interp: HermiteInterpolant, z):
    _, deriv = _terms(interp, z)
    return _finish(np.sum(deriv, axis=-1))


def eval_term(interp: HermiteInterpolant, j: int, z):
    """Value and derivative of the ``j``-th basis term (1-based)."""
    if not 1 <= j <= interp.nodes.j_max:
        raise IndexError(f"term index {j} outside 1..{interp.nodes.j_max}")
    value, deriv = _terms(interp, z)
    return _finish(value[..., j - 1]), _finish(deriv[..., j - 1])


@dataclass(frozen=True)
class ResidualRow:
    j: int
    abs_val_res: float
    abs_der_res: float
    rel_val_res: float
    rel_der_res: float


def _rel(err: float, ref: complex) -> float:
    return err / abs(ref) if ref != 0 else err


def residual_report(interp: HermiteInterpolant) -> list[ResidualRow]:
    alpha = interp.nodes.alpha
    g = np.atleast_1d(eval_g(interp, alpha))
    dg = np.atleast_1d(eval_g_deriv(interp, alpha))
    rows = []
    for j in range(interp.nodes.j_max):
        p, k = interp.targets.p[j], interp.targets.k[j]
        ev = float(abs(g[j] - p))
        ed = float(abs(dg[j] - k))
        rows.append(ResidualRow(j + 1, ev, ed, _rel(ev, p), _rel(ed, k)))
    return rows


def residuals_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["j", "abs_val_res", "abs_der_res", "rel_val_res", "rel_der_res"])
    for r in rows:
        writer.writerow([r.j] + [format(x, ".17g") for x in
                                 (r.abs_val_res, r.abs_der_res, r.rel_val_res, r.rel_der_res)])
    return buf.getvalue()
