r"""Squared Weierstrass-type products with double zeros at prescribed nodes.

The central object is

.. math::

    h(z) = \prod_{j=1}^{J} \left(1 - \frac{z}{\alpha_j}\right)^2

together with the factor-deleted products ``H_j = h / (1 - z/alpha_j)^2``.
Products of this kind grow like ``rho^{j(j-1)}`` at the nodes, so everything
that feeds the interpolation coefficients is carried in log-magnitude/phase
form (:class:`LogComplex`).

A small classifier for the classical equivalence between convergence of
``sum c_n``, ``prod (1 + c_n)`` and positivity of ``prod (1 - c_n)`` lives
here as well (:func:`lemma1_classify`).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import NodeValidationError, PoleError

__all__ = [
    "NodeSystem",
    "LogComplex",
    "ValidationReport",
    "ConvergenceReport",
    "wrap_phase",
    "validate_nodes",
    "eval_h",
    "eval_h_deriv",
    "eval_h_log",
    "eval_H_excl",
    "eval_H_excl_deriv",
    "eval_H_excl_logderiv",
    "truncation_bound",
    "lemma1_classify",
]


def wrap_phase(phase):
    """Reduce angles to the half-open interval (-pi, pi]."""
    phase = np.asarray(phase, dtype=float)
    out = -(np.mod(np.pi - phase, 2.0 * np.pi) - np.pi)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LogComplex:
    """A complex number ``exp(log_mag + 1j * phase)``.

    Fields may be floats or broadcast-compatible arrays. ``log_mag = -inf``
    encodes an exact zero.
    """

    log_mag: float | np.ndarray
    phase: float | np.ndarray = 0.0

    @classmethod
    def from_complex(cls, value) -> "LogComplex":
        value = np.asarray(value, dtype=complex)
        with np.errstate(divide="ignore"):
            log_mag = np.log(np.abs(value))
        phase = np.where(value == 0, 0.0, np.angle(value))
        if log_mag.ndim == 0:
            return cls(float(log_mag), wrap_phase(float(phase)))
        return cls(log_mag, wrap_phase(phase))

    def to_complex(self):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(np.asarray(self.log_mag, dtype=float)) * np.exp(
                1j * np.asarray(self.phase, dtype=float)
            )
        out = np.where(np.isneginf(self.log_mag), 0.0 + 0.0j, out)
        return complex(out) if np.ndim(out) == 0 else out

    def log(self):
        """Principal-branch logarithm as a complex value."""
        out = np.asarray(self.log_mag) + 1j * np.asarray(self.phase)
        return complex(out) if np.ndim(out) == 0 else out

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(
            np.add(self.log_mag, other.log_mag),
            wrap_phase(np.add(self.phase, other.phase)),
        )

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(
            np.subtract(self.log_mag, other.log_mag),
            wrap_phase(np.subtract(self.phase, other.phase)),
        )

    def is_zero(self):
        return np.isneginf(self.log_mag)

    def to_json(self):
        mag = self.log_mag
        return {"log_mag": None if math.isinf(mag) and mag < 0 else float(mag),
                "phase": float(self.phase)}

    @classmethod
    def from_json(cls, obj) -> "LogComplex":
        mag = obj["log_mag"]
        return cls(-math.inf if mag is None else float(mag), float(obj["phase"]))


def _complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    return complex(obj)


def _complex_to_json(value: complex) -> dict:
    value = complex(value)
    return {"re": value.real, "im": value.imag}


@dataclass(frozen=True)
class NodeSystem:
    """Node sequence ``alpha_1, ..., alpha_{J_max}`` and its tail data.

    Use :meth:`geometric` for ``alpha_j = r * rho**(j - 1)`` or
    :meth:`explicit` for a finite list.
    """

    kind: str
    j_max: int
    r: complex = 0.0
    rho: float = 0.0
    nodes: tuple = field(default=())

    @classmethod
    def geometric(cls, r=4.0, rho=4.0, j_max=12) -> "NodeSystem":
        return cls(kind="geometric", j_max=int(j_max), r=complex(r), rho=float(rho))

    @classmethod
    def explicit(cls, nodes: Sequence[complex]) -> "NodeSystem":
        nodes = tuple(complex(a) for a in nodes)
        return cls(kind="explicit", j_max=len(nodes), nodes=nodes)

    @cached_property
    def alpha(self) -> np.ndarray:
        if self.kind == "geometric":
            return self.r * self.rho ** np.arange(self.j_max, dtype=float)
        return np.array(self.nodes, dtype=complex)

    @property
    def tail_bound(self) -> float:
        """Upper bound on ``sum_{j > J_max} 1/|alpha_j|``."""
        if self.kind == "explicit":
            return 0.0
        if self.rho <= 1.0 or self.r == 0:
            return math.inf
        return 1.0 / (abs(self.r) * self.rho ** (self.j_max - 1) * (self.rho - 1.0))

    @property
    def next_inverse_modulus(self) -> float:
        """``max_{j > J_max} 1/|alpha_j|`` (0 for a finite list)."""
        if self.kind == "explicit":
            return 0.0
        if self.r == 0:
            return math.inf
        return 1.0 / (abs(self.r) * self.rho**self.j_max)

    def extended(self, j_max: int) -> "NodeSystem":
        if self.kind != "geometric":
            raise ValueError("only geometric node systems can be extended")
        return NodeSystem.geometric(self.r, self.rho, j_max)

    def to_json(self) -> dict:
        if self.kind == "geometric":
            r = self.r.real if self.r.imag == 0 else _complex_to_json(self.r)
            return {"kind": "geometric", "r": r, "rho": self.rho, "j_max": self.j_max}
        return {"kind": "explicit", "nodes": [_complex_to_json(a) for a in self.nodes]}

    @classmethod
    def from_json(cls, obj) -> "NodeSystem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "geometric":
            _reject_keys(obj, {"kind", "r", "rho", "j_max"})
            return cls.geometric(_complex_from_json(obj["r"]), float(obj["rho"]), int(obj["j_max"]))
        if kind == "explicit":
            _reject_keys(obj, {"kind", "nodes"})
            return cls.explicit([_complex_from_json(a) for a in obj["nodes"]])
        raise ValueError(f"unknown node system kind: {kind!r}")


def _reject_keys(obj: dict, allowed: set):
    from .errors import ConfigError

    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s): {', '.join(extra)}")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self):
        if self.violations:
            raise NodeValidationError(self.violations)


def validate_nodes(nodes: NodeSystem, max_tail_bound: float | None = None) -> ValidationReport:
    """Collect every violated admissibility condition; never raises."""
    violations = []
    if nodes.j_max < 1:
        violations.append("j_max must be at least 1")
    if nodes.kind == "geometric":
        if nodes.r == 0:
            violations.append("zero node: r = 0")
        if not nodes.rho > 1.0:
            violations.append(f"non-convergent reciprocal sum: rho = {nodes.rho} <= 1")
    elif nodes.kind == "explicit":
        alpha = nodes.alpha
        for j, a in enumerate(alpha, start=1):
            if a == 0:
                violations.append(f"zero node at index {j}")
            if not np.isfinite(a):
                violations.append(f"non-finite node at index {j}")
        seen = {}
        for j, a in enumerate(alpha, start=1):
            if a in seen:
                violations.append(f"duplicate node {a} at indices {seen[a]} and {j}")
            else:
                seen[a] = j
    else:
        violations.append(f"unknown kind {nodes.kind!r}")
    if max_tail_bound is not None and not violations and nodes.tail_bound > max_tail_bound:
        violations.append(
            f"tail bound {nodes.tail_bound:.3g} exceeds threshold {max_tail_bound:.3g}"
        )
    return ValidationReport(tuple(violations))


# -- factor kernels ---------------------------------------------------------


def _ratios(z, alpha):
    z = np.asarray(z, dtype=complex)
    return z[..., None] / alpha, z


def _log_factors(w):
    """Termwise ``log|1 - w|`` and ``arg(1 - w)``."""
    one_minus = 1.0 - w
    small = np.abs(w) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        near = 0.5 * np.log1p(w.real * w.real + w.imag * w.imag - 2.0 * w.real)
        far = np.log(np.abs(one_minus))
    return np.where(small, near, far), np.angle(one_minus)


def _sum_logs(log_mag, phase, mask=None):
    # numpy reduces contiguous last axes pairwise
    if mask is not None:
        log_mag = np.where(mask, log_mag, 0.0)
        phase = np.where(mask, phase, 0.0)
    mag = 2.0 * np.sum(np.ascontiguousarray(log_mag), axis=-1)
    ph = wrap_phase(2.0 * np.sum(np.ascontiguousarray(phase), axis=-1))
    if np.ndim(mag) == 0:
        return LogComplex(float(mag), float(ph))
    return LogComplex(mag, ph)


def _scalarize(value):
    return complex(value) if np.ndim(value) == 0 else value


def _squared_product_with_derivative(z, alpha):
    """Direct product of ``(1 - z/a)^2`` over ``alpha`` and its derivative.

    The derivative uses leave-one-out products so that a double zero yields
    an exact 0 rather than ``0 * inf``.
    """
    w, z = _ratios(z, alpha)
    lin = 1.0 - w
    sq = lin * lin
    n = sq.shape[-1]
    ones = np.ones(sq.shape[:-1] + (1,), dtype=complex)
    prefix = np.concatenate([ones, np.cumprod(sq, axis=-1)[..., :-1]], axis=-1)
    suffix = np.concatenate([np.cumprod(sq[..., ::-1], axis=-1)[..., :-1][..., ::-1], ones], axis=-1)
    value = np.prod(sq, axis=-1) if n else ones[..., 0]
    dfac = -2.0 * lin / alpha
    deriv = np.sum(dfac * prefix * suffix, axis=-1)
    return value, deriv


def eval_h(z, nodes: NodeSystem):
    """Truncated product ``prod_{j <= J_max} (1 - z/alpha_j)^2``.

    Raises :class:`OverflowError` if the result leaves the binary64 range;
    use :func:`eval_h_log` there.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        value, _ = _squared_product_with_derivative(z, nodes.alpha)
    if not np.all(np.isfinite(value)):
        raise OverflowError("h(z) exceeds the binary64 range; use eval_h_log")
    return _scalarize(value)


def eval_h_deriv(z, nodes: NodeSystem):
    """Analytic ``h'(z)``; exactly zero at every node."""
    with np.errstate(over="ignore", invalid="ignore"):
        _, deriv = _squared_product_with_derivative(z, nodes.alpha)
    if not np.all(np.isfinite(deriv)):
        raise OverflowError("h'(z) exceeds the binary64 range")
    return _scalarize(deriv)


def eval_h_log(z, nodes: NodeSystem) -> LogComplex:
    """``h(z)`` in log form; ``log_mag = -inf`` exactly at the nodes."""
    w, _ = _ratios(z, nodes.alpha)
    return _sum_logs(*_log_factors(w))


def _check_index(j: int, nodes: NodeSystem):
    if not 1 <= j <= nodes.j_max:
        raise IndexError(f"node index {j} outside 1..{nodes.j_max}")


def eval_H_excl(j: int, z, nodes: NodeSystem) -> LogComplex:
    """``prod_{i != j} (1 - z/alpha_i)^2`` in log form (``j`` is 1-based)."""
    _check_index(j, nodes)
    w, _ = _ratios(z, nodes.alpha)
    mask = np.arange(nodes.j_max) != (j - 1)
    return _sum_logs(*_log_factors(w), mask=mask)


def eval_H_excl_logderiv(j: int, z, nodes: NodeSystem):
    """``H_j'(z) / H_j(z) = sum_{i != j} 2 / (z - alpha_i)``."""
    _check_index(j, nodes)
    z = np.asarray(z, dtype=complex)
    others = np.delete(nodes.alpha, j - 1)
    diff = z[..., None] - others
    if np.any(diff == 0):
        raise PoleError(f"z coincides with a node other than alpha_{j}")
    return _scalarize(np.sum(2.0 / diff, axis=-1))


def eval_H_excl_deriv(j: int, z, nodes: NodeSystem):
    """Direct ``(H_j(z), H_j'(z))`` as complex values.

    Exact zeros (value and derivative) at the nodes ``alpha_i``, ``i != j``.
    """
    _check_index(j, nodes)
    others = np.delete(nodes.alpha, j - 1)
    with np.errstate(over="ignore", invalid="ignore"):
        value, deriv = _squared_product_with_derivative(z, others)
    return _scalarize(value), _scalarize(deriv)


def truncation_bound(z, nodes: NodeSystem) -> float:
    """Bound on ``|log(h_inf(z) / h_J(z))|`` from the dropped factors.

    Valid while ``|z| < |alpha_{J_max + 1}|``; returns ``inf`` otherwise.
    """
    q = abs(complex(z)) * nodes.next_inverse_modulus
    if q >= 1.0:
        return math.inf
    return 2.0 * abs(complex(z)) * nodes.tail_bound / (1.0 - q)


# -- sums against products ------------------------------------------------


@dataclass
class ConvergenceReport:
    """Partial sums and products of a positive sequence plus the verdict.

    ``partial_products_minus`` is ``None`` when some ``c_n >= 1``.
    ``clause_c`` records whether ``prod (1 - c_n)`` looks positive.
    """

    n: np.ndarray
    partial_sums: np.ndarray
    partial_products_plus: np.ndarray
    partial_products_minus: np.ndarray | None
    verdict: str
    sum_converges: bool
    product_converges: bool
    clause_c: str = "n/a"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "sum", "prod_plus", "prod_minus"])
        minus = self.partial_products_minus
        for i, n in enumerate(self.n):
            writer.writerow([
                int(n),
                format(self.partial_sums[i], ".17g"),
                format(self.partial_products_plus[i], ".17g"),
                "" if minus is None else format(minus[i], ".17g"),
            ])
        return buf.getvalue()


def _compensated_cumsum(x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x))
    s = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
        out[i] = s + comp
    return out


def _is_cauchy(partials: np.ndarray, *, tol: float, window: int, ratio_max: float,
               sentinel: float) -> bool:
    """Heuristic Cauchy detector for a monotone sequence of partials.

    Diverges when the sentinel is crossed; converges when the last ``window``
    increments are all below ``tol`` (relative), otherwise judged by the
    ratio of successive dyadic block increments.
    """
    if not np.all(np.isfinite(partials)) or np.max(np.abs(partials)) > sentinel:
        return False
    n = len(partials)
    if n > window:
        inc = np.abs(np.diff(partials[-window - 1:]))
        if np.all(inc <= tol * max(1.0, abs(partials[-1]))):
            return True
    k_max = int(math.floor(math.log2(n)))
    edges = [2**k for k in range(k_max + 1)]
    blocks = np.abs(np.diff([partials[e - 1] for e in edges]))
    if len(blocks) < 3:
        return False
    ratios = []
    for prev, cur in zip(blocks[-3:-1], blocks[-2:]):
        if prev == 0.0:
            ratios.append(0.0 if cur == 0.0 else math.inf)
        else:
            ratios.append(cur / prev)
    return max(ratios) <= ratio_max


def lemma1_classify(
    c: Sequence[float] | Callable[[np.ndarray], np.ndarray],
    N: int | None = None,
    *,
    start: int = 1,
    tol: float = 1e-12,
    window: int = 32,
    sentinel: float = 1e12,
    ratio_max: float = 0.95,
) -> ConvergenceReport:
    """Classify ``sum c_n`` and ``prod (1 + c_n)`` from ``N`` terms.

    Parameters
    ----------
    c : array_like or callable
        Positive terms, or a vectorised function of the index ``n``.
    N : int
        Number of terms. Required when ``c`` is callable.
    start : int
        First index passed to a callable ``c``.

    Returns
    -------
    ConvergenceReport
        ``verdict`` is ``"both-converge"``, ``"both-diverge"`` or, if the two
        detectors disagree, ``"inconsistent"``.
    """
    if callable(c):
        if N is None:
            raise ValueError("N is required for a callable sequence")
        idx = np.arange(start, start + N)
        terms = np.asarray(c(idx), dtype=float)
    else:
        terms = np.asarray(c, dtype=float)
        if N is not None:
            terms = terms[:N]
        idx = np.arange(start, start + len(terms))
    if terms.size == 0 or not np.all(terms > 0) or not np.all(np.isfinite(terms)):
        raise ValueError("lemma1_classify needs finite positive terms")

    sums = _compensated_cumsum(terms)
    log_plus = _compensated_cumsum(np.log1p(terms))
    with np.errstate(over="ignore"):
        plus = np.exp(log_plus)
    minus = log_minus = None
    if np.all(terms < 1.0):
        log_minus = _compensated_cumsum(np.log1p(-terms))
        minus = np.exp(log_minus)

    opts = dict(tol=tol, window=window, ratio_max=ratio_max)
    s_ok = _is_cauchy(sums, sentinel=sentinel, **opts)
    # prod (1 + c_n) >= 1, so it is Cauchy iff its logarithm is
    p_ok = _is_cauchy(log_plus, sentinel=math.log(sentinel), **opts)
    if s_ok and p_ok:
        verdict = "both-converge"
    elif not s_ok and not p_ok:
        verdict = "both-diverge"
    else:
        verdict = "inconsistent"

    clause_c = "n/a"
    if log_minus is not None:
        positive = _is_cauchy(log_minus, sentinel=math.log(sentinel), **opts)
        clause_c = "positive" if positive else "zero"

    return ConvergenceReport(idx, sums, plus, minus, verdict, s_ok, p_ok, clause_c)
