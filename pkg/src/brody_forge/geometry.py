"""Hermitian length evaluators for tangent vectors.

Two presets are provided: the flat metric on ``C^n`` and the Fubini-Study
metric of ``P^2`` read in the affine chart ``[1 : z1 : z2]``, which contains
``(C*)^2``. All evaluators broadcast over leading axes; the last axis holds
the coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["MetricSpec", "TangentAtPoint", "EUCLIDEAN_C2", "FS_P2", "length", "triangle_gap"]


@dataclass(frozen=True)
class TangentAtPoint:
    base: np.ndarray
    vector: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=complex)
        vector = np.asarray(self.vector, dtype=complex)
        if base.shape[-1:] != vector.shape[-1:]:
            raise ValueError(
                f"base has {base.shape[-1:]} coordinates, vector has {vector.shape[-1:]}"
            )
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "vector", vector)


@dataclass(frozen=True)
class MetricSpec:
    """``kind`` is ``"euclidean"`` (with dimension ``n``) or ``"fs_p2"``."""

    kind: str
    n: int = 2

    def __post_init__(self):
        if self.kind not in ("euclidean", "fs_p2"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "euclidean" and self.n < 1:
            raise ValueError("euclidean metric needs n >= 1")
        if self.kind == "fs_p2" and self.n != 2:
            raise ValueError("fs_p2 lives on a two-dimensional chart")

    @property
    def dim(self) -> int:
        return self.n

    def length(self, base, vector):
        """Length of ``vector`` at ``base``; broadcasts over leading axes."""
        base = np.asarray(base, dtype=complex)
        vector = np.asarray(vector, dtype=complex)
        if vector.shape[-1] != self.dim or base.shape[-1] != self.dim:
            raise ValueError(
                f"{self.kind} metric expects {self.dim} coordinates, "
                f"got base {base.shape[-1]} and vector {vector.shape[-1]}"
            )
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(vector))):
            raise ValueError("non-finite tangent data")
        if self.kind == "euclidean":
            out = np.sqrt(np.sum(np.abs(vector) ** 2, axis=-1))
        else:
            out = _fs_length(base, vector)
        return float(out) if np.ndim(out) == 0 else out

    def to_json(self) -> dict:
        if self.kind == "euclidean":
            return {"kind": "euclidean", "n": self.n}
        return {"kind": "fs_p2"}

    @classmethod
    def from_json(cls, obj) -> "MetricSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "euclidean":
            extra = set(obj) - {"kind", "n"}
            if extra:
                raise ConfigError(f"unknown key(s): {', '.join(sorted(extra))}")
            return cls("euclidean", int(obj.get("n", 2)))
        if kind in ("fs_p2", "fubini_study_p2"):
            extra = set(obj) - {"kind"}
            if extra:
                raise ConfigError(f"unknown key(s): {', '.join(sorted(extra))}")
            return cls("fs_p2")
        raise ConfigError(f"unknown metric kind {kind!r}")


EUCLIDEAN_C2 = MetricSpec("euclidean", 2)
FS_P2 = MetricSpec("fs_p2")


def _fs_length(p, v):
    # (1 + |p|^2)|v|^2 - |<v,p>|^2 rewritten by Lagrange's identity so that
    # nearly parallel (p, v) at large |p| do not cancel
    p1, p2 = p[..., 0], p[..., 1]
    v1, v2 = v[..., 0], v[..., 1]
    vv = np.abs(v1) ** 2 + np.abs(v2) ** 2
    cross = np.abs(v1 * p2 - v2 * p1) ** 2
    weight = 1.0 + np.abs(p1) ** 2 + np.abs(p2) ** 2
    return np.sqrt(vv + cross) / weight


def length(metric: MetricSpec, t: TangentAtPoint):
    return metric.length(t.base, t.vector)


def triangle_gap(metric: MetricSpec, t1: TangentAtPoint, t2: TangentAtPoint):
    """``|t1 + t2| - ||t1| - |t2||`` at a shared base point; never negative.

    This is the reverse triangle inequality that turns the interpolated
    derivative into a lower bound on the curve's speed.
    """
    if t1.base.shape != t2.base.shape or not np.array_equal(t1.base, t2.base):
        raise ValueError("tangent vectors live at different base points")
    l1 = metric.length(t1.base, t1.vector)
    l2 = metric.length(t2.base, t2.vector)
    l12 = metric.length(t1.base, t1.vector + t2.vector)
    return l12 - np.abs(l1 - l2)
