"""Zalcman-style rescaling of the family ``f_n(z) = F(nz)`` on the unit disk.

The simulator instantiates the convergent scenario directly: centres
``a_j = A/j`` and radii ``rho_j = |B|/j + delta/j**2``. For ``delta = 0`` the
rescaled maps ``xi -> f_j(a_j + rho_j xi)`` coincide with ``G(xi) = F(A + |B| xi)``;
for ``delta != 0`` they converge to it at rate ``O(1/j)``.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveSpec, blowup_table, eval_F, eval_F_tangent
from .errors import ConfigError
from .products import _complex_from_json, _complex_to_json

__all__ = [
    "RescalingRun",
    "ConvergenceRow",
    "family_member",
    "check_not_compactly_divergent",
    "rescaled_map",
    "logderiv_first_coordinate",
    "limit_identification",
    "contradiction_witness",
    "convergence_to_csv",
    "witness_to_csv",
    "disk_grid",
]


# below this |B| the measured j*rho_j cannot be told apart from zero
SMALL_SPEED = 1e-6


def disk_grid(radius: float = 2.0, steps: int = 41) -> np.ndarray:
    """Lattice points of a ``steps x steps`` square grid lying in ``|xi| <= radius``."""
    t = np.linspace(-radius, radius, steps)
    xi = (t[None, :] + 1j * t[:, None]).ravel()
    return xi[np.abs(xi) <= radius * (1 + 1e-12)]


def _worker_count() -> int | None:
    raw = os.environ.get("BRODY_FORGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        return None
    return None if n <= 0 else n


@dataclass(frozen=True)
class RescalingRun:
    curve: CurveSpec
    A: complex = 0.1 + 0.2j
    B: complex = 1.0
    delta: float = 0.0
    j_list: tuple = (8, 16, 32)
    radius: float = 2.0
    steps: int = 41
    contour_radius: float = 0.25
    grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "B", complex(self.B))
        object.__setattr__(self, "j_list", tuple(int(j) for j in self.j_list))
        if self.B == 0:
            raise ValueError("B must be nonzero")
        if self.speed_near_zero:
            warnings.warn(f"|B| = {abs(self.B):.3g} is near zero; the limit may be degenerate",
                          RuntimeWarning, stacklevel=3)
        object.__setattr__(self, "grid", disk_grid(self.radius, self.steps))
        reach = self.radius + self.contour_radius
        for j in self.j_list:
            rho = self.rho(j)
            if not rho > 0:
                raise ValueError(f"rho_{j} = {rho} is not positive")
            if abs(self.a(j)) + rho * reach >= 1.0:
                raise ValueError(f"rescaled disk for j={j} leaves the unit disk")

    def a(self, j: int) -> complex:
        return self.A / j

    def rho(self, j: int) -> float:
        return abs(self.B) / j + self.delta / j**2

    @property
    def speed(self) -> float:
        """``lim j * rho_j``, the real positive scale of the limit map."""
        return abs(self.B)

    @property
    def speed_near_zero(self) -> bool:
        return abs(self.B) < SMALL_SPEED

    def limit_map(self, xi):
        """``G(xi) = F(A + |B| xi)``."""
        return eval_F(self.curve, self.A + self.speed * np.asarray(xi, dtype=complex))

    def to_json(self) -> dict:
        return {
            "A": _complex_to_json(self.A),
            "B": _complex_to_json(self.B),
            "delta": self.delta,
            "j_list": list(self.j_list),
            "grid": {"radius": self.radius, "steps": self.steps},
        }

    @classmethod
    def from_json(cls, curve: CurveSpec, obj) -> "RescalingRun":
        extra = set(obj) - {"A", "B", "delta", "j_list", "grid"}
        if extra:
            raise ConfigError(f"unknown key(s): {', '.join(sorted(extra))}")
        grid = obj.get("grid", {})
        extra = set(grid) - {"radius", "steps"}
        if extra:
            raise ConfigError(f"unknown key(s) in grid: {', '.join(sorted(extra))}")
        return cls(
            curve,
            A=_complex_from_json(obj.get("A", 0.1 + 0.2j)),
            B=_complex_from_json(obj.get("B", 1.0)),
            delta=float(obj.get("delta", 0.0)),
            j_list=tuple(obj.get("j_list", (8, 16, 32))),
            radius=float(grid.get("radius", 2.0)),
            steps=int(grid.get("steps", 41)),
        )


def family_member(curve: CurveSpec, n: int, z):
    """``f_n(z) = F(n z)`` for ``|z| < 1``."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("family members are defined on the open unit disk")
    return eval_F(curve, n * z)


def check_not_compactly_divergent(curve: CurveSpec, n_list) -> dict:
    """Every ``f_n`` sends 0 to ``F(0)``, so no subsequence diverges compactly."""
    values = [family_member(curve, n, 0.0) for n in n_list]
    ref = eval_F(curve, 0.0)
    same = all(np.array_equal(v, values[0]) for v in values)
    return {
        "passed": bool(same),
        "n_list": list(n_list),
        "F0": ref,
        "matches_eval_F": bool(np.array_equal(values[0], ref)) if values else True,
        "certificate_radius": float(np.linalg.norm(ref)),
    }


def rescaled_map(run: RescalingRun, j: int, xi):
    """``xi -> f_j(a_j + rho_j xi) = F(j a_j + j rho_j xi)``."""
    z = run.a(j) + run.rho(j) * np.asarray(xi, dtype=complex)
    return family_member(run.curve, j, z)


def _first_coordinate(run: RescalingRun, j: int, xi):
    return rescaled_map(run, j, xi)[..., 0]


def logderiv_first_coordinate(run: RescalingRun, j: int, xi, *, method: str = "cauchy",
                              step: float = 1e-5, nodes: int = 32):
    """Measured ``phi'(xi) / phi(xi)`` for ``phi`` the first coordinate.

    ``method="central"`` uses a central difference with the given step;
    ``method="cauchy"`` applies the trapezoidal rule to Cauchy's integral for
    the derivative on a circle of radius ``run.contour_radius``, which is
    spectrally accurate for this entire function.
    """
    if run.curve.variant != "punctured":
        raise ValueError("the first coordinate is exponential only for the punctured variant")
    xi = np.asarray(xi, dtype=complex)
    value = _first_coordinate(run, j, xi)
    return _derivative(lambda u: _first_coordinate(run, j, u), xi, method, step, nodes,
                       run.contour_radius) / value


def _derivative(fn, xi, method, step, nodes, radius):
    if method == "central":
        return (fn(xi + step) - fn(xi - step)) / (2.0 * step)
    if method == "cauchy":
        roots = np.exp(2j * np.pi * np.arange(nodes) / nodes)
        samples = fn(xi[..., None] + radius * roots)
        return np.mean(samples / roots, axis=-1) / radius
    raise ValueError(f"unknown derivative method {method!r}")


@dataclass(frozen=True)
class ConvergenceRow:
    j: int
    dev_first_coord: float
    dev_full_map: float
    jrho_measured: complex
    jrho_exact: float
    min_modulus_first_coord: float
    exp_j_a: complex


def _row(run: RescalingRun, j: int, limit, limit_first) -> ConvergenceRow:
    xi = run.grid
    mapped = rescaled_map(run, j, xi)
    first = mapped[..., 0]
    dev_first = float(np.max(np.abs(first - limit_first)))
    dev_full = float(np.max(np.linalg.norm(mapped - limit, axis=-1)))
    fn = lambda u: _first_coordinate(run, j, u)  # noqa: E731
    probe = np.array([0.0 + 0.0j])
    d = _derivative(fn, probe, "cauchy", 0.0, 32, run.contour_radius)[0]
    if run.curve.variant == "punctured":
        jrho = complex(d / fn(probe)[0])
        exp_ja = complex(np.exp(j * run.a(j)))
    else:
        jrho = complex(d)
        exp_ja = complex(j * run.a(j))
    return ConvergenceRow(j, dev_first, dev_full, jrho, j * run.rho(j),
                          float(np.min(np.abs(first))), exp_ja)


def limit_identification(run: RescalingRun) -> list[ConvergenceRow]:
    """Per-``j`` sup-grid deviations from the identified limit.

    Raises :class:`ArithmeticError` if the measured first coordinate vanishes
    on the grid (the numerical stand-in for Hurwitz's theorem).
    """
    xi = run.grid
    limit = run.limit_map(xi)
    u = run.A + run.speed * xi
    limit_first = np.exp(u) if run.curve.variant == "punctured" else u
    workers = _worker_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda j: _row(run, j, limit, limit_first), run.j_list))
    if run.curve.variant == "punctured":
        floor = math.exp(run.A.real - run.speed * run.radius) / 2.0
        for r in rows:
            if not r.min_modulus_first_coord >= floor:
                raise ArithmeticError(
                    f"first coordinate nearly vanishes on the grid at j={r.j}: "
                    f"{r.min_modulus_first_coord:.3g} < {floor:.3g}"
                )
    return rows


def contradiction_witness(run: RescalingRun, c_list, rows=None) -> list[dict]:
    """Speed of the limit ``G`` at the preimages ``xi_j`` of the nodes.

    ``G'(xi) = |B| F'(A + |B| xi)``, and ``A + |B| xi_j`` is the node preimage
    ``q_j``; for every ``c`` the smallest ``j`` with speed above ``c`` is
    reported (``None`` when no computed ``j`` reaches it).
    """
    curve = run.curve
    rows = blowup_table(curve) if rows is None else rows
    q = curve.q
    xi_j = (q - run.A) / run.speed
    base, vel = eval_F_tangent(curve, run.A + run.speed * xi_j)
    g_speed = np.atleast_1d(curve.metric.length(base, run.speed * vel))
    out = []
    for c in c_list:
        hit = next((j + 1 for j, s in enumerate(g_speed) if s > c), None)
        out.append({
            "c": float(c),
            "j": hit,
            "xi": None if hit is None else complex(xi_j[hit - 1]),
            "speed_G": None if hit is None else float(g_speed[hit - 1]),
            "scaled_row": None if hit is None else run.speed * rows[hit - 1].length_E,
            "speed_near_zero": run.speed_near_zero,
        })
    return out


def convergence_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["j", "dev_first_coord", "dev_full_map", "jrho_measured",
                     "min_modulus_first_coord"])
    for r in rows:
        writer.writerow([r.j] + [format(x, ".17g") for x in
                                 (r.dev_first_coord, r.dev_full_map, r.jrho_measured.real,
                                  r.min_modulus_first_coord)])
    return buf.getvalue()


def witness_to_csv(witness) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["c", "j", "speed_G", "scaled_row", "speed_near_zero"])
    for w in witness:
        writer.writerow([
            format(w["c"], ".17g"),
            "" if w["j"] is None else w["j"],
            "" if w["speed_G"] is None else format(w["speed_G"], ".17g"),
            "" if w["scaled_row"] is None else format(w["scaled_row"], ".17g"),
            int(w["speed_near_zero"]),
        ])
    return buf.getvalue()
