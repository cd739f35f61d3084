"""``brody-forge`` command line front end.

Exit status: 0 on success, 1 on validation/config failure, 2 when a stage's
acceptance thresholds are violated, 3 on I/O errors. Failures also print a
JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import reports
from .curves import InnerCurve, blowup_table, blowup_to_csv, build_curve
from .errors import ConfigError, NodeValidationError, ResidualError
from .geometry import MetricSpec
from .interpolation import (
    InterpolationTargets,
    build_interpolant,
    residual_report,
    residuals_to_csv,
)
from .products import NodeSystem, _complex_from_json, lemma1_classify, validate_nodes
from .rescaling import (
    RescalingRun,
    check_not_compactly_divergent,
    contradiction_witness,
    convergence_to_csv,
    limit_identification,
    witness_to_csv,
)

COMMANDS = ("validate", "lemma1", "interpolate", "curve", "rescale", "full")
CONFIG_KEYS = {"variant", "inner", "metric", "nodes", "p_targets", "targets", "rescaling",
               "perturbed", "witness_c", "lemma1", "tolerances"}
DEFAULT_TOL = {"residual": 1e-6, "blowup_rel": 1e-9, "exact_dev": 1e-10, "jrho": 1e-12}

SEQUENCES = {
    # name: (vectorised term, first index)
    "harmonic": (lambda n: 1.0 / n, 2),
    "inverse_square": (lambda n: 1.0 / n**2, 1),
    "geometric": (lambda n: 0.5 ** n, 1),
}


class StageFailure(Exception):
    def __init__(self, status, kind, message, **extra):
        super().__init__(message)
        self.status = status
        self.kind = kind
        self.extra = extra


def _sequence(name: str):
    if name in SEQUENCES:
        return SEQUENCES[name]
    if name.startswith("power:"):
        p = float(name.split(":", 1)[1])
        return (lambda n: 1.0 / n**p), 2
    raise ConfigError(f"unknown sequence {name!r}")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        for name in (p.name, p.name + ".json"):
            shipped = resources.files("brody_forge") / "configs" / name
            if shipped.is_file():
                return _check_config(json.loads(shipped.read_text()))
        raise FileNotFoundError(f"config not found: {path}")
    return _check_config(json.loads(p.read_text()))


def _check_config(cfg: dict) -> dict:
    extra = sorted(set(cfg) - CONFIG_KEYS)
    if extra:
        raise ConfigError(f"unknown config key(s): {', '.join(extra)}")
    return cfg


def _nodes(cfg) -> NodeSystem:
    return NodeSystem.from_json(cfg.get("nodes", {"kind": "geometric", "r": 4, "rho": 4, "j_max": 8}))


def _curve(cfg, tol):
    variant = cfg.get("variant", "punctured")
    inner = InnerCurve.from_json(cfg["inner"]) if "inner" in cfg else None
    metric = MetricSpec.from_json(cfg["metric"]) if "metric" in cfg else None
    p = cfg.get("p_targets")
    if p is not None:
        p = [_complex_from_json(x) for x in p]
    try:
        return build_curve(variant, inner, metric, _nodes(cfg), p, residual_tol=tol["residual"])
    except ResidualError as exc:
        raise StageFailure(2, "residual", str(exc)) from exc


class Runner:
    def __init__(self, cfg, out: Path, fmt: str, tol: dict):
        self.cfg = cfg
        self.out = out
        self.fmt = fmt
        self.tol = tol
        self.plot = {}
        self.curve = None

    def write(self, stem: str, csv_text: str | None, records):
        if self.fmt == "csv" and csv_text is not None:
            (self.out / f"{stem}.csv").write_text(csv_text)
        else:
            (self.out / f"{stem}.json").write_text(reports.dump_json(records))

    def write_json(self, name: str, obj):
        (self.out / name).write_text(reports.dump_json(obj))

    def validate(self):
        nodes = _nodes(self.cfg)
        report = validate_nodes(nodes)
        self.write_json("validation.json", {"ok": report.ok, "violations": list(report.violations),
                                            "tail_bound": nodes.tail_bound})
        if not report.ok:
            raise StageFailure(1, "validation", "invalid node system",
                               violations=list(report.violations))

    def lemma1(self, seq=None, N=None):
        spec = dict(self.cfg.get("lemma1", {}))
        seq = seq or spec.get("seq", "inverse_square")
        N = int(N or spec.get("N", 10000))
        fn, start = _sequence(seq)
        rep = lemma1_classify(fn, N, start=start)
        self.write("lemma1", rep.to_csv(), [
            {"N": int(n), "sum": s, "prod_plus": pp,
             "prod_minus": None if rep.partial_products_minus is None else rep.partial_products_minus[i]}
            for i, (n, s, pp) in enumerate(zip(rep.n, rep.partial_sums, rep.partial_products_plus))
        ])
        self.write_json("lemma1_summary.json", {
            "seq": seq, "N": N, "verdict": rep.verdict, "clause_c": rep.clause_c,
            "sum": rep.partial_sums[-1], "prod_plus": rep.partial_products_plus[-1],
        })
        if rep.verdict == "inconsistent":
            raise StageFailure(2, "lemma1", "sum and product detectors disagree")

    def interpolate(self):
        if "targets" in self.cfg:
            nodes = _nodes(self.cfg)
            validate_nodes(nodes).raise_if_invalid()
            interp = build_interpolant(nodes, InterpolationTargets.from_json(self.cfg["targets"]))
        else:
            self.curve = _curve(self.cfg, self.tol)
            interp = self.curve.interpolant
        rows = residual_report(interp)
        self.write_json("interpolant.json", interp.to_json())
        self.write("residuals", residuals_to_csv(rows), reports.rows_to_records(rows))
        self.plot["residuals"] = rows
        worst = max(max(r.rel_val_res, r.rel_der_res) for r in rows)
        if not worst <= self.tol["residual"]:
            raise StageFailure(2, "residual", f"relative residual {worst:.3g} above tolerance")

    def curve_stage(self):
        if self.curve is None:
            self.curve = _curve(self.cfg, self.tol)
        rows = residual_report(self.curve.interpolant)
        self.write("residuals", residuals_to_csv(rows), reports.rows_to_records(rows))
        self.plot["residuals"] = rows
        try:
            blow = blowup_table(self.curve, self.tol["blowup_rel"])
        except ArithmeticError as exc:
            raise StageFailure(2, "blowup", str(exc)) from exc
        self.write("blowup", blowup_to_csv(blow), reports.rows_to_records(blow))
        self.write_json("curve.json", self.curve.to_json())
        self.plot["blowup"] = blow

    def rescale(self):
        if self.curve is None:
            self.curve = _curve(self.cfg, self.tol)
        curve = self.curve
        runs = [("convergence", self.cfg.get("rescaling", {}))]
        if "perturbed" in self.cfg:
            runs.append(("convergence_perturbed", self.cfg["perturbed"]))
        first_run = None
        for stem, spec in runs:
            try:
                run = RescalingRun.from_json(curve, spec)
                rows = limit_identification(run)
            except ArithmeticError as exc:
                raise StageFailure(2, "rescale", str(exc)) from exc
            first_run = first_run or run
            self.write(stem, convergence_to_csv(rows), reports.rows_to_records(rows))
            self.plot[stem] = rows
            self._check_rows(run, rows)
        nc = check_not_compactly_divergent(curve, range(1, 65))
        self.write_json("noncompact.json", nc)
        if not nc["passed"]:
            raise StageFailure(2, "rescale", "f_n(0) depends on n")
        witness = contradiction_witness(first_run, self.cfg.get("witness_c", [5, 10, 20]))
        self.write("witness", witness_to_csv(witness), witness)

    def _check_rows(self, run, rows):
        if run.delta == 0:
            for r in rows:
                if r.dev_full_map > self.tol["exact_dev"] or r.dev_first_coord > self.tol["exact_dev"]:
                    raise StageFailure(2, "rescale", f"exact-case deviation at j={r.j}")
                if abs(r.jrho_measured - r.jrho_exact) > self.tol["jrho"] * r.jrho_exact:
                    raise StageFailure(2, "rescale", f"measured j*rho_j drifts at j={r.j}")
        else:
            devs = [r.dev_full_map for r in rows]
            if any(b >= a for a, b in zip(devs, devs[1:])):
                raise StageFailure(2, "rescale", "perturbed deviations do not decrease")

    def finish(self):
        if self.plot:
            (self.out / "plot_data.csv").write_text(reports.emit_plot_data(self.plot))


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="brody-forge", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config path or name of a shipped config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--seq", help="lemma1 sequence: harmonic, inverse_square, geometric, power:p")
    parser.add_argument("--N", type=int, help="lemma1 number of terms")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        tol = dict(DEFAULT_TOL)
        tol.update({k: float(v) for k, v in (cfg.get("tolerances") or {}).items()})
        for item in args.tol:
            key, _, value = item.partition("=")
            if key not in DEFAULT_TOL:
                raise ConfigError(f"unknown tolerance key {key!r}")
            tol[key] = float(value)
        unknown_tol = set(tol) - set(DEFAULT_TOL)
        if unknown_tol:
            raise ConfigError(f"unknown tolerance key(s): {', '.join(sorted(unknown_tol))}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        runner = Runner(cfg, out, args.format, tol)
        if args.command == "validate":
            runner.validate()
        elif args.command == "lemma1":
            runner.lemma1(args.seq, args.N)
        elif args.command == "interpolate":
            runner.validate()
            runner.interpolate()
        elif args.command == "curve":
            runner.validate()
            runner.curve_stage()
        elif args.command == "rescale":
            runner.validate()
            runner.rescale()
        else:
            runner.validate()
            runner.interpolate()
            runner.curve_stage()
            runner.rescale()
        runner.finish()
    except StageFailure as exc:
        _report_error(exc.status, exc.kind, str(exc), **exc.extra)
        return exc.status
    except NodeValidationError as exc:
        _report_error(1, "validation", str(exc), violations=exc.violations)
        return 1
    except (ConfigError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _report_error(1, "config", str(exc))
        return 1
    except OSError as exc:
        _report_error(3, "io", str(exc))
        return 3
    return 0


def _report_error(status, kind, message, **extra):
    payload = {"status": status, "error": kind, "message": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main():
    np.seterr(all="ignore")
    sys.exit(run())


if __name__ == "__main__":
    main()
