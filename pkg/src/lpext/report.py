"""Run reports: JSON (full nested record) and CSV (flat trace plus summary)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .verifier import CheckLedger

__all__ = ["SolverOutput", "RunReport", "SWEEP_COLUMNS", "sweep_csv", "format_float"]

SWEEP_COLUMNS = ("p", "D", "m_p_direct", "m_p_irls", "fixed_point_residual", "iterations",
                 "dispersion")


def format_float(x) -> str:
    """17 significant digits, enough to round-trip a double exactly."""
    return format(float(x), ".17g")


def _coeffs_out(c):
    return [[float(z.real), float(z.imag)] for z in np.asarray(c, dtype=complex)]


@dataclass
class SolverOutput:
    method: str
    coeffs: list  # [[re, im], ...] aligned to ``basis``
    objective: float
    trace: list = field(default_factory=list)  # list of flat dicts
    certificate: dict = field(default_factory=dict)

    @classmethod
    def build(cls, method, F, objective, trace=(), certificate=None):
        rows = [r if isinstance(r, dict) else asdict(r) for r in trace]
        cert = {} if certificate is None else (
            certificate if isinstance(certificate, dict) else _plain(asdict(certificate)))
        return cls(method, _coeffs_out(F.coeffs), float(objective), rows, cert)

    def coefficient_array(self):
        return np.array([complex(a, b) for a, b in self.coeffs])


def _plain(obj):
    """Strip numpy scalars/arrays so the structure is JSON-serialisable."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _coeffs_out(obj)
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@dataclass
class RunReport:
    fingerprint: str
    config: dict
    basis: list
    outputs: list  # SolverOutput
    ledger: CheckLedger | None = None
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "fingerprint": self.fingerprint,
            "config": self.config,
            "basis": [list(a) for a in self.basis],
            "outputs": [asdict(o) for o in self.outputs],
            "ledger": None if self.ledger is None else self.ledger.to_dict(),
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["fingerprint"], d["config"], [tuple(a) for a in d["basis"]],
                   [SolverOutput(**o) for o in d["outputs"]],
                   None if d["ledger"] is None else CheckLedger.from_dict(d["ledger"]),
                   d["wall_time"])

    def to_json(self):
        # json emits the shortest repr of each float, which round-trips exactly
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_csv(self):
        """One ``trace`` row per solver iteration, then ``summary`` and ``check`` rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "method", "iteration", "eps", "objective", "iterate_diff",
                    "name", "value", "tolerance", "status"])
        for o in self.outputs:
            for i, row in enumerate(o.trace):
                w.writerow(["trace", o.method, row.get("iteration", i),
                            format_float(row.get("eps", float("nan"))),
                            format_float(row.get("objective", float("nan"))),
                            format_float(row.get("iterate_diff", float("nan"))),
                            "", "", "", ""])
        for o in self.outputs:
            w.writerow(["summary", o.method, "", "", format_float(o.objective), "",
                        "m_p", format_float(o.objective), "", ""])
        if self.ledger is not None:
            for c in self.ledger.checks:
                w.writerow(["check", "", "", "", "", "", c.name, format_float(c.residual),
                            format_float(c.tolerance), c.status])
        return buf.getvalue()


def sweep_csv(rows) -> str:
    """Rows are dicts keyed by ``SWEEP_COLUMNS``; output is sorted by (p, D)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in sorted(rows, key=lambda r: (r["p"], r["D"])):
        w.writerow([format_float(r["p"]), int(r["D"]), format_float(r["m_p_direct"]),
                    format_float(r["m_p_irls"]), format_float(r["fixed_point_residual"]),
                    int(r["iterations"]), format_float(r["dispersion"])])
    return buf.getvalue()
