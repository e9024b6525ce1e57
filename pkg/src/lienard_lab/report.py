"""Full analysis orchestration and machine-readable reports.

The pipeline runs: partition -> bounds -> direct-simulation cycle scan ->
center detection -> amplitude-candidate scan per interval -> identity
checks on the extracted branches -> cross-check between the two routes.
Reports serialize to deterministic JSON (schema "lienard-lab/1", sorted
keys, 17-significant-digit floats).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle as oracle_mod
from . import phi as phi_mod
from .errors import DegenerateInput, NoReturn, StepUnderflow
from .identities import verify_parts_identity
from .oracle import LimitCycle, OracleOptions, Trajectory
from .partition import CriticalPartition, build_partition, degree_bound, partition_bound
from .phi import PhiOptions, PhiTrajectory
from .poly import Polynomial

SCHEMA = "lienard-lab/1"
AMPLITUDE_MATCH_TOL = 1e-3  # oracle amplitude vs candidate agreement
BORDER_TOL = 1e-4           # amplitude-to-border distance that waives matching


@dataclass(frozen=True)
class AnalysisConfig:
    """Input system and scan settings.

    ``coefficients`` are ascending starting at degree one (the constant
    term of F is identically zero); with ``input_kind="F_prime"`` they
    describe F' starting at degree zero and F is recovered by
    antidifferentiation.
    """

    coefficients: tuple[float, ...]
    input_kind: str = "F"  # "F" | "F_prime"
    x_max: float | None = None
    scan_lo: float | None = None
    scan_hi: float | None = None
    grid_n: int = 200
    center_grid_n: int = 60
    phi_magnitudes: int = 24
    amplitude_grid_n: int = 24
    oracle_rtol: float | None = None
    oracle_atol: float | None = None
    phi_rtol: float | None = None
    phi_atol: float | None = None
    fixed_point_tol: float | None = None
    center_tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.input_kind not in ("F", "F_prime"):
            raise DegenerateInput(f"unknown input_kind {self.input_kind!r}")
        if not self.coefficients:
            raise DegenerateInput("coefficients must be nonempty")
        if self.coefficients[-1] == 0.0:
            raise DegenerateInput("highest-degree coefficient must be nonzero")

    def build_F(self) -> tuple[Polynomial, list[str]]:
        warnings: list[str] = []
        if self.input_kind == "F_prime":
            Fp = Polynomial(self.coefficients)
            F = Fp.antiderivative()
            warnings.append(
                "coefficients were supplied as F'; F was reconstructed by "
                "antidifferentiation with zero constant term (F/F' input "
                "ambiguity noted)"
            )
        else:
            F = Polynomial((0.0,) + self.coefficients)
        if F.degree < 1:
            raise DegenerateInput("F must be nonconstant")
        return F, warnings

    def to_dict(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "input_kind": self.input_kind,
            "x_max": self.x_max,
            "scan_lo": self.scan_lo,
            "scan_hi": self.scan_hi,
            "grid_n": self.grid_n,
            "center_grid_n": self.center_grid_n,
            "phi_magnitudes": self.phi_magnitudes,
            "amplitude_grid_n": self.amplitude_grid_n,
            "oracle_rtol": self.oracle_rtol,
            "oracle_atol": self.oracle_atol,
            "phi_rtol": self.phi_rtol,
            "phi_atol": self.phi_atol,
            "fixed_point_tol": self.fixed_point_tol,
            "center_tol": self.center_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        return cls(**{k: (tuple(v) if k == "coefficients" else v) for k, v in d.items()})


@dataclass(frozen=True)
class AnalysisReport:
    config: dict
    degree: int
    degree_bound: int
    partition_bound: int
    critical_points: tuple[float, ...]
    intervals: tuple[dict, ...]
    x_max: float
    cycles: tuple[dict, ...]
    phi_candidates: tuple[dict, ...]
    phi_continuum: bool
    center_detected: bool
    center_evidence: dict
    identity_residuals: dict | None
    cross_check_consistent: bool
    cross_check_notes: tuple[str, ...]
    warnings: tuple[str, ...]
    partial: bool
    schema: str = SCHEMA

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "config": self.config,
            "degree": self.degree,
            "degree_bound": self.degree_bound,
            "partition_bound": self.partition_bound,
            "critical_points": list(self.critical_points),
            "intervals": list(self.intervals),
            "x_max": self.x_max,
            "cycles": list(self.cycles),
            "phi_candidates": list(self.phi_candidates),
            "phi_continuum": self.phi_continuum,
            "center_detected": self.center_detected,
            "center_evidence": self.center_evidence,
            "identity_residuals": self.identity_residuals,
            "cross_check_consistent": self.cross_check_consistent,
            "cross_check_notes": list(self.cross_check_notes),
            "warnings": list(self.warnings),
            "partial": self.partial,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        d = dict(d)
        return cls(
            schema=d["schema"],
            config=d["config"],
            degree=d["degree"],
            degree_bound=d["degree_bound"],
            partition_bound=d["partition_bound"],
            critical_points=tuple(d["critical_points"]),
            intervals=tuple(d["intervals"]),
            x_max=d["x_max"],
            cycles=tuple(d["cycles"]),
            phi_candidates=tuple(d["phi_candidates"]),
            phi_continuum=d["phi_continuum"],
            center_detected=d["center_detected"],
            center_evidence=d["center_evidence"],
            identity_residuals=d["identity_residuals"],
            cross_check_consistent=d["cross_check_consistent"],
            cross_check_notes=tuple(d["cross_check_notes"]),
            warnings=tuple(d["warnings"]),
            partial=d["partial"],
        )


# ---------------------------------------------------------------------------
# deterministic JSON


def _render_json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return "null"
        if v == int(v) and abs(v) < 1e16:
            return format(v, ".1f")
        return format(v, ".17g")
    if isinstance(v, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_render_json(v[k])}" for k in sorted(v))
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_render_json(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)!r}")


def serialize_report(r: AnalysisReport, path) -> None:
    """Write the report as deterministic JSON (byte-identical across runs)."""
    text = _render_json(r.to_dict())
    try:
        with open(path, "w") as fh:
            fh.write(text)
            fh.write("\n")
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e


def report_json(r: AnalysisReport) -> str:
    return _render_json(r.to_dict())


def parse_report(path) -> AnalysisReport:
    with open(path) as fh:
        return AnalysisReport.from_dict(json.load(fh))


def emit_csv(samples, path) -> None:
    """Write trajectory samples as CSV (x,phi branches or t,x,y orbits)."""
    try:
        with open(path, "w") as fh:
            if isinstance(samples, PhiTrajectory):
                fh.write("x,phi\n")
                for x, p in zip(samples.xs, samples.phis):
                    fh.write(f"{x:.17g},{p:.17g}\n")
            elif isinstance(samples, Trajectory):
                fh.write("t,x,y\n")
                for t, x, y in zip(samples.ts, samples.xs, samples.ys):
                    fh.write(f"{t:.17g},{x:.17g},{y:.17g}\n")
            else:
                rows = list(samples)
                if rows and len(rows[0]) == 3:
                    fh.write("t,x,y\n")
                else:
                    fh.write("x,phi\n")
                for row in rows:
                    fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    except OSError as e:
        raise OSError(f"cannot write CSV to {path}: {e}") from e


# ---------------------------------------------------------------------------
# cross-check between the two routes


def cross_check_amplitude_intervals(
    partition: CriticalPartition,
    cycle_amplitudes: Sequence[float],
    candidate_amplitudes: Sequence[float],
    candidate_at_border: Sequence[bool] | None = None,
) -> tuple[bool, list[str]]:
    """Verify the interval-uniqueness conclusion between the two routes.

    (a) every partition-interval interior holds at most one simulated
    amplitude; (b) every simulated amplitude is matched by an amplitude
    candidate within tolerance, unless it sits on an interval border.
    """
    notes: list[str] = []
    ok = True

    borders = [0.0, *partition.critical_points, partition.x_max]

    def near_border(a: float) -> bool:
        return any(abs(a - b) <= BORDER_TOL * max(1.0, abs(b)) for b in borders)

    for i, iv in enumerate(partition.intervals):
        inside = [
            a for a in cycle_amplitudes
            if iv.lo + BORDER_TOL < a < iv.hi - BORDER_TOL
        ]
        if len(inside) > 1:
            ok = False
            notes.append(
                f"interval {i} ({iv.lo:.6g}, {iv.hi:.6g}) holds "
                f"{len(inside)} amplitudes: {sorted(inside)}"
            )

    for a in cycle_amplitudes:
        if near_border(a):
            notes.append(f"amplitude {a:.9g} lies on an interval border")
            continue
        match = min((abs(a - c) for c in candidate_amplitudes), default=math.inf)
        if match > AMPLITUDE_MATCH_TOL:
            ok = False
            notes.append(
                f"amplitude {a:.9g} has no candidate within "
                f"{AMPLITUDE_MATCH_TOL} (closest {match:.3g})"
            )
    return ok, notes


# ---------------------------------------------------------------------------
# pipeline


def _interval_index(partition: CriticalPartition, a: float) -> tuple[int, bool]:
    borders = [0.0, *partition.critical_points, partition.x_max]
    at_border = any(abs(a - b) <= BORDER_TOL * max(1.0, abs(b)) for b in borders)
    for i, iv in enumerate(partition.intervals):
        if iv.lo - BORDER_TOL <= a <= iv.hi + BORDER_TOL:
            return i, at_border
    return len(partition.intervals) - 1, at_border


def run_analysis(cfg: AnalysisConfig) -> AnalysisReport:
    """Run the full two-route analysis and assemble a report.

    Numerical failures in one stage degrade the report (``partial=True``
    with a warning) instead of aborting; a cycle count exceeding the degree
    bound raises, since it contradicts a structural invariant.
    """
    F, warnings = cfg.build_F()

    partition = build_partition(F, cfg.x_max)
    n = F.degree
    d_bound = degree_bound(n)
    p_bound = partition_bound(partition)

    o_opts = OracleOptions(
        rtol=cfg.oracle_rtol if cfg.oracle_rtol is not None else OracleOptions.rtol,
        atol=cfg.oracle_atol if cfg.oracle_atol is not None else OracleOptions.atol,
        fixed_point_tol=(
            cfg.fixed_point_tol if cfg.fixed_point_tol is not None else OracleOptions.fixed_point_tol
        ),
        center_tol=cfg.center_tol if cfg.center_tol is not None else OracleOptions.center_tol,
    )
    p_opts = PhiOptions(
        rtol=cfg.phi_rtol if cfg.phi_rtol is not None else PhiOptions.rtol,
        atol=cfg.phi_atol if cfg.phi_atol is not None else PhiOptions.atol,
    )

    scan_lo, scan_hi = oracle_mod.default_scan_range(partition.critical_points)
    if cfg.scan_lo is not None:
        scan_lo = cfg.scan_lo
    if cfg.scan_hi is not None:
        scan_hi = cfg.scan_hi

    partial = False

    cycles: list[LimitCycle] = []
    try:
        cycles = oracle_mod.find_limit_cycles(F, scan_lo, scan_hi, cfg.grid_n, o_opts)
    except (NoReturn, StepUnderflow) as e:
        partial = True
        warnings.append(f"cycle scan failed: {e}")

    center_hi = min(1.0, partition.x_max)
    center_detected, center_evidence = False, {}
    try:
        center_detected, center_evidence = oracle_mod.detect_center(
            F, 0.05, center_hi, cfg.center_grid_n, o_opts
        )
    except (NoReturn, StepUnderflow) as e:
        partial = True
        warnings.append(f"center detection failed: {e}")

    phi_grid = phi_mod.default_phi_grid(cfg.phi_magnitudes)
    scans = []
    for i in range(len(partition.intervals)):
        try:
            scans.append(
                phi_mod.find_amplitude_candidates(
                    F, partition, i, phi_grid, p_opts, cfg.amplitude_grid_n
                )
            )
        except (NoReturn, StepUnderflow) as e:
            partial = True
            warnings.append(f"candidate scan failed on interval {i}: {e}")
    candidates = [c for s in scans for c in s.candidates]
    phi_continuum = any(s.continuum for s in scans)
    for s in scans:
        if s.lemma_violated:
            warnings.append(
                f"interval {s.interval_index} interior holds more than one "
                "isolated amplitude candidate"
            )

    identity_residuals = None
    if cycles:
        energy_max = 0.0
        expansion_max = 0.0
        signs = set()
        for cyc in cycles:
            try:
                branch = oracle_mod.extract_phi_from_orbit(F, cyc)
            except Exception as e:  # DegenerateOrbit or resampling trouble
                partial = True
                warnings.append(f"branch extraction failed at A={cyc.amplitude:.6g}: {e}")
                continue
            energy_max = max(energy_max, phi_mod.verify_energy_identity(F, branch))
            rep = verify_parts_identity(F, branch)
            expansion_max = max(expansion_max, rep.residual)
            if rep.certified_sign != 0:
                signs.add(rep.certified_sign)
            cond = phi_mod.check_periodic_orbit_conditions(F, branch, cyc.amplitude)
            if not cond.all_ok:
                warnings.append(
                    f"orbit conditions failed at A={cyc.amplitude:.6g}: {cond}"
                )
        if len(signs) > 1:
            warnings.append("expansion sign certification disagrees between cycles")
        identity_residuals = {
            "energy": energy_max,
            "expansion": expansion_max,
            "expansion_sign": signs.pop() if len(signs) == 1 else 0,
        }

    if len(cycles) > d_bound:
        raise RuntimeError(
            f"{len(cycles)} cycles found, above the structural bound {d_bound}"
        )

    consistent, notes = cross_check_amplitude_intervals(
        partition,
        [c.amplitude for c in cycles],
        [c.A for c in candidates],
    )

    cycle_rows = []
    for cyc in cycles:
        idx, at_border = _interval_index(partition, cyc.amplitude)
        cycle_rows.append(
            {
                "amplitude": cyc.amplitude,
                "period": cyc.period,
                "stability": cyc.stability,
                "return_slope": cyc.return_slope,
                "interval_index": idx,
                "at_border": at_border,
            }
        )
    candidate_rows = [
        {
            "amplitude": c.A,
            "interval_index": c.interval_index,
            "at_border": c.at_border,
            "initial_phi": c.initial_phi,
        }
        for c in candidates
    ]

    return AnalysisReport(
        config=cfg.to_dict(),
        degree=n,
        degree_bound=d_bound,
        partition_bound=p_bound,
        critical_points=tuple(partition.critical_points),
        intervals=tuple(
            {"lo": iv.lo, "hi": iv.hi, "unbounded": iv.unbounded}
            for iv in partition.intervals
        ),
        x_max=partition.x_max,
        cycles=tuple(cycle_rows),
        phi_candidates=tuple(candidate_rows),
        phi_continuum=phi_continuum,
        center_detected=center_detected,
        center_evidence=center_evidence,
        identity_residuals=identity_residuals,
        cross_check_consistent=consistent,
        cross_check_notes=tuple(notes),
        warnings=tuple(warnings),
        partial=partial,
    )


def analysis_cycles(cfg: AnalysisConfig) -> list[LimitCycle]:
    """Oracle cycles only, using the config's scan settings."""
    F, _ = cfg.build_F()
    partition = build_partition(F, cfg.x_max)
    o_opts = OracleOptions()
    scan_lo, scan_hi = oracle_mod.default_scan_range(partition.critical_points)
    if cfg.scan_lo is not None:
        scan_lo = cfg.scan_lo
    if cfg.scan_hi is not None:
        scan_hi = cfg.scan_hi
    return oracle_mod.find_limit_cycles(F, scan_lo, scan_hi, cfg.grid_n, o_opts)
