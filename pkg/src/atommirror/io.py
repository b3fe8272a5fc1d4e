"""Scenario configs, result envelopes and deterministic CSV output.

Configs are JSON documents; all detunings are in GAMMA0 units and all
separations in LAMBDA0 units so published parameter sets transcribe
directly.  Spectrum CSVs use the fixed schema

    delta_omega,re_r,im_r,R,phase,T,loss

with 12 significant digits and LF line endings; two runs of the same
config produce byte-identical CSV bodies.  Every output file is written
to a temp file first and renamed into place.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as _analysis
from .classical import (
    scatter_recurrence_many,
    scatter_transfer_matrix_many,
    _recurrence_rt_many,
)
from .core import (
    EmitterChain,
    POLE_NUDGE,
    PhaseModel,
    RIGID,
    build_chain,
    build_modulated_chain,
    build_uniform_chain,
    dispersive,
    make_grid,
)
from .eigen import chain_eigenmodes, scatter_modal_many
from .errors import ConfigError, InvalidParameterError
from .exact import ScatterPoint, Spectrum, sweep_spectrum

TOOL_NAME = "atommirror"
TOOL_VERSION = "0.1.0"

ENGINES = ("exact", "modal", "recurrence", "transfer-matrix")
CSV_HEADER = "delta_omega,re_r,im_r,R,phase,T,loss"
WORKERS_ENV = "ATOMMIRROR_WORKERS"


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: chain, engines, grid, phase model and analysis requests."""

    chain: EmitterChain
    chain_spec: dict
    engine: str
    grid_spec: tuple[float, float, int]
    model: PhaseModel
    threshold: float
    search_range: tuple[float, float] | None
    window: bool
    zeros: bool
    optimize: dict | None
    dissipation_gammas: tuple[float, ...] | None
    nudge: bool
    outdir: str
    prefix: str

    def grid(self) -> np.ndarray:
        lo, hi, count = self.grid_spec
        return make_grid(lo, hi, count)

    def to_dict(self) -> dict:
        """Canonical dictionary form (defaults materialized, keys ordered on dump)."""
        phase = {"kind": "rigid"} if self.model.is_rigid else {
            "kind": "dispersive",
            "ratio": self.model.ratio,
        }
        return {
            "chain": dict(self.chain_spec),
            "engine": self.engine,
            "grid": [self.grid_spec[0], self.grid_spec[1], self.grid_spec[2]],
            "phase_model": phase,
            "analysis": {
                "window_threshold": self.threshold,
                "search_range": list(self.search_range) if self.search_range else None,
                "window": self.window,
                "zeros": self.zeros,
                "optimize": dict(self.optimize) if self.optimize else None,
                "dissipation": list(self.dissipation_gammas)
                if self.dissipation_gammas is not None
                else None,
            },
            "nudge": self.nudge,
            "output": {"dir": self.outdir, "prefix": self.prefix},
        }

    def config_hash(self) -> str:
        """Deterministic hash of the semantic content (output paths excluded)."""
        body = self.to_dict()
        body.pop("output")
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def serialize_config(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def _build_chain_from_spec(spec: dict, problems: list[str]) -> tuple[EmitterChain | None, dict]:
    kind = spec.get("kind", "uniform")
    canonical: dict = {"kind": kind}
    if kind not in ("uniform", "modulated", "explicit"):
        problems.append(f"chain.kind: unknown kind {kind!r}")
        return None, canonical

    def _num(name, default=None, cond=None, msg=""):
        val = spec.get(name, default)
        if val is None:
            problems.append(f"chain.{name}: required")
            return None
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            problems.append(f"chain.{name}: must be a number, got {val!r}")
            return None
        if cond is not None and not cond(val):
            problems.append(f"chain.{name}: {msg}, got {val}")
            return None
        return float(val)

    if kind in ("uniform", "modulated"):
        n = spec.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            problems.append(f"chain.n: must be an integer >= 1, got {n!r}")
            n = None
        d = _num("d", cond=lambda v: v > 0, msg="must be > 0")
        g1 = _num("gamma1d", default=1.0, cond=lambda v: v > 0, msg="must be > 0")
        ge = _num("gamma_ext", default=0.0, cond=lambda v: v >= 0, msg="must be >= 0")
        step = None
        if kind == "modulated":
            step = _num("delta_step", default=None)
        if problems or n is None or d is None:
            return None, canonical
        canonical.update({"n": n, "d": d, "gamma1d": g1, "gamma_ext": ge})
        if kind == "uniform":
            return build_uniform_chain(n, d, g1, ge), canonical
        canonical["delta_step"] = step
        return build_modulated_chain(n, d, step, g1, ge), canonical

    positions = spec.get("positions")
    if not isinstance(positions, list) or not positions:
        problems.append("chain.positions: required non-empty list for explicit chains")
        return None, canonical
    detunings = spec.get("detunings", 0.0)
    g1 = spec.get("gamma1d", 1.0)
    ge = spec.get("gamma_ext", 0.0)
    canonical.update(
        {"positions": [float(p) for p in positions], "detunings": detunings,
         "gamma1d": g1, "gamma_ext": ge}
    )
    try:
        return build_chain(positions, detunings, g1, ge), canonical
    except InvalidParameterError as exc:
        problems.append(f"chain: {exc}")
        return None, canonical


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    All field-level problems are aggregated so a single pass reports every
    violated precondition.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])

    problems: list[str] = []

    chain_spec = dict(raw.get("chain", {}))
    # top-level shorthand for quick uniform/modulated configs
    for key in ("n", "d", "delta_step", "gamma1d", "gamma_ext"):
        if key in raw:
            chain_spec.setdefault(key, raw[key])
    if "kind" not in chain_spec:
        chain_spec["kind"] = "modulated" if "delta_step" in chain_spec else "uniform"
    chain, canonical_chain = _build_chain_from_spec(chain_spec, problems)

    grid_raw = raw.get("grid", [-3.0, 3.0, 601])
    if isinstance(grid_raw, dict):
        grid_raw = [grid_raw.get("min"), grid_raw.get("max"), grid_raw.get("count")]
    grid_spec = None
    if (
        isinstance(grid_raw, list)
        and len(grid_raw) == 3
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid_raw)
        and float(grid_raw[0]) < float(grid_raw[1])
        and int(grid_raw[2]) >= 2
        and int(grid_raw[2]) == grid_raw[2]
    ):
        grid_spec = (float(grid_raw[0]), float(grid_raw[1]), int(grid_raw[2]))
    else:
        problems.append(f"grid: expected [min, max, count] with min < max and integer count >= 2, got {grid_raw!r}")

    engine = raw.get("engine", "all")
    if engine not in ENGINES + ("all",):
        problems.append(f"engine: must be one of {ENGINES + ('all',)}, got {engine!r}")

    phase_raw = raw.get("phase_model", {"kind": "rigid"})
    model = RIGID
    if isinstance(phase_raw, dict) and phase_raw.get("kind", "rigid") == "rigid":
        model = RIGID
    elif isinstance(phase_raw, dict) and phase_raw.get("kind") == "dispersive":
        ratio = phase_raw.get("ratio")
        if not isinstance(ratio, (int, float)) or ratio <= 0:
            problems.append(f"phase_model.ratio: must be a positive number, got {ratio!r}")
        else:
            model = dispersive(float(ratio))
    else:
        problems.append(f"phase_model: expected rigid or dispersive spec, got {phase_raw!r}")

    ana = raw.get("analysis", {})
    if not isinstance(ana, dict):
        problems.append(f"analysis: must be an object, got {ana!r}")
        ana = {}
    threshold = ana.get("window_threshold", 0.99)
    if not isinstance(threshold, (int, float)) or not 0.0 < threshold < 1.0:
        problems.append(f"analysis.window_threshold: must lie in (0, 1), got {threshold!r}")
        threshold = 0.99
    search_range = ana.get("search_range")
    if search_range is not None:
        if (
            not isinstance(search_range, list)
            or len(search_range) != 2
            or not all(isinstance(v, (int, float)) for v in search_range)
            or not search_range[0] < search_range[1]
        ):
            problems.append(f"analysis.search_range: expected [lo, hi] with lo < hi, got {search_range!r}")
            search_range = None
        else:
            search_range = (float(search_range[0]), float(search_range[1]))
    window = bool(ana.get("window", False))
    zeros = bool(ana.get("zeros", False))
    optimize = ana.get("optimize")
    if optimize is not None:
        if not isinstance(optimize, dict) or not isinstance(optimize.get("n"), int) or optimize["n"] < 2:
            problems.append(f"analysis.optimize: expected {{'n': int >= 2, ...}}, got {optimize!r}")
            optimize = None
        else:
            optimize = {
                "n": optimize["n"],
                "d_range": list(optimize.get("d_range", [0.001, 0.5])),
            }
    gammas = ana.get("dissipation")
    if gammas is not None:
        if isinstance(gammas, dict):
            gammas = gammas.get("gammas")
        if (
            not isinstance(gammas, list)
            or not gammas
            or not all(isinstance(g, (int, float)) and g >= 0 for g in gammas)
        ):
            problems.append(f"analysis.dissipation: expected a list of loss rates >= 0, got {gammas!r}")
            gammas = None
        else:
            gammas = tuple(float(g) for g in gammas)

    out = raw.get("output", {})
    outdir = out.get("dir", ".") if isinstance(out, dict) else "."
    prefix = out.get("prefix", "run") if isinstance(out, dict) else "run"
    nudge = bool(raw.get("nudge", True))

    if problems or chain is None or grid_spec is None:
        raise ConfigError(problems or ["invalid configuration"])
    return ScenarioConfig(
        chain=chain,
        chain_spec=canonical_chain,
        engine=engine,
        grid_spec=grid_spec,
        model=model,
        threshold=float(threshold),
        search_range=search_range,
        window=window,
        zeros=zeros,
        optimize=optimize,
        dissipation_gammas=gammas,
        nudge=nudge,
        outdir=str(outdir),
        prefix=str(prefix),
    )


def atomic_write(path: Path, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def spectrum_csv(spectrum: Spectrum) -> str:
    lines = [CSV_HEADER]
    for p in spectrum.points:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (p.delta_omega, p.r.real, p.r.imag, p.R, p.phase, p.T, p.loss)
            )
        )
    return "\n".join(lines) + "\n"


def table_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def load_spectrum_csv(path: Path) -> list[ScatterPoint]:
    """Re-hydrate ScatterPoints from CSV (spot validation of emitted rows)."""
    points = []
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise InvalidParameterError(f"unexpected CSV header {header!r}")
        for line in fh:
            dw, re_r, im_r, _R, _phase, T, _loss = (float(v) for v in line.split(","))
            t = math.sqrt(max(T, 0.0))
            points.append(
                ScatterPoint.from_amplitudes(dw, complex(re_r, im_r), complex(t, 0.0))
            )
    return points


@dataclass
class ResultEnvelope:
    """Machine-readable record of a run: config echo, results, provenance."""

    config: dict
    results: dict = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @classmethod
    def for_config(cls, config: ScenarioConfig) -> "ResultEnvelope":
        return cls(
            config=config.to_dict(),
            provenance={
                "tool": TOOL_NAME,
                "version": TOOL_VERSION,
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                "config_hash": config.config_hash(),
            },
        )

    def to_json(self) -> str:
        body = {
            "config": self.config,
            "results": self.results,
            "files": self.files,
            "notes": self.notes,
            "provenance": self.provenance,
        }
        return json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n"

    def write(self, path: Path) -> None:
        atomic_write(Path(path), self.to_json())


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return {k: getattr(obj, k) for k in obj.__dataclass_fields__}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def effective_grid(chain: EmitterChain, grid: np.ndarray, model: PhaseModel) -> tuple[np.ndarray, list[float]]:
    """Shift grid points that sit exactly on lossless dark poles by POLE_NUDGE.

    Returns the adjusted grid and the list of original detunings that
    needed the nudge, so every engine evaluates the same probe set.
    """
    _, _, bad = _recurrence_rt_many(chain, np.asarray(grid, float), model,
                                    want_t=False, on_divergence="mask")
    if not np.any(bad):
        return np.asarray(grid, float), []
    adjusted = np.asarray(grid, float).copy()
    nudged = [float(v) for v in adjusted[bad]]
    adjusted[bad] += POLE_NUDGE
    return adjusted, nudged


def _spectrum_from_arrays(grid: np.ndarray, r: np.ndarray, t: np.ndarray) -> Spectrum:
    points = tuple(
        ScatterPoint.from_amplitudes(dw, rv, tv) for dw, rv, tv in zip(grid, r, t)
    )
    return Spectrum(grid=grid, points=points)


def compute_spectra(config: ScenarioConfig) -> tuple[dict[str, Spectrum], list[float]]:
    """Run the requested engines on the config grid (dark poles pre-nudged)."""
    wanted = ENGINES if config.engine == "all" else (config.engine,)
    grid = config.grid()
    if config.nudge:
        grid, nudged = effective_grid(config.chain, grid, config.model)
    else:
        nudged = []
    spectra: dict[str, Spectrum] = {}
    for engine in wanted:
        if engine == "exact":
            spectra[engine] = sweep_spectrum(
                config.chain, grid, config.model, nudge=False, workers=worker_count()
            )
        elif engine == "modal":
            r, t = scatter_modal_many(config.chain, grid, config.model)
            spectra[engine] = _spectrum_from_arrays(grid, r, t)
        elif engine == "recurrence":
            r, t = scatter_recurrence_many(config.chain, grid, config.model)
            spectra[engine] = _spectrum_from_arrays(grid, r, t)
        elif engine == "transfer-matrix":
            r, t = scatter_transfer_matrix_many(config.chain, grid, config.model)
            spectra[engine] = _spectrum_from_arrays(grid, r, t)
    return spectra, nudged


def cross_engine_summary(spectra: dict[str, Spectrum]) -> dict:
    """Max per-frequency amplitude deviation of every engine from the exact one."""
    if "exact" not in spectra or len(spectra) < 2:
        return {}
    r0, t0 = spectra["exact"].r, spectra["exact"].t
    out = {}
    for name, spec in spectra.items():
        if name == "exact":
            continue
        out[name] = {
            "max_abs_dr": float(np.max(np.abs(spec.r - r0))),
            "max_abs_dt": float(np.max(np.abs(spec.t - t0))),
        }
    return out


def run_scenario(config: ScenarioConfig, outdir: Path | None = None) -> ResultEnvelope:
    """Execute engines and requested analyses; write CSVs and the envelope."""
    outdir = Path(outdir if outdir is not None else config.outdir)
    envelope = ResultEnvelope.for_config(config)
    spectra, nudged = compute_spectra(config)
    if nudged:
        envelope.notes["nudged_points"] = nudged

    for engine, spectrum in spectra.items():
        fname = f"{config.prefix}_{engine.replace('-', '_')}.csv"
        atomic_write(outdir / fname, spectrum_csv(spectrum))
        envelope.files.append(fname)
        envelope.results.setdefault("engines", {})[engine] = {
            "points": len(spectrum),
            "max_R": float(np.max(spectrum.R)),
            "argmax_delta_omega": float(spectrum.grid[int(np.argmax(spectrum.R))]),
        }
    deviations = cross_engine_summary(spectra)
    if deviations:
        envelope.results["cross_engine"] = deviations

    if config.window:
        report = _analysis.extract_window(
            config.chain, config.threshold, config.search_range, config.model
        )
        envelope.results["window"] = report
    if config.zeros:
        rng = config.search_range or (config.grid_spec[0], config.grid_spec[1])
        zs = _analysis.find_zeros(config.chain, rng, config.model)
        envelope.results["zeros"] = {"count": len(zs), "crossings": zs}
        fname = f"{config.prefix}_zeros.csv"
        atomic_write(
            outdir / fname,
            table_csv(
                ["delta_omega", "residual_r", "phase_jump"],
                [[z.delta_omega, z.residual_r, z.phase_jump] for z in zs],
            ),
        )
        envelope.files.append(fname)
    if config.optimize:
        opt = _analysis.optimize_separation(
            config.optimize["n"],
            config.threshold,
            tuple(config.optimize["d_range"]),
            config.model,
        )
        envelope.results["optimize"] = opt
    if config.dissipation_gammas is not None:
        rows = _analysis.dissipation_study(
            [(config.prefix, config.chain)], config.dissipation_gammas,
            config.threshold, config.model,
        )
        envelope.results["dissipation"] = rows
        fname = f"{config.prefix}_dissipation.csv"
        atomic_write(
            outdir / fname,
            table_csv(
                ["scenario", "gamma_ext", "min_reflectivity", "window_lo", "window_hi"],
                [[r.scenario, r.gamma_ext, r.min_reflectivity, r.window_lo, r.window_hi] for r in rows],
            ),
        )
        envelope.files.append(fname)

    envelope.write(outdir / f"{config.prefix}_envelope.json")
    return envelope


def eigen_report(config: ScenarioConfig, outdir: Path | None = None) -> ResultEnvelope:
    """Eigenmode table of the config's chain."""
    outdir = Path(outdir if outdir is not None else config.outdir)
    envelope = ResultEnvelope.for_config(config)
    modes = chain_eigenmodes(config.chain, config.model, include_loss=True)
    rows = [
        [
            i,
            m.eigenvalue.real,
            m.eigenvalue.imag,
            m.decay,
            m.radiance,
            m.overlap.real,
            m.overlap.imag,
        ]
        for i, m in enumerate(modes.modes)
    ]
    fname = f"{config.prefix}_eigen.csv"
    atomic_write(
        outdir / fname,
        table_csv(
            ["index", "re_eigenvalue", "im_eigenvalue", "decay", "radiance",
             "re_overlap", "im_overlap"],
            rows,
        ),
    )
    envelope.files.append(fname)
    envelope.results["eigen"] = {
        "near_defective": modes.near_defective,
        "n_superradiant": sum(1 for m in modes.modes if m.radiance == "superradiant"),
        "n_subradiant": sum(1 for m in modes.modes if m.radiance == "subradiant"),
        "trace": complex(np.sum(modes.eigenvalues)),
    }
    envelope.write(outdir / f"{config.prefix}_envelope.json")
    return envelope
