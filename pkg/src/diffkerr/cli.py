"""Scenario runner: evolve a coherent state, emit grids, metrics and heatmaps.

Usage::

    diffkerr --preset fig4 --out runs/fig4
    diffkerr --alpha0 3 --g 0.1 --kappa 0.01 --times 0,pi/2g,pi/g --mode both --out runs/x
    diffkerr --config scenario.cfg --grid 201

Settings are resolved preset < config file < command-line flags.  Exit codes:
0 success, 2 configuration error, 3 invariant failure, 4 truncation or
stability error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import ModelParams
from .cdynamics import classical_grid, classical_nmax, evolve_classical, expand_initial
from .errors import ConfigError, DiffKerrError, TruncationError, TruncationWarning
from .fock import TAIL_TOL, coherent_density, fidelity_coherent, poisson_tail, purity
from .oracles import (
    RNG_ALGORITHM,
    SdeConfig,
    ensemble_histogram,
    histogram_l1_bound,
    integrate_master,
    sde_ensemble,
)
from .phasespace import (
    PhaseGrid,
    grid_integral,
    l1_distance,
    negativity_volume,
    wigner_from_density,
)
from .qdynamics import evolution_nmax, evolve, population_tail

__all__ = [
    "Scenario",
    "PRESETS",
    "METRIC_KEYS",
    "parse_time",
    "parse_config",
    "validate",
    "run",
    "write_grid",
    "read_grid",
    "main",
]

MODES = ("quantum", "classical", "both")
NORMALIZATIONS = ("paper", "standard")
COVERAGE_WIDTHS = 4.0

# one record per requested time; keys that do not apply to the run are null
METRIC_KEYS = (
    "time",
    "time_label",
    "nmax_quantum",
    "nmax_classical",
    "trace",
    "purity",
    "hermiticity_residual",
    "fidelity_plus",
    "fidelity_minus",
    "mass_quantum",
    "mass_classical",
    "negativity_quantum",
    "negativity_classical",
    "min_over_max_classical",
    "l1_quantum_classical",
    "oracle_quantum_max_diff",
    "oracle_classical_l1",
    "oracle_classical_l1_bound",
    "warnings",
)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one run."""

    alpha0: complex = 3.0
    g: float = 0.1
    kappa: float = 0.0
    times: tuple = ("0",)
    grid: int = 301
    window: float | None = None
    nmax: int | None = None
    mode: str = "quantum"
    oracle: bool = False
    normalization: str = "paper"
    seed: int = 0
    ntraj: int = 100_000
    out: str = "diffkerr-out"
    workers: int = 1
    omega: float = 1.0
    preset: str | None = None
    time_values: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            params = ModelParams(self.g, self.kappa)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.grid < 2:
            raise ConfigError("grid needs at least 2 points per axis")
        if self.window is not None and not self.window > 0:
            raise ConfigError("window radius must be positive")
        if self.nmax is not None and self.nmax < 1:
            raise ConfigError("nmax must be at least 1")
        if self.workers < 1 or self.ntraj < 1:
            raise ConfigError("workers and ntraj must be positive")
        if not self.times:
            raise ConfigError("at least one time is required")
        values = tuple(parse_time(tok, params.g) for tok in self.times)
        if any(v < 0 for v in values):
            raise ConfigError("times must be non-negative")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ConfigError("times must be sorted ascending")
        object.__setattr__(self, "time_values", values)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.g, self.kappa)

    @property
    def radius(self) -> float:
        return self.window if self.window is not None else abs(self.alpha0) + COVERAGE_WIDTHS

    @property
    def phase_grid(self) -> PhaseGrid:
        return PhaseGrid.square(self.radius, self.grid)

    def to_config(self) -> str:
        lines = []
        for key in CONFIG_KEYS:
            value = getattr(self, key)
            if value is None:
                continue
            if key == "times":
                value = ",".join(value)
            elif key == "alpha0":
                value = _format_complex(value)
            elif key == "oracle":
                value = "true" if value else "false"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


CONFIG_KEYS = (
    "preset",
    "alpha0",
    "g",
    "kappa",
    "omega",
    "times",
    "grid",
    "window",
    "nmax",
    "mode",
    "oracle",
    "normalization",
    "seed",
    "ntraj",
    "workers",
    "out",
)

_PRESET_BASE = dict(alpha0=3.0, g=0.1, omega=1.0)
PRESETS = {
    "fig1": dict(_PRESET_BASE, kappa=0.0, times=("0",), mode="both"),
    "fig2": dict(_PRESET_BASE, kappa=0.0, times=("pi/2g",), mode="classical"),
    "fig3": dict(_PRESET_BASE, kappa=0.01, times=("pi/2g", "pi/g"), mode="classical"),
    "fig4": dict(_PRESET_BASE, kappa=0.0, times=("pi/2g",), mode="quantum"),
    "fig5": dict(_PRESET_BASE, kappa=0.0, times=("pi/g",), mode="quantum"),
    "fig6": dict(_PRESET_BASE, kappa=0.01, times=("pi/2g", "pi/g"), mode="quantum"),
}


# ---------------------------------------------------------------------------
# parsing

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_TIME_RE = re.compile(
    rf"^(?P<coef>{_NUM})?\*?pi(?:/\(?(?P<den>{_NUM})?\*?(?P<g>g)?\)?)?$"
)


def parse_time(token: str, g: float) -> float:
    """Parse ``1.5``, ``pi/g``, ``pi/2g``, ``3pi/(2g)``, ``0.5*pi/g`` or ``2pi``.

    A trailing ``g`` divides by the coupling, so it needs ``g > 0``.
    """
    text = str(token).strip().replace(" ", "")
    try:
        return float(text)
    except ValueError:
        pass
    match = _TIME_RE.match(text)
    if not match:
        raise ConfigError(f"cannot parse time {token!r}")
    value = math.pi * float(match["coef"] or 1.0)
    if match["den"]:
        value /= float(match["den"])
    if match["g"]:
        if g <= 0:
            raise ConfigError(f"time {token!r} is a multiple of 1/g but g = {g}")
        value /= g
    return value


def _parse_complex(text: str) -> complex:
    try:
        return complex(str(text).strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex amplitude {text!r}") from exc


def _format_complex(z: complex) -> str:
    z = complex(z)
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+}j"


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def _none_or(conv):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none", "auto"):
            return None
        return conv(text)

    return parse


_CONVERTERS = {
    "preset": _none_or(str),
    "alpha0": _parse_complex,
    "g": float,
    "kappa": float,
    "omega": float,
    "times": lambda s: tuple(tok.strip() for tok in str(s).split(",") if tok.strip()),
    "grid": int,
    "window": _none_or(float),
    "nmax": _none_or(int),
    "mode": str,
    "oracle": _parse_bool,
    "normalization": str,
    "seed": int,
    "ntraj": int,
    "workers": int,
    "out": str,
}


def _convert(key: str, value):
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        return _CONVERTERS[key](value)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = _convert(key, value)
    return out


def build_scenario(preset: str | None = None, config: dict | None = None, overrides: dict | None = None) -> Scenario:
    settings = {}
    config = dict(config or {})
    overrides = dict(overrides or {})
    name = overrides.get("preset") or config.get("preset") or preset
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        settings.update(PRESETS[name])
        settings["preset"] = name
    settings.update(config)
    settings.update(overrides)
    return Scenario(**settings)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    level: str  # "ok", "warning" or "failure"
    check: str
    message: str


@dataclass(frozen=True)
class Report:
    findings: tuple

    @property
    def ok(self) -> bool:
        return not any(f.level == "failure" for f in self.findings)

    @property
    def warnings(self) -> list:
        return [f for f in self.findings if f.level == "warning"]

    @property
    def failures(self) -> list:
        return [f for f in self.findings if f.level == "failure"]

    def format(self) -> str:
        return "\n".join(f"[{f.level}] {f.check}: {f.message}" for f in self.findings)


def validate(scenario: Scenario) -> Report:
    """Check truncation, window coverage and oracle step sizes without running anything heavy."""
    found = []
    params = scenario.params
    a0 = scenario.alpha0
    tmax = scenario.time_values[-1]

    if scenario.nmax is not None:
        tail0 = poisson_tail(abs(a0) ** 2, scenario.nmax)
        if tail0 > TAIL_TOL:
            found.append(Finding("failure", "truncation",
                                 f"initial Poisson tail above nmax={scenario.nmax} is {tail0:.2e} (> {TAIL_TOL:.0e})"))
        else:
            tail_t = float(population_tail(a0, tmax, params, 2 * scenario.nmax + 20)[scenario.nmax])
            level = "ok" if tail_t <= TAIL_TOL else "warning"
            found.append(Finding(level, "truncation",
                                 f"nmax={scenario.nmax}: evolved tail at t={tmax:.6g} is {tail_t:.2e}"))
    else:
        found.append(Finding("ok", "truncation",
                             f"automatic nmax={evolution_nmax(a0, tmax, params)} (quantum)"))
        if scenario.mode in ("classical", "both"):
            for tok, t in zip(scenario.times, scenario.time_values):
                try:
                    n = classical_nmax(a0, t, params)
                    found.append(Finding("ok", "truncation", f"classical nmax={n} at t={tok}"))
                except TruncationError as exc:
                    found.append(Finding("failure", "truncation", f"t={tok}: {exc}; pass nmax explicitly to proceed"))

    need = abs(a0) + COVERAGE_WIDTHS
    if scenario.radius < need:
        found.append(Finding("warning", "coverage",
                             f"window radius {scenario.radius:g} < |alpha0| + {COVERAGE_WIDTHS:g} = {need:g}"))
    else:
        found.append(Finding("ok", "coverage", f"window radius {scenario.radius:g}"))

    if scenario.oracle:
        sde = SdeConfig.for_params(params, scenario.ntraj, scenario.seed)
        found.append(Finding("ok", "stability",
                             f"RK4 uses dt <= min(1e-3, 1/max(g N^2, kappa N)); SDE dt={sde.dt:g}, {RNG_ALGORITHM}"))
    return Report(tuple(found))


# ---------------------------------------------------------------------------
# output


def _quantize(values: np.ndarray) -> np.ndarray:
    # values as they will read back from %.12e text
    return np.array([float(f"{v:.12e}") for v in values.ravel()]).reshape(values.shape)


def write_grid(path: Path, grid: PhaseGrid, *, normalization: str, time: float) -> None:
    """CSV with a 4-line ``#`` header; one line per Im(alpha) row, Re(alpha) varying fastest."""
    lines = [
        f"# window re_min={grid.re_min!r} re_max={grid.re_max!r} im_min={grid.im_min!r} im_max={grid.im_max!r}",
        f"# resolution nx={grid.nx} ny={grid.ny}",
        f"# normalization {normalization}",
        f"# time {time!r}",
    ]
    for j in range(grid.ny):
        lines.append(",".join(f"{v:.12e}" for v in grid.values[:, j]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_grid(path) -> tuple:
    """Inverse of :func:`write_grid`; returns ``(grid, normalization, time)``."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header, body = text[:4], text[4:]
    fields = dict(kv.split("=") for kv in header[0].split()[2:])
    res = dict(kv.split("=") for kv in header[1].split()[2:])
    normalization = header[2].split()[2]
    time = float(header[3].split()[2])
    nx, ny = int(res["nx"]), int(res["ny"])
    rows = np.array([[float(v) for v in line.split(",")] for line in body])
    if rows.shape != (ny, nx):
        raise ValueError(f"{path}: expected {ny} rows of {nx} values, got {rows.shape}")
    grid = PhaseGrid(
        float(fields["re_min"]), float(fields["re_max"]), float(fields["im_min"]), float(fields["im_max"]),
        nx, ny, values=rows.T,
    )
    return grid, normalization, time


def _diverging_rgb(values: np.ndarray) -> np.ndarray:
    """Blue (negative) through white (zero) to red (positive), symmetric about zero."""
    scale = float(np.max(np.abs(values))) or 1.0
    s = np.clip(values / scale, -1.0, 1.0)
    pos = np.clip(s, 0.0, 1.0)
    neg = np.clip(-s, 0.0, 1.0)
    r = 1.0 - 0.75 * neg
    gch = 1.0 - 0.8 * pos - 0.75 * neg
    b = 1.0 - 0.8 * pos
    rgb = np.stack([r, gch, b], axis=-1)
    return np.round(255.0 * rgb).astype(np.uint8)


def write_heatmap(path: Path, grid: PhaseGrid) -> None:
    from PIL import Image

    # image rows run from high Im(alpha) (top) to low; columns follow Re(alpha)
    rgb = _diverging_rgb(grid.values.T[::-1, :])
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def _emit(outdir: Path, stem: str, grid: PhaseGrid, scenario: Scenario, t: float) -> PhaseGrid:
    factor = 2.0 if scenario.normalization == "standard" else 1.0
    emitted = grid.with_values(_quantize(factor * grid.values))
    write_grid(outdir / f"{stem}.csv", emitted, normalization=scenario.normalization, time=t)
    write_heatmap(outdir / f"{stem}.png", emitted)
    return emitted


# ---------------------------------------------------------------------------
# running


def run(scenario: Scenario, *, log=None) -> list:
    """Execute the scenario, write the bundle into ``scenario.out`` and return the metric records."""
    log = log or (lambda msg: None)
    report = validate(scenario)
    for f in report.findings:
        if f.level != "ok":
            log(f"[{f.level}] {f.check}: {f.message}")
    if not report.ok:
        raise TruncationError("; ".join(f.message for f in report.failures))

    outdir = Path(scenario.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "scenario.cfg").write_text(scenario.to_config(), encoding="utf-8")

    params = scenario.params
    a0 = scenario.alpha0
    grid = scenario.phase_grid
    want_q = scenario.mode in ("quantum", "both")
    want_c = scenario.mode in ("classical", "both")
    nq = scenario.nmax or evolution_nmax(a0, scenario.time_values[-1], params)
    state0 = coherent_density(a0, nq) if want_q else None

    records = []
    for idx, (label, t) in enumerate(zip(scenario.times, scenario.time_values)):
        rec = dict.fromkeys(METRIC_KEYS)
        rec.update(time=t, time_label=label, warnings=[])
        stem = f"t{idx:02d}"
        wq = wc = None
        if want_q:
            state = evolve(state0, t, params)
            state.check()
            wq = wigner_from_density(state, grid, workers=scenario.workers)
            _emit(outdir, f"quantum_{stem}", wq, scenario, t)
            rec.update(
                nmax_quantum=nq,
                trace=state.trace().real,
                purity=purity(state),
                hermiticity_residual=state.hermiticity_residual(),
                fidelity_plus=fidelity_coherent(state, a0),
                fidelity_minus=fidelity_coherent(state, -a0),
                mass_quantum=grid_integral(wq),
                negativity_quantum=negativity_volume(wq),
            )
            if scenario.oracle:
                ref = integrate_master(state0, t, params)
                rec["oracle_quantum_max_diff"] = float(np.max(np.abs(ref.rho - state.rho)))
            log(f"t={label}: quantum done (nmax={nq})")
        if want_c:
            nc = scenario.nmax or classical_nmax(a0, t, params)
            if want_q:
                # same truncated coherent input on both sides
                nc = max(nc, nq)
            coeffs = evolve_classical(expand_initial(coherent_density(a0, nc)), t, params)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", TruncationWarning)
                wc = classical_grid(coeffs, grid, workers=scenario.workers)
            rec["warnings"].extend(str(w.message) for w in caught)
            _emit(outdir, f"classical_{stem}", wc, scenario, t)
            hi = float(wc.values.max())
            rec.update(
                nmax_classical=nc,
                mass_classical=grid_integral(wc),
                negativity_classical=negativity_volume(wc),
                min_over_max_classical=float(wc.values.min()) / hi if hi > 0 else None,
            )
            if scenario.oracle:
                cfg = SdeConfig.for_params(params, scenario.ntraj, scenario.seed)
                pts = sde_ensemble(a0, t, params, cfg, workers=scenario.workers)
                hist = ensemble_histogram(pts, grid)
                _emit(outdir, f"oracle_{stem}", hist, scenario, t)
                rec["oracle_classical_l1"] = l1_distance(hist, wc)
                rec["oracle_classical_l1_bound"] = histogram_l1_bound(wc, scenario.ntraj)
            log(f"t={label}: classical done (nmax={nc})")
        if wq is not None and wc is not None:
            rec["l1_quantum_classical"] = l1_distance(wq, wc)
        records.append(rec)

    with open(outdir / "metrics.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return records


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="diffkerr",
        description="Quantum and classical Kerr dynamics under phase-space diffusion.",
    )
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--alpha0", help="initial coherent amplitude, e.g. 3 or 2+1j")
    p.add_argument("--g", help="Kerr coupling")
    p.add_argument("--kappa", help="diffusion constant")
    p.add_argument("--omega", help="oscillator frequency (recorded only)")
    p.add_argument("--times", help="comma list; accepts pi/g, pi/2g, 3pi/(2g)")
    p.add_argument("--grid", help="points per axis")
    p.add_argument("--window", help="half-width of the square alpha window")
    p.add_argument("--nmax", help="Fock truncation (default: automatic)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--oracle", nargs="?", const="true", help="also run the brute-force oracles")
    p.add_argument("--normalization", choices=NORMALIZATIONS)
    p.add_argument("--seed")
    p.add_argument("--ntraj", help="SDE trajectories for the classical oracle")
    p.add_argument("--workers", help="threads for grid rendering and the SDE")
    p.add_argument("--out", help="output directory")
    p.add_argument("--check", action="store_true", help="print the validation report and exit")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        config = {}
        if args.config:
            try:
                config = parse_config(Path(args.config).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        overrides = {
            key: _convert(key, getattr(args, key))
            for key in CONFIG_KEYS
            if getattr(args, key, None) is not None
        }
        scenario = build_scenario(config=config, overrides=overrides)
        if args.check:
            report = validate(scenario)
            print(report.format())
            return 0 if report.ok else TruncationError.exit_code
        records = run(scenario, log=log)
        log(f"wrote {len(records)} time point(s) to {scenario.out}")
        return 0
    except DiffKerrError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
