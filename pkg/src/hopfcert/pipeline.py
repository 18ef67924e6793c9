"""Batch search: crossing -> Newton -> proof -> spectral gap -> l1, per eigenvalue pair."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .hopf import (
    CrossingError,
    EigenSelectionError,
    HopfCandidate,
    NewtonError,
    complex_pairs,
    equilibrium,
    initial_guess,
    locate_crossing,
    newton_solve,
)
from .interval import ComplexIntervalArray, IntervalArray
from .linalg import EigenEnclosure, SpectrumVerdict, spectral_gap_check
from .lyapunov import LyapunovResult, Sign, adjoint_eigvec, first_lyapunov
from .models import (
    DiagonalElement,
    GammaShift,
    OffDiagonalElement,
    VectorField,
    WeightStructure,
    antisymmetric_2d,
    fixture_4d,
    make_field,
    random_structure,
)
from .validator import Certificate, ValidationSettings, certified_box, validate


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyConfig:
    """Which vector field to study.

    ``kind`` is ``random`` (seeded antisymmetric RNN), ``fixture4d`` or
    ``antisymmetric2d``.  ``coupling`` selects how the parameter enters a
    random family: ``gamma_shift``, ``diagonal`` (index ``k``) or
    ``off_diagonal`` (indices ``i``, ``j``), the latter two around ``gamma0``.
    """

    kind: str = "random"
    n: int = 6
    seed: int = 0
    amplitude: float = 0.1
    coupling: str = "gamma_shift"
    layers: int = 1
    k: int = 0
    i: int = 0
    j: int = 1
    gamma0: float = 0.0
    a: float = 1.0

    def structure(self) -> WeightStructure:
        if self.kind == "fixture4d":
            return fixture_4d()
        if self.kind == "antisymmetric2d":
            return antisymmetric_2d(self.a)
        if self.kind != "random":
            raise ConfigError(f"unknown family kind {self.kind!r}")
        if self.coupling == "gamma_shift":
            coupling = GammaShift()
        elif self.coupling == "diagonal":
            coupling = DiagonalElement(self.k, self.gamma0)
        elif self.coupling == "off_diagonal":
            coupling = OffDiagonalElement(self.i, self.j, self.gamma0)
        else:
            raise ConfigError(f"unknown coupling {self.coupling!r}")
        try:
            return random_structure(self.n, self.seed, self.amplitude, coupling, self.layers)
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-12
    max_iter: int = 50
    R_cap: float = 1e-4
    R_max: float = 1e-1
    escalation: float = 10.0
    bracket: tuple = (-2.0, 2.0)
    crossing_tol: float = 1e-8
    max_expand: int = 6
    # later stages can be switched off for very large n (validation only)
    spectral_gap: bool = True
    lyapunov: bool = True

    def settings(self) -> ValidationSettings:
        return ValidationSettings(R_cap=self.R_cap, R_max=self.R_max, escalation=self.escalation)


@dataclass(frozen=True)
class OrbitConfig:
    """Non-rigorous transient-orbit export.

    The orbit is integrated at ``gamma_max + gamma_offset`` where
    ``gamma_max`` is the largest validated crossing.  ``mode`` is
    ``near-orbit`` (start on the predicted small orbit of that Hopf point)
    or ``random-far`` (uniform in ``[-far_box, far_box]^n``).
    """

    gamma_offset: float = 1e-3
    mode: str = "near-orbit"
    step: float = 0.01
    horizon: float = 100.0
    coords: tuple = (0, 1, 2, 3, 4, 5)
    far_box: float = 1.0
    seed: int = 0
    sample_every: int = 10


@dataclass(frozen=True)
class RunConfig:
    name: str = "run"
    family: FamilyConfig = field(default_factory=FamilyConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    pairs: object = "all"  # "all" or a tuple of pair indices
    output_dir: str = "out"
    workers: int = 1


def _build(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")
    kw = {}
    for k, v in data.items():
        kw[k] = tuple(v) if isinstance(v, list) else v
    return cls(**kw)


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    try:
        family = _build(FamilyConfig, data.pop("family", {}), "family")
        solver = _build(SolverConfig, data.pop("solver", {}), "solver")
        orbit = _build(OrbitConfig, data.pop("orbit", {}), "orbit")
        cfg = _build(RunConfig, data, "run")
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg = replace(cfg, family=family, solver=solver, orbit=orbit)
    if not (cfg.pairs == "all" or (isinstance(cfg.pairs, tuple) and all(isinstance(p, int) for p in cfg.pairs))):
        raise ConfigError("pairs must be \"all\" or a list of integers")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def read_toml(path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such file") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path) -> RunConfig:
    return config_from_dict(read_toml(path))


def config_to_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    return json.loads(json.dumps(d))


# ---------------------------------------------------------------------------
# per-pair processing
# ---------------------------------------------------------------------------


@dataclass
class PairResult:
    pair_index: int
    stage: str  # how far the pair got: crossing, newton, validated, gap, lyapunov
    message: str = ""
    gamma_crossing: float | None = None
    candidate: HopfCandidate | None = None
    certificate: Certificate | None = None
    spectrum: SpectrumVerdict | None = None
    lyapunov: LyapunovResult | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.candidate is not None

    @property
    def validated(self) -> bool:
        return self.certificate is not None and self.certificate.validated

    @property
    def gap_passed(self) -> bool:
        return self.spectrum is not None and self.spectrum.passed

    @property
    def nondegenerate(self) -> bool:
        return (
            self.validated
            and self.gap_passed
            and self.lyapunov is not None
            and self.lyapunov.sign is not Sign.INCONCLUSIVE
        )

    @property
    def status(self) -> str:
        if self.certificate is not None:
            return self.certificate.status.value
        return "NotFound"


def crossing_velocity(vf: VectorField, x, gamma, v: np.ndarray, w: np.ndarray) -> complex:
    """Non-rigorous d lambda / d gamma along the equilibrium branch."""
    J = vf.jacobian(x, gamma)
    dxdg = -np.linalg.solve(J, vf.dgamma(x, gamma))
    direction = np.concatenate([dxdg, [1.0]])[:, None]
    dJ = vf.d2_matrix(x, gamma, direction)[:, : vf.n]
    return complex(np.vdot(w, dJ @ v) / np.vdot(w, v))


def _axis_pair(cert: Certificate) -> EigenEnclosure:
    """The eigenvalue i*lambda_i admitted by the Hopf certificate."""
    r = cert.uniqueness_radius
    lam = ComplexIntervalArray(IntervalArray.zeros(()), IntervalArray.from_midrad(cert.candidate.lambda_i, r))
    return EigenEnclosure(lam, None, r, True)


def analyse_candidate(vf: VectorField, cand: HopfCandidate, solver: SolverConfig, result: PairResult) -> PairResult:
    """Prove, gap-check and compute l1 for a converged candidate (fills ``result``)."""
    if getattr(vf, "odd", False) and np.max(np.abs(cand.x)) < 1e-10:
        # centre the ball on the symmetric equilibrium; see certified_box
        cand = replace(cand, x=np.zeros_like(cand.x))
    if cand.lambda_i < 0:
        cand = replace(cand, lambda_i=-cand.lambda_i, v_i=-cand.v_i, phi=-cand.phi)
    result.candidate = cand
    cert = validate(vf, cand, solver.settings())
    result.certificate = cert
    if not cert.validated:
        result.stage = "newton"
        result.message = cert.metadata.get("reason", cert.status.value)
        return result
    result.stage = "validated"
    if not solver.spectral_gap:
        return result
    xb, gb = certified_box(vf, cert)
    J = vf.jacobian(xb, gb)
    verdict = spectral_gap_check(J, _axis_pair(cert))
    result.spectrum = verdict
    if not verdict.passed:
        result.message = verdict.reason
        return result
    result.stage = "gap"
    if not solver.lyapunov:
        return result
    upper = [e for e in verdict.enclosures if e.on_axis() and e.lam.im.lo > 0]
    enc = upper[0]
    adj = adjoint_eigvec(J, enc.lam)
    if not adj.conclusive:
        result.lyapunov = LyapunovResult(None, Sign.INCONCLUSIVE, reason="adjoint eigenvector: " + adj.reason)
        result.message = result.lyapunov.reason
        return result
    lyap = first_lyapunov(vf, (xb, gb), enc.v, adj.v, enc.lam, J)
    result.lyapunov = lyap
    if lyap.sign is Sign.INCONCLUSIVE:
        result.message = "l1 enclosure contains 0" if lyap.l1 is not None else lyap.reason
        return result
    result.stage = "lyapunov"
    # diagnostics only, not part of any proof
    try:
        mu = crossing_velocity(vf, cand.x, cand.gamma, enc.v.mid, adj.v.mid)
        result.metadata["dRe_lambda_dgamma"] = mu.real
        l1 = float(lyap.l1.mid)
        omega = cand.lambda_i
        if mu.real != 0.0 and l1 != 0.0:
            result.metadata["amplitude_coefficient"] = math.sqrt(2.0 * abs(mu.real) / (omega * abs(l1)))
            # the orbit exists where mu * (gamma - gamma_j) / l1 < 0
            result.metadata["branch_side"] = "above" if mu.real / l1 < 0 else "below"
    except np.linalg.LinAlgError:
        pass
    return result


def process_pair(vf: VectorField, pair_index: int, solver: SolverConfig, x0=None) -> PairResult:
    """Run one eigenvalue pair through the full pipeline; never raises on numerical failure."""
    result = PairResult(pair_index, stage="start")
    try:
        g = locate_crossing(vf, pair_index, solver.bracket, solver.crossing_tol, solver.max_expand, x0)
    except (CrossingError, NewtonError, np.linalg.LinAlgError) as exc:
        result.message = f"crossing: {exc}"
        return result
    result.gamma_crossing = g
    result.stage = "crossing"
    try:
        guess = initial_guess(vf, g, pair_index, x0)
        cand = newton_solve(vf, guess, solver.newton_tol, solver.max_iter)
    except (NewtonError, EigenSelectionError, np.linalg.LinAlgError) as exc:
        result.message = f"newton: {exc}"
        return result
    result.metadata["newton_iterations"] = cand.iterations
    return analyse_candidate(vf, cand, solver, result)


def _worker(args):
    structure, pair_index, solver = args
    return process_pair(make_field(structure), pair_index, solver)


def pair_indices(vf: VectorField, config: RunConfig) -> list:
    if config.pairs != "all":
        return list(config.pairs)
    x = equilibrium(vf, 0.0)
    return list(range(complex_pairs(vf.jacobian(x, 0.0))[0].size))


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class RunReport:
    config: RunConfig
    results: list
    timing: float = 0.0  # seconds; never serialised
    duplicates: list = field(default_factory=list)

    @property
    def attempted(self) -> int:
        return len(self.results) + len(self.duplicates)

    @property
    def found(self) -> int:
        return sum(r.found for r in self.results)

    @property
    def validated(self) -> int:
        return sum(r.validated for r in self.results)

    @property
    def gap_passed(self) -> int:
        return sum(r.gap_passed for r in self.results)

    @property
    def nondegenerate(self) -> int:
        return sum(r.nondegenerate for r in self.results)

    def counts(self) -> dict:
        return {
            "attempted": self.attempted,
            "found": self.found,
            "validated": self.validated,
            "gap_passed": self.gap_passed,
            "nondegenerate": self.nondegenerate,
            "duplicates": len(self.duplicates),
        }

    @property
    def all_succeeded(self) -> bool:
        """Every candidate that reached Newton convergence was fully certified."""
        failed_newton = any(r.stage == "crossing" for r in self.results)
        return not failed_newton and all(r.nondegenerate for r in self.results if r.found)


def _same_point(a: HopfCandidate, b: HopfCandidate, tol=1e-8) -> bool:
    return abs(a.gamma - b.gamma) <= tol and abs(a.lambda_i - b.lambda_i) <= tol and np.allclose(a.x, b.x, atol=tol)


def _sort_key(r: PairResult):
    g = r.candidate.gamma if r.found else math.inf
    return (g, r.pair_index)


def run_search(config: RunConfig, structure: WeightStructure | None = None) -> RunReport:
    """Run every selected pair; results are de-duplicated and sorted by gamma."""
    t0 = time.perf_counter()
    structure = structure or config.family.structure()
    vf = make_field(structure)
    indices = pair_indices(vf, config)
    if config.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_worker, [(structure, j, config.solver) for j in indices]))
    else:
        results = [process_pair(vf, j, config.solver) for j in indices]
    unique, dups = [], []
    for r in sorted(results, key=lambda r: r.pair_index):
        if r.found and any(u.found and _same_point(u.candidate, r.candidate) for u in unique):
            dups.append(r.pair_index)
            continue
        unique.append(r)
    unique.sort(key=_sort_key)
    return RunReport(config, unique, time.perf_counter() - t0, dups)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def decimal_down(x: float, digits: int = 17) -> str:
    """Decimal string <= x (rounded toward -inf)."""
    return _decimal(x, digits, ROUND_FLOOR)


def decimal_up(x: float, digits: int = 17) -> str:
    """Decimal string >= x (rounded toward +inf)."""
    return _decimal(x, digits, ROUND_CEILING)


def _decimal(x: float, digits: int, rounding) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = rounding
        return format(+Decimal(x), "E") if x != 0 else "0"


def _interval_record(iv: IntervalArray | None):
    if iv is None:
        return None
    return {"lo": decimal_down(float(iv.lo)), "hi": decimal_up(float(iv.hi))}


def _floats(a) -> list:
    return [repr(float(v)) for v in np.asarray(a, dtype=float).ravel()]


def certificate_record(r: PairResult) -> dict:
    rec = {
        "pair_index": r.pair_index,
        "status": r.status,
        "stage": r.stage,
        "message": r.message,
        "gamma_crossing": None if r.gamma_crossing is None else repr(r.gamma_crossing),
        "candidate": None,
        "bounds": None,
        "uniqueness_radius": None,
        "spectral_gap": None,
        "lyapunov": None,
        "metadata": {k: (repr(v) if isinstance(v, float) else v) for k, v in sorted(r.metadata.items())},
    }
    if r.candidate is not None:
        c = r.candidate
        rec["candidate"] = {
            "x": _floats(c.x),
            "gamma": repr(float(c.gamma)),
            "lambda_i": repr(float(c.lambda_i)),
            "v_r": _floats(c.v_r),
            "v_i": _floats(c.v_i),
            "phi": _floats(c.phi),
        }
    cert = r.certificate
    if cert is not None and cert.bounds is not None:
        b = cert.bounds
        rec["bounds"] = {
            "Y": decimal_up(b.Y),
            "Z1": decimal_up(b.Z1),
            "Z2": decimal_up(b.Z2),
            "R_cap": repr(b.R_cap),
            "r_minus": _interval_record(b.r_minus),
            "r_plus": _interval_record(b.r_plus),
        }
        if cert.uniqueness_radius is not None:
            rec["uniqueness_radius"] = decimal_up(cert.uniqueness_radius)
    if r.spectrum is not None:
        rec["spectral_gap"] = {
            "passed": r.spectrum.passed,
            "imaginary_axis_pairs": r.spectrum.imaginary_axis_pairs,
            "reason": r.spectrum.reason,
        }
    if r.lyapunov is not None:
        ly = r.lyapunov
        rec["lyapunov"] = {
            "sign": ly.sign.value,
            "l1": _interval_record(ly.l1),
            "quadratic": _interval_record(ly.quadratic),
            "cubic": _interval_record(ly.cubic),
            "reason": ly.reason,
        }
    return rec


def report_record(report: RunReport) -> dict:
    return {
        "config": config_to_dict(report.config),
        "counts": report.counts(),
        "duplicate_pairs": report.duplicates,
        "candidates": [certificate_record(r) for r in report.results],
    }


def report_json(report: RunReport) -> str:
    return json.dumps(report_record(report), indent=2, sort_keys=True) + "\n"


DIAGRAM_COLUMNS = (
    "pair_index",
    "gamma_j",
    "lambda_i",
    "r_minus",
    "l1_lo",
    "l1_hi",
    "status",
    "l1_sign",
    "branch",
    "branch_side",
    "amplitude_coefficient",
)


def diagram_rows(report: RunReport) -> list:
    rows = []
    for r in report.results:
        if not r.found:
            continue
        cert = r.certificate
        bounds = cert.bounds if cert is not None else None
        ly = r.lyapunov
        sign = ly.sign.value if ly is not None else ""
        branch = {"Positive": "subcritical", "Negative": "supercritical"}.get(sign, "")
        amp = r.metadata.get("amplitude_coefficient")
        rows.append(
            {
                "pair_index": r.pair_index,
                "gamma_j": repr(float(r.candidate.gamma)),
                "lambda_i": repr(float(r.candidate.lambda_i)),
                "r_minus": decimal_up(float(bounds.r_minus.hi)) if bounds is not None and bounds.r_minus is not None else "",
                "l1_lo": decimal_down(float(ly.l1.lo)) if ly is not None and ly.l1 is not None else "",
                "l1_hi": decimal_up(float(ly.l1.hi)) if ly is not None and ly.l1 is not None else "",
                "status": r.status,
                "l1_sign": sign,
                "branch": branch,
                "branch_side": r.metadata.get("branch_side", ""),
                "amplitude_coefficient": "" if amp is None else repr(float(amp)),
            }
        )
    return rows


def diagram_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=DIAGRAM_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(diagram_rows(report))
    return buf.getvalue()


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_certificates(report: RunReport, directory) -> list:
    """One JSON certificate per candidate; returns the written paths."""
    directory = Path(directory)
    paths = []
    for r in report.results:
        path = directory / f"certificate_pair{r.pair_index:03d}.json"
        _write(path, json.dumps(certificate_record(r), indent=2, sort_keys=True) + "\n")
        paths.append(path)
    _write(directory / "report.json", report_json(report))
    return paths


def emit_diagram(report: RunReport, directory) -> Path:
    path = Path(directory) / "diagram.csv"
    _write(path, diagram_csv(report))
    return path


# ---------------------------------------------------------------------------
# orbits (figure data, not rigorous)
# ---------------------------------------------------------------------------


def integrate_orbit(vf: VectorField, gamma: float, x0, step: float, horizon: float, sample_every: int = 1):
    """Classical fixed-step RK4; returns (times, states) sampled every ``sample_every`` steps."""
    x = np.asarray(x0, dtype=float).copy()
    nsteps = int(round(horizon / step))
    ts = [0.0]
    xs = [x.copy()]
    f = vf.f
    for k in range(1, nsteps + 1):
        k1 = f(x, gamma)
        k2 = f(x + 0.5 * step * k1, gamma)
        k3 = f(x + 0.5 * step * k2, gamma)
        k4 = f(x + step * k3, gamma)
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % sample_every == 0 or k == nsteps:
            ts.append(k * step)
            xs.append(x.copy())
    return np.asarray(ts), np.asarray(xs)


def orbit_initial_condition(vf: VectorField, report: RunReport, orbit: OrbitConfig):
    """(gamma, x0) for the configured orbit export, or None without a validated point."""
    done = [r for r in report.results if r.validated]
    if not done:
        return None
    top = max(done, key=lambda r: r.candidate.gamma)
    c = top.candidate
    gamma = c.gamma + orbit.gamma_offset
    if orbit.mode == "random-far":
        rng = np.random.default_rng(orbit.seed)
        return gamma, rng.uniform(-orbit.far_box, orbit.far_box, size=vf.n)
    if orbit.mode != "near-orbit":
        raise ConfigError(f"unknown orbit mode {orbit.mode!r}")
    coef = top.metadata.get("amplitude_coefficient")
    radius = coef * math.sqrt(abs(orbit.gamma_offset)) if coef else 1e-2
    q = c.v_r + 1j * c.v_i
    q = q / np.linalg.norm(q)
    return gamma, c.x + radius * np.sqrt(2.0) * q.real


def orbit_csv(ts, xs, coords) -> str:
    coords = [c for c in coords if c < xs.shape[1]]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"x{c}" for c in coords])
    for t, x in zip(ts, xs):
        writer.writerow([repr(float(t))] + [repr(float(x[c])) for c in coords])
    return buf.getvalue()
