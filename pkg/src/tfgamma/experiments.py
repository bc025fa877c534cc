"""Experiment configuration, the pipelines behind the CLI, and output files.

A configuration file holds one experiment as flat ``key = <json value>``
lines; ``#`` starts a comment.  Example::

    experiment = "gamma"
    dimension = 1
    density = {"kind": "gaussian", "sigma": 1.0, "cutoff": 3.0}
    grid = {"lower": [-4], "upper": [4], "n": 4096}
    external = {"type": "harmonic", "strength": 1.0}
    NList = [200, 2000]
"""

from __future__ import annotations

import csv
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .bounds import hartree_direct, interaction_channel, lieb_oxford_rhs, march_young_upper
from .densities import Grid, GridDensity, RadialDensity, lp_distance
from .errors import TFGammaError, ValidationError
from .fermi_box import (
    Ladder,
    ScalingRegime,
    build_recovery,
    default_grid,
    lowest_modes,
    sea_density,
    sea_kinetic,
    slater_direct_interaction,
)
from .potentials import coulomb_chi, coulomb_kernel, fdll_reconstruct, load_kernel, sample_potential
from .spectral import lowest_eigenvalues, weyl_convergence_table
from .tf import (
    TFProblem,
    atomic_energy_oracle,
    atomic_problem,
    tf_atom_shoot,
    tf_energy,
    tf_minimize,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("gamma", "gse", "tf-minimize", "tf-atom", "weyl", "fdll-verify", "bounds")

GSE_FOOTER = (
    "Quantum reference energies are exact only for non-interacting problems "
    "(harmonic or box wells, or finite-difference eigenvalues in d = 1); the "
    "interacting many-body ground state energy is not computed."
)

_DEFAULTS = {
    "dimension": 1,
    "q": 1,
    "density": None,
    "grid": None,
    "radial": None,
    "external": None,
    "interaction": None,
    "chi": None,
    "constraint": "equal",
    "mass": 1.0,
    "NList": None,
    "ladder": {"M0": 10.0, "growth": 1.25},
    "tolerances": {"tf": 1e-9, "mass": 1e-6, "shoot": 1e-8, "fdll": 1e-10},
    "damping": "optimal",
    "seed": 0,
    "output": None,
    "hList": None,
    "potential": None,
    "support": None,
    "points": None,
    "Zs": None,
    "fd_nodes": None,
}


@dataclass
class ExperimentConfig:
    experiment: str
    dimension: int = 1
    q: int = 1
    density: dict | None = None
    grid: dict | None = None
    radial: dict | None = None
    external: dict | None = None
    interaction: dict | None = None
    chi: str | None = None
    constraint: str = "equal"
    mass: float = 1.0
    NList: list | None = None
    ladder: dict = field(default_factory=lambda: dict(_DEFAULTS["ladder"]))
    tolerances: dict = field(default_factory=lambda: dict(_DEFAULTS["tolerances"]))
    damping: object = "optimal"
    seed: int = 0
    output: str | None = None
    hList: list | None = None
    potential: dict | None = None
    support: list | None = None
    points: list | None = None
    Zs: list | None = None
    fd_nodes: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}")
        tol = dict(_DEFAULTS["tolerances"])
        tol.update(self.tolerances or {})
        self.tolerances = tol
        if any(not (v > 0) for v in tol.values()):
            raise ValidationError("all tolerances must be positive")
        if self.NList is not None:
            if len(self.NList) == 0:
                raise ValidationError("NList must not be empty")
            if any(int(n) != n or n < 1 for n in self.NList):
                raise ValidationError("NList entries must be positive integers")
            if any(b <= a for a, b in zip(self.NList, self.NList[1:])):
                raise ValidationError("NList must be strictly increasing")
        if self.experiment in ("gamma", "gse") and not self.NList:
            raise ValidationError(f"experiment {self.experiment!r} needs a nonempty NList")
        if self.hList is not None and any(b >= a for a, b in zip(self.hList, self.hList[1:])):
            raise ValidationError("hList must be strictly decreasing")

    def as_dict(self) -> dict:
        return asdict(self)


def parse_config_text(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse ``key = <json>`` lines; ``experiment`` fills in a missing name."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key != "experiment" and key not in _DEFAULTS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = json.loads(_strip_comment(value.strip()))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {lineno}: invalid JSON for {key!r}: {exc}") from None
    if "experiment" not in values:
        if experiment is None:
            raise ValidationError("config has no 'experiment' key")
        values["experiment"] = experiment
    elif experiment is not None and values["experiment"] != experiment:
        raise ValidationError(f"config is for {values['experiment']!r}, not {experiment!r}")
    return ExperimentConfig(**values)


def _strip_comment(value: str) -> str:
    # a '#' outside a JSON string starts a trailing comment
    in_str = False
    escaped = False
    for i, ch in enumerate(value):
        if escaped:
            escaped = False
        elif ch == "\\":
            escaped = True
        elif ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return value[:i].strip()
    return value


def load_config(path, experiment: str | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, experiment)


def config_from_dict(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - set(_DEFAULTS) - {"experiment"}
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    return ExperimentConfig(**doc)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _grid_box(cfg: ExperimentConfig):
    g = cfg.grid
    if g is None:
        raise ValidationError("this experiment needs a 'grid' entry")
    d = cfg.dimension
    lower = np.broadcast_to(np.atleast_1d(np.asarray(g["lower"], dtype=float)), (d,))
    upper = np.broadcast_to(np.atleast_1d(np.asarray(g["upper"], dtype=float)), (d,))
    return lower, upper, int(g["n"])


def _profile(spec: dict, d: int):
    kind = spec.get("kind")
    if kind == "indicator":
        lo = np.broadcast_to(np.atleast_1d(np.asarray(spec.get("lower", 0.0), dtype=float)), (d,))
        hi = np.broadcast_to(np.atleast_1d(np.asarray(spec.get("upper", 1.0), dtype=float)), (d,))

        def func(*x):
            inside = np.ones(np.broadcast(*x).shape, dtype=bool)
            for xi, a, b in zip(x, lo, hi):
                inside &= (xi >= a) & (xi < b)
            return inside.astype(float)

        return func
    if kind == "gaussian":
        sigma = float(spec.get("sigma", 1.0))
        cutoff = float(spec.get("cutoff", math.inf))

        def func(*x):
            r2 = sum(xi**2 for xi in x)
            return np.where(r2 <= cutoff**2, np.exp(-r2 / (2 * sigma**2)), 0.0)

        return func
    if kind == "semicircle":
        a2 = float(spec.get("a2", 2.0))
        return lambda *x: np.sqrt(np.maximum(a2 - sum(xi**2 for xi in x), 0.0))
    raise ValidationError(f"unknown density kind {kind!r}")


def build_density(cfg: ExperimentConfig) -> GridDensity:
    """The configured density on the configured grid, normalized to mass 1."""
    spec = cfg.density
    if spec is None:
        raise ValidationError("this experiment needs a 'density' entry")
    if spec.get("kind") == "csv":
        f = GridDensity.from_csv(spec["path"])
    else:
        lower, upper, n = _grid_box(cfg)
        f = GridDensity.from_function(_profile(spec, cfg.dimension), lower, upper, n)
    if f.dimension != cfg.dimension:
        raise ValidationError("density dimension differs from the config")
    m = f.mass()
    if not m > 0:
        raise ValidationError("density has zero mass on the grid")
    return f.scaled(1.0 / m)


def build_radial_density(cfg: ExperimentConfig) -> RadialDensity:
    r = cfg.radial or {}
    prof = _profile(cfg.density, 1)
    f = RadialDensity.from_function(lambda t: prof(t), float(r.get("R", 8.0)), int(r.get("n", 2000)),
                                    cfg.dimension, r.get("mapping", "uniform"))
    return f.scaled(1.0 / f.mass())


def build_problem(cfg: ExperimentConfig) -> TFProblem:
    V = load_kernel(cfg.external) if cfg.external else None
    w = load_kernel(cfg.interaction) if cfg.interaction else None
    chi = coulomb_chi(cfg.dimension) if cfg.chi == "coulomb" else None
    return TFProblem(cfg.dimension, cfg.q, V, w, chi, cfg.constraint, cfg.mass)


def build_ladder(cfg: ExperimentConfig) -> Ladder:
    return Ladder(float(cfg.ladder.get("M0", 10.0)), float(cfg.ladder.get("growth", 1.25)))


# ---------------------------------------------------------------------------
# Gamma experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaRow:
    N: int
    k: int
    h: float
    lam: float
    h_scaled: float
    lam_scaled: float
    kinetic: float
    external: float
    interaction: float
    total: float
    tf_kinetic: float
    tf_external: float
    tf_interaction: float
    tf_total: float
    gap: float
    l1_distance: float
    lp_distance: float
    cubes: int
    wall_time: float


@dataclass
class GammaReport:
    rows: list
    tf_energy: dict
    config: dict
    complete: bool = True

    def to_json(self) -> dict:
        return {
            "experiment": "gamma",
            "complete": self.complete,
            "tf_energy": self.tf_energy,
            "rows": [asdict(r) for r in self.rows],
        }

    def tables(self) -> dict:
        # wall times stay in report.json so the CSV is reproducible bit for bit
        header = [k for k in GammaRow.__dataclass_fields__ if k != "wall_time"]
        return {"gamma.csv": (header, [[getattr(r, k) for k in header] for r in self.rows])}


class PartialReportError(TFGammaError):
    """A job failed; ``report`` holds the rows finished before it."""

    def __init__(self, cause: Exception, report):
        super().__init__(str(cause))
        self.cause = cause
        self.report = report


def _gamma_job(cfg_doc: dict, N: int, k: int) -> GammaRow:
    cfg = config_from_dict(cfg_doc)
    start = time.perf_counter()
    f = build_density(cfg)
    problem = build_problem(cfg)
    d = cfg.dimension
    regime = ScalingRegime.canonical(N, d)
    sea = build_recovery(f, N, k, cfg.tolerances["mass"])
    grid = default_grid(sea)
    fN = sea_density(sea, grid).scaled(1.0 / N)
    # per-particle pieces: N^{-1} [h^2 T + int V rho + lam D(rho, rho)]
    kinetic = regime.h**2 * sea_kinetic(sea) / N
    external = float(np.sum(sample_potential(problem.external, grid) * fN.values) * grid.cell_volume)
    interaction = regime.lam * N * slater_direct_interaction(fN, problem.interaction, 1.0)
    E = tf_energy(f, problem)
    total = kinetic + external + interaction
    return GammaRow(
        N=N, k=k, h=regime.h, lam=regime.lam,
        h_scaled=regime.h * N ** (1.0 / d), lam_scaled=regime.lam * N,
        kinetic=kinetic, external=external, interaction=interaction, total=total,
        tf_kinetic=E.kinetic, tf_external=E.external, tf_interaction=E.interaction, tf_total=E.total,
        gap=total - E.total,
        l1_distance=lp_distance(fN, f, 1.0),
        lp_distance=lp_distance(fN, f, 1.0 + 2.0 / d),
        cubes=len(sea.cubes),
        wall_time=time.perf_counter() - start,
    )


def run_gamma_experiment(cfg: ExperimentConfig, workers: int = 1) -> GammaReport:
    """Recovery-sea upper bounds along NList against E^TF(f)."""
    if cfg.NList is None or len(cfg.NList) == 0:
        raise ValidationError("NList must not be empty")
    f = build_density(cfg)
    problem = build_problem(cfg)
    E = tf_energy(f, problem)
    ladder = build_ladder(cfg)
    doc = cfg.as_dict()
    jobs = [(int(N), ladder.level(int(N))) for N in cfg.NList]
    rows = []
    report = GammaReport(rows, E.as_dict(), doc)
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                futures = [ex.submit(_gamma_job, doc, N, k) for N, k in jobs]
                for fut in futures:
                    rows.append(fut.result())
        else:
            for N, k in jobs:
                rows.append(_gamma_job(doc, N, k))
                log.info("gamma N=%d k=%d total=%.6g gap=%.3g", N, k, rows[-1].total, rows[-1].gap)
    except Exception as exc:
        report.complete = False
        raise PartialReportError(exc, report) from exc
    return report


# ---------------------------------------------------------------------------
# ground state energies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GSERow:
    N: int
    h: float
    quantum_per_particle: float
    tf_energy: float
    gap: float
    method: str


@dataclass
class GSEReport:
    rows: list
    tf_solution: dict
    config: dict
    footer: str = GSE_FOOTER

    def to_json(self) -> dict:
        return {"experiment": "gse", "tf_solution": self.tf_solution,
                "rows": [asdict(r) for r in self.rows], "footer": self.footer}

    def tables(self) -> dict:
        return {"gse.csv": (list(GSERow.__dataclass_fields__), [list(asdict(r).values()) for r in self.rows])}


def box_well_energy(N: int, d: int, side: float, h: float) -> float:
    """Sum of the N lowest h^2 |pi k / L|^2 in a cube of side L."""
    modes = lowest_modes(d, N)
    return h * h * math.pi**2 * float(np.sum(modes.astype(float) ** 2)) / side**2


def quantum_energy(cfg: ExperimentConfig, N: int):
    """(per-particle energy, method) of N non-interacting fermions with h = N^{-1/d}."""
    d = cfg.dimension
    h = N ** (-1.0 / d)
    ext = cfg.external or {"type": "zero"}
    kind = ext.get("type")
    if kind == "harmonic":
        a = float(ext.get("strength", 1.0))
        if d != 1:
            raise ValidationError("the exact harmonic reference is one-dimensional")
        # eigenvalues (2k + 1) h sqrt(a)
        return h * math.sqrt(a) * N * N / N, "harmonic-exact"
    if kind == "box":
        lower, upper, _ = _grid_box(cfg)
        side = float(upper[0] - lower[0])
        return box_well_energy(N, d, side, h) / N, "box-exact"
    if d != 1:
        raise ValidationError("finite-difference references are one-dimensional")
    V = load_kernel(ext)
    lower, upper, _ = _grid_box(cfg)
    n = int(cfg.fd_nodes or max(4000, 40 * N))
    ev = lowest_eigenvalues(lambda x: V(np.abs(x)), float(lower[0]), float(upper[0]), n, h, N)
    return float(np.sum(ev)) / N, "finite-difference"


def run_gse_experiment(cfg: ExperimentConfig, workers: int = 1) -> GSEReport:
    """Exact per-particle ground state energies against the TF minimum."""
    if cfg.interaction:
        raise ValidationError("the ground state reference needs w = 0")
    lower, upper, n = _grid_box(cfg)
    ext = cfg.external or {}
    if ext.get("type") == "box":
        problem = TFProblem(cfg.dimension, cfg.q, None, None, None, "equal", 1.0)
    else:
        problem = build_problem(cfg)
    spacing = float(upper[0] - lower[0]) / n
    grid = Grid(tuple(lower), spacing, (n,) * cfg.dimension)
    sol = tf_minimize(problem, grid, tol=cfg.tolerances["tf"], damping=cfg.damping)
    rows = []
    for N in cfg.NList:
        e, method = quantum_energy(cfg, int(N))
        rows.append(GSERow(int(N), int(N) ** (-1.0 / cfg.dimension), e, sol.energy.total, e - sol.energy.total, method))
    return GSEReport(rows, sol.to_json("tf_density.csv"), cfg.as_dict())


# ---------------------------------------------------------------------------
# smaller experiments
# ---------------------------------------------------------------------------


@dataclass
class SimpleReport:
    name: str
    payload: dict
    table_map: dict
    config: dict
    densities: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"experiment": self.name, **self.payload}

    def tables(self) -> dict:
        return self.table_map


def run_tf_minimize(cfg: ExperimentConfig, workers: int = 1) -> SimpleReport:
    problem = build_problem(cfg)
    if cfg.radial is not None:
        r = cfg.radial
        mesh = RadialDensity.from_function(lambda t: 0 * t, float(r.get("R", 60.0)), int(r.get("n", 2000)),
                                           cfg.dimension, r.get("mapping", "sqrt"))
    else:
        lower, upper, n = _grid_box(cfg)
        mesh = Grid(tuple(lower), float(upper[0] - lower[0]) / n, (n,) * cfg.dimension)
    sol = tf_minimize(problem, mesh, tol=cfg.tolerances["tf"], damping=cfg.damping)
    rep = SimpleReport("tf-minimize", sol.to_json("density.csv"), {}, cfg.as_dict())
    rep.densities["density.csv"] = sol.density
    return rep


def run_tf_atom(cfg: ExperimentConfig, workers: int = 1) -> SimpleReport:
    shoot = tf_atom_shoot(cfg.tolerances["shoot"])
    q = cfg.q if cfg.q != 1 else 2
    r = cfg.radial or {}
    Zs = cfg.Zs or [1.0, 2.0, 4.0]
    rows = []
    for Z in Zs:
        mesh = RadialDensity.from_function(lambda t: 0 * t, float(r.get("R", 60.0)), int(r.get("n", 4000)), 3,
                                           r.get("mapping", "sqrt"))
        sol = tf_minimize(atomic_problem(float(Z), q), mesh, tol=cfg.tolerances["tf"], damping=cfg.damping)
        oracle = atomic_energy_oracle(float(Z), q, shoot.slope)
        rows.append([float(Z), sol.energy.total, oracle, sol.energy.total / oracle - 1.0, sol.energy.total / float(Z) ** (7 / 3)])
    payload = {"slope": shoot.slope, "q": q, "atoms": [dict(zip(["Z", "energy", "oracle", "relative_error", "scaled"], r_)) for r_ in rows]}
    tables = {
        "atom.csv": (["Z", "energy", "oracle", "relative_error", "scaled"], rows),
        "screening.csv": (["x", "phi"], [[float(a), float(b)] for a, b in zip(shoot.x, shoot.phi)]),
    }
    return SimpleReport("tf-atom", payload, tables, cfg.as_dict())


def _well(spec: dict, d: int):
    depth = float(spec.get("depth", 1.0))
    radius = float(spec.get("radius", 1.0))
    return lambda *x: depth * np.maximum(1.0 - sum(xi**2 for xi in x) / radius**2, 0.0), radius


def run_weyl(cfg: ExperimentConfig, workers: int = 1) -> SimpleReport:
    U, radius = _well(cfg.potential or {}, cfg.dimension)
    hList = cfg.hList or [1e-1, 1e-2, 1e-3]
    support = cfg.support or [[-radius] * cfg.dimension, [radius] * cfg.dimension]
    table = weyl_convergence_table(U, hList, support, cfg.dimension, cfg.q, workers=workers)
    rows = [[r.h, r.negative_sum, r.weyl, r.ratio] for r in table.rows]
    return SimpleReport("weyl", {"rows": [dict(zip(["h", "negative_sum", "weyl", "ratio"], r)) for r in rows]},
                        {"weyl.csv": (["h", "negative_sum", "weyl", "ratio"], rows)}, cfg.as_dict())


def run_fdll_verify(cfg: ExperimentConfig, workers: int = 1) -> SimpleReport:
    chi = coulomb_chi(3)
    pts = cfg.points or [0.1, 0.5, 1.0, 4.0, 10.0]
    rows = []
    for p in pts:
        x = np.zeros(3)
        x[0] = float(p)
        val = fdll_reconstruct(chi, x, cfg.tolerances["fdll"])
        rows.append([float(p), val, 1.0 / float(p), abs(val * float(p) - 1.0)])
    return SimpleReport("fdll-verify", {"max_relative_error": max(r[3] for r in rows)},
                        {"fdll.csv": (["x", "reconstructed", "exact", "relative_error"], rows)}, cfg.as_dict())


def run_bounds(cfg: ExperimentConfig, workers: int = 1) -> SimpleReport:
    NList = cfg.NList or [100, 1000, 10000]
    payload = {}
    tables = {}
    if cfg.dimension == 3:
        f = build_radial_density(cfg)
        H = hartree_direct(f, coulomb_kernel())
        chi = coulomb_chi(3)
        rows = []
        for N in NList:
            c = interaction_channel(f, chi, float(N))
            rows.append([int(N), c.value, H, c.value / H, lieb_oxford_rhs(f, float(N))])
        payload["hartree"] = H
        tables["channel.csv"] = (["N", "channel", "hartree", "ratio", "lieb_oxford_rhs"], rows)
    elif cfg.dimension == 1:
        f = build_density(cfg)
        rows = [[int(N), march_young_upper(f, float(N), cfg.q)] for N in NList]
        tables["march_young.csv"] = (["N", "march_young_upper"], rows)
    else:
        raise ValidationError("bounds experiments run in d = 1 or d = 3")
    payload["rows"] = [dict(zip(tables[next(iter(tables))][0], r)) for r in rows]
    return SimpleReport("bounds", payload, tables, cfg.as_dict())


RUNNERS = {
    "gamma": run_gamma_experiment,
    "gse": run_gse_experiment,
    "tf-minimize": run_tf_minimize,
    "tf-atom": run_tf_atom,
    "weyl": run_weyl,
    "fdll-verify": run_fdll_verify,
    "bounds": run_bounds,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _write_radial_csv(path: Path, f: RadialDensity) -> None:
    _write_csv(path, ["r", "weight", "value"], zip(f.radii.tolist(), f.weights.tolist(), f.values.tolist()))


def _versions() -> dict:
    import numba
    import scipy

    return {"tfgamma": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def emit(report, out_dir, wall_times: dict | None = None) -> list:
    """Write report.json, the report's CSV tables and manifest.json into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, (header, rows) in report.tables().items():
            _write_csv(out / name, header, rows)
            written.append(name)
        for name, dens in getattr(report, "densities", {}).items():
            if isinstance(dens, RadialDensity):
                _write_radial_csv(out / name, dens)
            else:
                dens.to_csv(out / name)
            written.append(name)
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True, default=_json_default)
        written.append("report.json")
        manifest = {
            "config": report.config,
            "versions": _versions(),
            "backend": BACKEND,
            "wall_times": wall_times or {},
            "files": written + ["manifest.json"],
        }
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
    except OSError as exc:
        raise OSError(f"cannot write outputs to {out}: {exc}") from exc
    return written + ["manifest.json"]


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
