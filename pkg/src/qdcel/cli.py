"""
Configuration files, parameter sweeps and the ``qdcel`` command line.

Configuration is a flat ``key = value`` text with ``[section]`` headers and
``#`` comments.  Energies in the ``[system]`` section are given in units of
``g1`` (itself in meV); angles are in radians and temperatures in kelvin.
Cavity detunings also accept ``-rabi``/``+rabi``, which track the
generalized Rabi frequency of the point being evaluated.

Sweeps are split into groups of points that share one generator (phases
only enter the observables), groups run on a process pool, and rows are
written back in sweep order.
"""
import argparse
import csv
import io
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import __version__
from .fokker_planck import drift_diffusion, solve_orders, with_phonon_variant
from .liouvillian import VARIANTS, SystemParams, build_generator, rabi_frequency
from .observables import (UndefinedValueError, coherences, dgcz_witness, dressed_populations,
                          g2_zero, mean_photons, quadrature_variance)
from .operators import ConfigurationError
from .phonon import (PhononBathParams, QuadratureError, build_tables, compute_rates,
                     dump_phi_csv)
from .rate_equations import excess_emission, sector_flows
from .solvers import NumericalError, auto_cutoff, steady_state

__all__ = ["RunConfig", "SweepAxis", "ResultTable", "load_config", "parse_config",
           "serialize_config", "apply_overrides", "run_config", "run_figure", "figure_config",
           "main", "FIGURES", "TASK_COLUMNS"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


# --- schema -----------------------------------------------------------------

def _float(s):
    try:
        v = float(s)
    except ValueError:
        raise ConfigurationError(f"expected a number, got {s!r}") from None
    if not np.isfinite(v):
        raise ConfigurationError(f"value must be finite, got {s!r}")
    return v


def _int(s):
    try:
        return int(s)
    except ValueError:
        raise ConfigurationError(f"expected an integer, got {s!r}") from None


def _bool(s):
    t = s.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigurationError(f"expected a boolean, got {s!r}")


def _detuning(s):
    t = s.strip().lower().replace(" ", "")
    if t in ("-rabi", "+rabi", "rabi"):
        return "+rabi" if t != "-rabi" else "-rabi"
    return _float(s)


def _floats(s):
    return tuple(_float(x) for x in s.replace(",", " ").split()) if s.strip() else ()


def _words(s):
    return tuple(w for w in s.replace(",", " ").split())


def _text(s):
    return s.strip()


# (section, key) -> (parser, default, check)
_NONNEG = ("nonneg", lambda v: v >= 0)
_POS = ("positive", lambda v: v > 0)
SCHEMA = {
    "system": {
        "g1": (_float, 0.1, _POS),
        "g2": (_float, 1.0, None),
        "eta1": (_float, 2.0, None),
        "eta2": (_float, 2.0, None),
        "delta_xp": (_float, -10.0, None),
        "delta_yp": (_float, -10.0, None),
        "delta_c1p": (_detuning, "-rabi", None),
        "delta_c2p": (_detuning, "-rabi", None),
        "delta_fss": (_float, 0.0, None),
        "kappa1": (_float, 0.5, _NONNEG),
        "kappa2": (_float, 0.5, _NONNEG),
        "gamma1": (_float, 0.01, _NONNEG),
        "gamma2": (_float, 0.01, _NONNEG),
        "gamma1p": (_float, 0.01, _NONNEG),
        "gamma2p": (_float, 0.01, _NONNEG),
        "phi1": (_float, 0.0, None),
        "phi2": (_float, 0.0, None),
        "cutoff1": (_int, 4, ("in [1, 30]", lambda v: 1 <= v <= 30)),
        "cutoff2": (_int, 4, ("in [1, 30]", lambda v: 1 <= v <= 30)),
        "pump_detuning": (_text, "exciton", ("exciton or cavity", lambda v: v in ("exciton", "cavity"))),
        "dephasing_in_no_phonon": (_bool, False, None),
        "renormalize_fp_coupling": (_bool, True, None),
    },
    "bath": {
        "temperature": (_float, 5.0, _NONNEG),
        "alpha_p": (_float, 2.36, _NONNEG),
        "omega_b": (_float, 1.0, _POS),
    },
    "sweep": {
        "variable": (_text, "delta_cp", None),
        "start": (_float, -14.0, None),
        "stop": (_float, -4.0, None),
        "points": (_int, 41, ("at least 1", lambda v: v >= 1)),
        "variable2": (_text, "", None),
        "start2": (_float, 0.0, None),
        "stop2": (_float, 0.0, None),
        "points2": (_int, 1, ("at least 1", lambda v: v >= 1)),
        "temperatures": (_floats, (), ("nonneg", lambda v: all(t >= 0 for t in v))),
    },
    "run": {
        "variant": (_text, "full", ("one of " + ", ".join(VARIANTS), lambda v: v in VARIANTS)),
        "tasks": (_words, ("photons",), None),
        "output": (_text, "-", None),
        "workers": (_int, 1, ("at least 1", lambda v: v >= 1)),
        "auto_cutoff_tol": (_float, 0.0, _NONNEG),
        "cutoff_cap": (_int, 8, ("in [1, 30]", lambda v: 1 <= v <= 30)),
        "neg_tol": (_float, 1e-8, _POS),
        "fp_average_phase": (_float, 0.0, None),
        # field amplitudes for the phase coefficients; 0 takes sqrt(<n_i>)
        "fp_r1": (_float, 0.0, _NONNEG),
        "fp_r2": (_float, 0.0, _NONNEG),
    },
}

TASK_COLUMNS = {
    "photons": ("n1", "n2", "re_a1dag_a2", "re_s1p_s2m"),
    "g2": ("g11", "g22", "g12"),
    "populations": ("p_plus", "p_zero", "p_minus"),
    "variances": ("var_Bphi", "var_BPhi", "var_Br", "var_BR"),
    "fokker_planck": ("D_phi", "D_Phi", "D_phiphi", "D_PhiPhi"),
    "rates": ("N1", "M1", "N2", "M2", "N1M1", "remainder"),
    "entanglement": ("dgcz",),
}
# fixed column order regardless of the order tasks are listed in
_TASK_ORDER = ("photons", "g2", "populations", "variances", "fokker_planck", "rates",
               "entanglement")

# sweepable names besides the schema keys
_SWEEP_ALIASES = {"delta_cp": ("delta_c1p", "delta_c2p"), "eta": ("eta1", "eta2"),
                  "delta": ("delta_xp", "delta_yp"), "kappa": ("kappa1", "kappa2")}
_NOT_SWEEPABLE = {"cutoff1", "cutoff2", "pump_detuning", "dephasing_in_no_phonon",
                  "renormalize_fp_coupling", "g1"}


def _section_of(key):
    hits = [s for s, keys in SCHEMA.items() if key in keys]
    return hits[0] if len(hits) == 1 else None


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- configuration objects --------------------------------------------------

@dataclass(frozen=True)
class SweepAxis:
    variable: str
    start: float
    stop: float
    points: int

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description.

    ``settings`` maps ``(section, key)`` to typed values in configuration
    units.  ``system`` gives the :class:`SystemParams` at the base point.
    """

    settings: tuple

    def __post_init__(self):
        for axis in self.axes:
            if axis.variable == "temperature" and self.temperatures:
                raise ConfigurationError("sweep temperatures and a temperature axis are exclusive")
            if axis.variable in _NOT_SWEEPABLE or not (
                    axis.variable in _SWEEP_ALIASES or axis.variable == "temperature"
                    or axis.variable in SCHEMA["system"] or axis.variable in SCHEMA["bath"]):
                raise ConfigurationError(f"cannot sweep {axis.variable!r}")
        unknown = set(self.tasks) - set(TASK_COLUMNS)
        if unknown:
            raise ConfigurationError(f"unknown task(s) {sorted(unknown)}; "
                                     f"choose from {sorted(TASK_COLUMNS)}")
        if not self.tasks:
            raise ConfigurationError("at least one task is required")
        self.system  # validates the base point

    def __getitem__(self, key):
        sec, _, k = key.rpartition(".")
        sec = sec or _section_of(k)
        return dict(self.settings)[(sec, k)]

    @property
    def axes(self):
        out = [SweepAxis(self["sweep.variable"], self["sweep.start"], self["sweep.stop"],
                         self["sweep.points"])]
        if self["sweep.variable2"]:
            out.append(SweepAxis(self["sweep.variable2"], self["sweep.start2"],
                                 self["sweep.stop2"], self["sweep.points2"]))
        return tuple(out)

    @property
    def temperatures(self):
        return self["sweep.temperatures"]

    @property
    def variant(self):
        return self["run.variant"]

    @property
    def tasks(self):
        return tuple(t for t in _TASK_ORDER if t in self["run.tasks"]) + tuple(
            t for t in self["run.tasks"] if t not in _TASK_ORDER)

    @property
    def system(self):
        return self.params_at({})

    def params_at(self, assignment):
        """SystemParams for one sweep point (``assignment`` in config units)."""
        vals = {k: self[f"system.{k}"] for k in SCHEMA["system"]}
        bath = {k: self[f"bath.{k}"] for k in SCHEMA["bath"]}
        for name, v in assignment.items():
            targets = _SWEEP_ALIASES.get(name, (name,))
            for t in targets:
                (bath if t in bath else vals)[t] = float(v)
        g = vals["g1"]
        try:
            bath_p = PhononBathParams(**bath)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        delta, eta = vals["delta_xp"] * g, vals["eta1"] * g

        def det(v):
            if isinstance(v, str):
                return (-1.0 if v == "-rabi" else 1.0) * rabi_frequency(delta, eta)
            return v * g

        return SystemParams(
            g1=g, g2=vals["g2"] * g, eta1=eta, eta2=vals["eta2"] * g,
            Delta_xp=delta, Delta_yp=vals["delta_yp"] * g,
            Delta_c1p=det(vals["delta_c1p"]), Delta_c2p=det(vals["delta_c2p"]),
            delta_fss=vals["delta_fss"] * g,
            kappa1=vals["kappa1"] * g, kappa2=vals["kappa2"] * g,
            gamma1=vals["gamma1"] * g, gamma2=vals["gamma2"] * g,
            gamma1p=vals["gamma1p"] * g, gamma2p=vals["gamma2p"] * g,
            phi1=vals["phi1"], phi2=vals["phi2"], bath=bath_p,
            cutoff1=vals["cutoff1"], cutoff2=vals["cutoff2"],
            appendixA_pump_detuning=vals["pump_detuning"],
            dephasing_in_no_phonon=vals["dephasing_in_no_phonon"],
            renormalize_fp_coupling=vals["renormalize_fp_coupling"])

    def points(self):
        """Sweep points in output order as lists of (name, value) pairs."""
        grids = [[("temperature", t)] for t in self.temperatures] or [[]]
        for axis in self.axes:
            grids = [g + [(axis.variable, float(v))] for g in grids for v in axis.values]
        return grids


def _defaults():
    return {(s, k): spec[1] for s, keys in SCHEMA.items() for k, spec in keys.items()}


def _set(values, section, key, raw, where=""):
    if section not in SCHEMA:
        raise ConfigurationError(f"{where}unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigurationError(f"{where}unknown key {key!r} in [{section}]")
    parser, _, check = SCHEMA[section][key]
    try:
        v = parser(raw)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}{section}.{key}: {exc}") from None
    if check is not None and not check[1](v):
        raise ConfigurationError(f"{where}{section}.{key} = {raw.strip()} out of range ({check[0]})")
    values[(section, key)] = v


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig`."""
    values = _defaults()
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        where = f"line {lineno}: "
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]") or len(body) < 3:
                raise ConfigurationError(f"{where}malformed section header {body!r}")
            section = body[1:-1].strip().lower()
            if section not in SCHEMA:
                raise ConfigurationError(f"{where}unknown section [{section}]")
            continue
        if "=" not in body:
            raise ConfigurationError(f"{where}expected 'key = value', got {body!r}")
        key, raw = (x.strip() for x in body.split("=", 1))
        sec = section or _section_of(key)
        if sec is None:
            raise ConfigurationError(f"{where}unknown key {key!r}")
        _set(values, sec, key, raw, where)
    return RunConfig(tuple(sorted(values.items())))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    """Text that parses back to ``cfg``."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {_format(cfg[f'{section}.{k}'])}" for k in keys)
        lines.append("")
    return "\n".join(lines)


def apply_overrides(cfg, overrides):
    """Return a new config with ``key=value`` (or ``section.key=value``) strings applied."""
    values = dict(cfg.settings)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, raw = (x.strip() for x in item.split("=", 1))
        sec, _, k = key.rpartition(".")
        sec = sec or _section_of(k)
        if sec is None:
            raise ConfigurationError(f"unknown key {k!r}")
        _set(values, sec, k, raw)
    return RunConfig(tuple(sorted(values.items())))


# --- result table -----------------------------------------------------------

@dataclass
class ResultTable:
    header: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows], dtype=float if name != "status" else object)

    def body(self):
        """CSV text without the metadata block (the deterministic part)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        return buf.getvalue()

    def to_csv(self, path_or_file):
        meta = "".join(f"# {k}: {line}\n" for k, v in self.metadata.items()
                       for line in str(v).splitlines() or [""])
        text = meta + self.body()
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="") as fh:
                fh.write(text)

    @classmethod
    def read_csv(cls, path):
        meta, lines = {}, []
        with open(path) as fh:
            for line in fh:
                if line.startswith("# "):
                    k, _, v = line[2:].rstrip("\n").partition(": ")
                    meta[k] = meta[k] + "\n" + v if k in meta else v
                else:
                    lines.append(line)
        reader = csv.reader(lines)
        header = next(reader)
        rows = [[v if h == "status" else float(v) for h, v in zip(header, r)] for r in reader]
        return cls(header, rows, meta)


# --- point evaluation -------------------------------------------------------

@lru_cache(maxsize=8)
def _tables(bath):
    return build_tables(bath)


def _generator(params, variant):
    tables = None if variant == "no_phonon" else _tables(params.bath)
    return build_generator(params, variant, tables)


def _solve(params, cfg):
    variant = cfg.variant
    neg_tol = cfg["run.neg_tol"]
    tol = cfg["run.auto_cutoff_tol"]
    if tol > 0:
        cut, report = auto_cutoff(params, lambda p: _generator(p, variant),
                                  lambda rho, b: mean_photons(rho, b.layout)[0], tol,
                                  start=1, cap=cfg["run.cutoff_cap"], neg_tol=neg_tol)
        log.info("auto_cutoff chose %d (history %s)", cut, report.history)
        params = params.with_cutoff(cut)
        return params, _generator(params, variant), report
    bundle = _generator(params, variant)
    return params, bundle, steady_state(bundle, neg_tol=neg_tol)


def _nan_row(tasks):
    return [np.nan for t in tasks for _ in TASK_COLUMNS[t]]


def _evaluate_group(cfg, group):
    """Rows for points sharing one generator (they differ only in phases)."""
    tasks = cfg.tasks
    first_params = group[0][1]
    try:
        params, bundle, report = _solve(first_params, cfg)
        rho = report.rho
        flows = excess_emission(sector_flows(bundle, rho)) if "rates" in tasks else None
        fp = None
        if "fokker_planck" in tasks:
            if cfg.variant == "no_phonon":
                _, fp = solve_orders(params)
            else:
                tb = _tables(params.bath)
                _, fp = with_phonon_variant(params, compute_rates(params, tb), tb.mean_B)
    except (NumericalError, QuadratureError, np.linalg.LinAlgError) as exc:
        log.warning("point %s failed: %s", group[0][0], exc)
        return [(i, first_params.cutoff1, np.nan, f"error:{type(exc).__name__}", _nan_row(tasks))
                for i, _ in group]

    rows = []
    n1, n2 = mean_photons(rho, bundle.layout)
    for idx, p in group:
        status, vals = [], []
        for t in tasks:
            try:
                vals.extend(_task_values(t, rho, bundle, p, cfg, (n1, n2), flows, fp))
            except UndefinedValueError:
                status.append(f"undefined:{t}")
                vals.extend([np.nan] * len(TASK_COLUMNS[t]))
            except ConfigurationError:
                status.append(f"n/a:{t}")
                vals.extend([np.nan] * len(TASK_COLUMNS[t]))
        rows.append((idx, params.cutoff1, report.min_eigenvalue, ";".join(status) or "ok", vals))
    return rows


def _task_values(task, rho, bundle, p, cfg, n, flows, fp):
    layout = bundle.layout
    if task == "photons":
        c_a, c_s = coherences(rho, layout)
        return [n[0], n[1], c_a.real, c_s.real]
    if task == "g2":
        return [g2_zero(rho, 1, 1, layout), g2_zero(rho, 2, 2, layout), g2_zero(rho, 1, 2, layout)]
    if task == "populations":
        return list(dressed_populations(rho, p, bundle.mean_B, layout))
    if task == "variances":
        return [quadrature_variance(rho, w, p.phi1, p.phi2, layout) for w in ("phi", "Phi", "r", "R")]
    if task == "fokker_planck":
        r1 = cfg["run.fp_r1"] or np.sqrt(max(n[0], 0.0))
        r2 = cfg["run.fp_r2"] or np.sqrt(max(n[1], 0.0))
        if min(r1, r2) <= 0:
            raise UndefinedValueError("field amplitude is zero")
        dd = drift_diffusion(fp, r1, r2, p.phi1 - p.phi2,
                             cfg["run.fp_average_phase"], p)
        g = p.g1
        return [dd.D_phi / g, dd.D_Phi / g, dd.D_phiphi / g, dd.D_PhiPhi / g]
    if task == "rates":
        return [flows.N1, flows.M1, flows.N2, flows.M2, flows.N1M1, flows.remainder]
    if task == "entanglement":
        return [dgcz_witness(rho, p.phi1, p.phi2, layout)]
    raise ConfigurationError(f"unknown task {task!r}")


def _run_groups(cfg, groups):
    workers = min(cfg["run.workers"], len(groups))
    if workers <= 1:
        return [_evaluate_group(cfg, g) for g in groups]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_group, [cfg] * len(groups), groups))


def run_config(cfg):
    """Execute a sweep and return the assembled :class:`ResultTable`."""
    points = cfg.points()
    groups = {}
    for i, assignment in enumerate(points):
        p = cfg.params_at(dict(assignment))
        key = replace(p, phi1=0.0, phi2=0.0)
        groups.setdefault(key, []).append((i, p))
    t0 = time.time()
    results = _run_groups(cfg, list(groups.values()))
    by_index = {r[0]: r for res in results for r in res}

    names = [name for name, _ in points[0]]
    header = names + ["cutoff", "min_eig", "status"] + [
        c for t in cfg.tasks for c in TASK_COLUMNS[t]]
    rows = []
    for i, assignment in enumerate(points):
        _, cut, emin, status, vals = by_index[i]
        rows.append([float(v) for _, v in assignment] + [float(cut), float(emin), status]
                    + [float(v) for v in vals])
    meta = {
        "qdcel": __version__,
        "variant": cfg.variant,
        "units": "energies and rates in units of g1; angles in rad; temperature in K",
        "config": serialize_config(cfg).strip(),
        "elapsed_s": f"{time.time() - t0:.1f}",
    }
    return ResultTable(header, rows, meta)


# --- figure presets ---------------------------------------------------------

_PI = repr(float(np.pi))
FIGURES = {
    "fig2": ["run.variant=full", "system.cutoff1=3", "system.cutoff2=3",
             "sweep.temperatures=0, 5, 10", "sweep.variable=delta_cp", "sweep.start=-14",
             "sweep.stop=-4", "sweep.points=41", "run.tasks=photons, g2, populations"],
    "fig3": ["run.variant=full", "system.cutoff1=3", "system.cutoff2=3",
             "sweep.temperatures=0, 5, 20", "sweep.variable=delta_cp", "sweep.start=-14",
             "sweep.stop=-4", "sweep.points=21", "sweep.variable2=phi1",
             f"sweep.start2=-{_PI}", f"sweep.stop2={_PI}", "sweep.points2=25",
             "run.tasks=variances"],
    "fig4": ["run.variant=no_phonon", "system.cutoff1=3", "system.cutoff2=3",
             "sweep.variable=delta_cp", "sweep.start=-14", "sweep.stop=-4", "sweep.points=21",
             "sweep.variable2=phi1", f"sweep.start2=-{_PI}", f"sweep.stop2={_PI}",
             "sweep.points2=25", "run.tasks=fokker_planck"],
    "fig5": ["run.variant=full", "system.cutoff1=3", "system.cutoff2=3", "sweep.temperatures=5",
             "sweep.variable=delta_cp", "sweep.start=-14", "sweep.stop=-4", "sweep.points=21",
             "sweep.variable2=phi1", f"sweep.start2=-{_PI}", f"sweep.stop2={_PI}",
             "sweep.points2=25", "run.tasks=fokker_planck"],
    "fig6": ["run.variant=full", "system.cutoff1=3", "system.cutoff2=3",
             "sweep.temperatures=10, 20", "sweep.variable=delta_cp", "sweep.start=-14",
             "sweep.stop=-4", "sweep.points=21", "sweep.variable2=phi1",
             f"sweep.start2=-{_PI}", f"sweep.stop2={_PI}", "sweep.points2=25",
             "run.tasks=fokker_planck"],
    "fig7": ["run.variant=sme", "system.cutoff1=3", "system.cutoff2=3", "sweep.temperatures=5",
             "sweep.variable=delta_cp", "sweep.start=-14", "sweep.stop=-4", "sweep.points=41",
             "run.tasks=rates"],
    "fig8": ["run.variant=full", "system.cutoff1=4", "system.cutoff2=4",
             "system.delta_xp=5", "system.delta_yp=5", "system.kappa1=0.1", "system.kappa2=0.1",
             "system.delta_c1p=-rabi", "system.delta_c2p=+rabi", f"system.phi1={_PI}",
             "system.phi2=0", "sweep.temperatures=0, 5, 20", "sweep.variable=eta",
             "sweep.start=1", "sweep.stop=10", "sweep.points=19",
             "run.tasks=entanglement, photons", "run.neg_tol=1e-3"],
}


def figure_config(tag, overrides=()):
    if tag not in FIGURES:
        raise ConfigurationError(f"unknown figure {tag!r}; choose from {sorted(FIGURES)}")
    return apply_overrides(apply_overrides(parse_config(""), FIGURES[tag]), overrides)


def run_figure(tag, overrides=(), output=None):
    """Run a preset sweep; write CSV to ``output`` (or ``run.output``) when given."""
    cfg = figure_config(tag, overrides)
    table = run_config(cfg)
    table.metadata = {"figure": tag, **table.metadata}
    if output is not None:
        table.to_csv(output)
    return table


# --- command line -----------------------------------------------------------

def _emit(table, dest):
    if dest in (None, "-"):
        table.to_csv(sys.stdout)
    else:
        table.to_csv(dest)


def _failed(table):
    return any(str(r[table.header.index("status")]).startswith("error:") for r in table.rows)


def _cmd_run(args):
    cfg = apply_overrides(load_config(args.config), args.set)
    table = run_config(cfg)
    _emit(table, args.output or cfg["run.output"])
    return EXIT_NUMERICAL if _failed(table) else EXIT_OK


def _cmd_figure(args):
    cfg = figure_config(args.tag, args.set)
    table = run_figure(args.tag, args.set)
    _emit(table, args.output or (cfg["run.output"] if cfg["run.output"] != "-" else f"{args.tag}.csv"))
    return EXIT_NUMERICAL if _failed(table) else EXIT_OK


def _bath_from(args):
    try:
        return PhononBathParams(alpha_p=args.alpha_p, omega_b=args.omega_b,
                                temperature=args.temperature)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _cmd_phonon_tables(args):
    tables = build_tables(_bath_from(args))
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w")
    try:
        out.write(f"# mean_B: {tables.mean_B!r}\n")
        dump_phi_csv(tables, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_rates(args):
    cfg = apply_overrides(load_config(args.config) if args.config else parse_config(""), args.set)
    base = cfg.system
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["delta_meV", "rate", "re_meV", "im_meV"])
        for delta in args.delta:
            if not np.isfinite(delta):
                raise ConfigurationError("delta must be finite")
            p = replace(base, Delta_xp=delta, Delta_yp=delta)
            rates = compute_rates(p, _tables(p.bath))
            for name, v in rates.as_dict().items():
                v = complex(v)
                w.writerow([repr(float(delta)), name, repr(v.real), repr(v.imag)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="qdcel", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=f"qdcel {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a sweep described by a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("-o", "--output")
    r.set_defaults(func=_cmd_run)

    f = sub.add_parser("figure", help="run a preset figure sweep")
    f.add_argument("tag", choices=sorted(FIGURES))
    f.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    f.add_argument("-o", "--output")
    f.set_defaults(func=_cmd_figure)

    t = sub.add_parser("phonon-tables", help="tabulate the phonon correlation phi(tau)")
    t.add_argument("--temperature", type=float, required=True)
    t.add_argument("--alpha-p", type=float, default=2.36)
    t.add_argument("--omega-b", type=float, default=1.0)
    t.add_argument("-o", "--output")
    t.set_defaults(func=_cmd_phonon_tables)

    k = sub.add_parser("rates", help="phonon scattering rates at exciton-pump detuning(s)")
    k.add_argument("--delta", type=float, action="append", required=True, metavar="MEV")
    k.add_argument("--config")
    k.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    k.add_argument("-o", "--output")
    k.set_defaults(func=_cmd_rates)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
    except (ConfigurationError, OSError) as exc:
        print(f"qdcel: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, QuadratureError, np.linalg.LinAlgError) as exc:
        print(f"qdcel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
