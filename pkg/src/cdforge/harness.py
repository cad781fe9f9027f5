"""Config-driven experiment runners and CSV result tables.

Each runner takes a resolved configuration dictionary (see
:func:`resolve_config`), executes one of the experiments, and returns
:class:`ResultTable` objects.  Tables serialize to UTF-8 CSV with a
'#'-prefixed JSON metadata header carrying the complete resolved config,
so every output row is traceable to the inputs that produced it.
Failing sweep cells are recorded with an error flag and never abort the
other cells.
"""
from __future__ import annotations

import copy
import csv
import datetime
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import __version__
from .errors import CdforgeError, ConfigurationError
from .dynamics import (
    PropagationConfig,
    QuenchProtocol,
    critical_time,
    propagate,
    propagate_refined,
)
from .spectral import (
    IsingModel,
    build_hamiltonian,
    diagonalize,
    eigenstate_from_snapshot,
    exact_aux,
    field_derivative,
)
from .pauli import StateVector
from .variational import (
    AnsatzSpec,
    build_system,
    enumerate_basis,
    paper_resource_count,
    solve,
)

EXPERIMENTS = ("kz_sweep", "state_prep", "solve_aux", "resources")

_YZ2_FULL = {
    "label": "yz2_full",
    "mode": "patterns",
    "patterns": [["y", "z"]],
    "max_body": 2,
    "range": "full",
}

_PROPAGATION_DEFAULTS = {
    "dt_factor": 1e-3,
    "grid_points": 101,
    "norm_tol": 1e-9,
    "cutoff": 1e-10,
    "gap_tol": None,
    "check_convergence": False,
    "refine_tol": 1e-6,
}

DEFAULTS = {
    "kz_sweep": {
        "experiment": "kz_sweep",
        "model": {"n_sites": [4, 6, 8], "coupling": 1.0},
        "protocol": {"kind": "linear", "B0": 2.0, "Bf": 0.0},
        "rates": [float(v) for v in np.geomspace(0.05, 10.0, 12)],
        "ansatz": [copy.deepcopy(_YZ2_FULL)],
        "include_bare": True,
        "record_amplitudes": False,
        "propagation": dict(_PROPAGATION_DEFAULTS),
        "output": {"basename": "kz"},
    },
    "state_prep": {
        "experiment": "state_prep",
        "model": {"n_sites": [8], "coupling": 1.0},
        "protocol": {"kind": "cubic", "B0": 2.0, "Bf": 0.0, "tau": 5.0},
        "ansatz": [
            copy.deepcopy(_YZ2_FULL),
            {"label": "k3_r3", "mode": "canonical_full", "max_body": 3, "range": 3},
        ],
        "include_bare": True,
        "record_amplitudes": True,
        "propagation": dict(_PROPAGATION_DEFAULTS),
        "output": {"basename": "state_prep"},
    },
    "solve_aux": {
        "experiment": "solve_aux",
        "model": {"n_sites": [4], "coupling": 1.0},
        "point": {"B": 1.0, "rate": 1.0},
        "ansatz": [copy.deepcopy(_YZ2_FULL)],
        "propagation": dict(_PROPAGATION_DEFAULTS),
        "output": {"basename": "solve_aux"},
    },
    "resources": {
        "experiment": "resources",
        "n_sites": [2, 3, 4, 5, 6, 7, 8, 9, 10],
        "k_body": [1, 2, 3],
        "output": {"basename": "resources"},
    },
}

_ANSATZ_KEYS = {"label", "mode", "patterns", "max_body", "range"}


def _merge(default, user, path):
    if isinstance(default, dict):
        if not isinstance(user, dict):
            raise ConfigurationError(f"expected an object at {path or 'top level'}")
        out = copy.deepcopy(default)
        for key, value in user.items():
            if key not in default:
                raise ConfigurationError(f"unknown config key {path + key!r}")
            out[key] = _merge(default[key], value, path + key + ".")
        return out
    return copy.deepcopy(user)


def resolve_config(user: dict) -> dict:
    """Merge a user config over the experiment defaults; unknown keys are fatal."""
    if not isinstance(user, dict):
        raise ConfigurationError("config must be a JSON object")
    experiment = user.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"config needs 'experiment' in {EXPERIMENTS}, got {experiment!r}"
        )
    cfg = _merge(DEFAULTS[experiment], user, "")
    if "model" in cfg and not isinstance(cfg["model"]["n_sites"], list):
        cfg["model"]["n_sites"] = [cfg["model"]["n_sites"]]
    for section in ("n_sites", "k_body", "rates"):
        if section in cfg and not isinstance(cfg[section], list):
            cfg[section] = [cfg[section]]
    for entry in cfg.get("ansatz", []):
        if not isinstance(entry, dict):
            raise ConfigurationError("each ansatz entry must be an object")
        unknown = set(entry) - _ANSATZ_KEYS
        if unknown:
            raise ConfigurationError(f"unknown ansatz keys {sorted(unknown)}")
        for required in ("label", "mode", "max_body", "range"):
            if required not in entry:
                raise ConfigurationError(f"ansatz entry missing {required!r}: {entry}")
    return cfg


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    return resolve_config(user)


def _ansatz_spec(entry: dict, n_sites: int) -> AnsatzSpec:
    rng = entry["range"]
    if rng == "full":
        rng = n_sites - 1
    return AnsatzSpec(
        mode=entry["mode"],
        max_body=int(entry["max_body"]),
        max_range=int(rng),
        patterns=tuple(tuple(p) for p in entry.get("patterns", [])),
    )


@dataclass
class ResultTable:
    """Rows of named numeric columns with a JSON metadata header."""

    columns: tuple
    rows: list
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ConfigurationError(
                    f"row {row!r} does not match columns {self.columns}"
                )

    @staticmethod
    def _fmt(value):
        if isinstance(value, (bool, str)):
            return str(value)
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return repr(float(value))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([self._fmt(v) for v in row])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read_csv(cls, path) -> "ResultTable":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
            if not header.startswith("# "):
                raise ConfigurationError(f"{path}: missing metadata header")
            metadata = json.loads(header[2:])
            reader = csv.reader(fh)
            columns = tuple(next(reader))
            rows = [tuple(r) for r in reader]
        return cls(columns=columns, rows=rows, metadata=metadata)


def _metadata(config: dict, started: float) -> dict:
    return {
        "config": config,
        "code_version": __version__,
        "wall_time_s": time.monotonic() - started,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _variants(config: dict):
    variants = []
    if config.get("include_bare", False):
        variants.append(("bare", None))
    for entry in config.get("ansatz", []):
        variants.append((entry["label"], entry))
    return variants


def _prop_config(config: dict, tau: float, store_amplitudes: bool = False) -> PropagationConfig:
    p = config["propagation"]
    return PropagationConfig(
        dt=p["dt_factor"] * tau,
        norm_tol=p["norm_tol"],
        cutoff=p["cutoff"],
        gap_tol=p["gap_tol"],
        store_amplitudes=store_amplitudes,
    )


def _run_trajectory(config, model, protocol, ansatz, tau, store_amplitudes=False):
    from .spectral import ground_state

    p = config["propagation"]
    psi0 = ground_state(model, protocol.B0)
    grid = np.linspace(0.0, tau, int(p["grid_points"]))
    prop = _prop_config(config, tau, store_amplitudes)
    if p["check_convergence"]:
        rec, _ = propagate_refined(
            model, protocol, ansatz, psi0, prop, grid, refine_tol=p["refine_tol"]
        )
        return rec
    return propagate(model, protocol, ansatz, psi0, prop, grid)


def _kz_cell(config, n, v, label, entry):
    model = IsingModel(n_sites=n, coupling=config["model"]["coupling"])
    proto = QuenchProtocol.linear(config["protocol"]["B0"], v)
    tau = (config["protocol"]["B0"] - config["protocol"]["Bf"]) / v
    try:
        ansatz = _ansatz_spec(entry, n) if entry is not None else None
        rec = _run_trajectory(config, model, proto, ansatz, tau)
        t_c = critical_time(proto, model.coupling)
        finite = rec.residuals[~np.isnan(rec.residuals)]
        max_res = float(finite.max()) if finite.size else 0.0
        return (n, v, label, float(rec.defect_densities[-1]), t_c, max_res, "")
    except CdforgeError as exc:
        return (n, v, label, float("nan"), float("nan"), float("nan"), type(exc).__name__)


def run_kz_sweep(config: dict, threads: int = 1) -> ResultTable:
    """Final defect density vs quench rate, per system size and ansatz variant."""
    started = time.monotonic()
    cells = [
        (n, float(v), label, entry)
        for n in config["model"]["n_sites"]
        for v in config["rates"]
        for (label, entry) in _variants(config)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: _kz_cell(config, *c), cells))
    else:
        rows = [_kz_cell(config, *c) for c in cells]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return ResultTable(
        columns=("N", "v", "ansatz_label", "n_ex", "t_c", "max_residual", "error_flag"),
        rows=rows,
        metadata=_metadata(config, started),
    )


def run_state_prep(config: dict, threads: int = 1):
    """Infidelity time series under the cubic quench, plus amplitude flow.

    Returns ``(timeseries_table, amplitude_table_or_None)``.  The
    amplitude flow covers the first two-body patterns variant and lists
    every support-2 string of its basis.
    """
    started = time.monotonic()
    proto_cfg = config["protocol"]
    if proto_cfg["kind"] != "cubic":
        raise ConfigurationError("state_prep requires a cubic protocol")
    n = config["model"]["n_sites"][0]
    model = IsingModel(n_sites=n, coupling=config["model"]["coupling"])
    proto = QuenchProtocol.cubic(proto_cfg["B0"], proto_cfg["Bf"], proto_cfg["tau"])
    tau = proto_cfg["tau"]

    amp_variant = None
    if config.get("record_amplitudes", False):
        for label, entry in _variants(config):
            if entry is not None and entry["mode"] == "patterns" and entry["max_body"] == 2:
                amp_variant = label
                break

    rows = []
    amp_rows = []
    errors = {}

    def run_variant(item):
        label, entry = item
        store = label == amp_variant
        try:
            ansatz = _ansatz_spec(entry, n) if entry is not None else None
            rec = _run_trajectory(config, model, proto, ansatz, tau, store_amplitudes=store)
        except CdforgeError as exc:
            return label, None, type(exc).__name__
        return label, rec, None

    items = _variants(config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_variant, items))
    else:
        results = [run_variant(item) for item in items]

    for label, rec, err in results:
        if err is not None:
            errors[label] = err
            continue
        for k, t in enumerate(rec.times):
            rows.append(
                (float(t), float(rec.fields[k]), float(1.0 - rec.fidelities[k]),
                 float(rec.residuals[k]), label)
            )
        if rec.amplitudes is not None and label == amp_variant:
            for i, p in enumerate(rec.basis.strings):
                if p.support_size != 2:
                    continue
                pair = "".join(p.components)
                for k, t in enumerate(rec.times):
                    amp_rows.append(
                        (float(t), p.sites[0], p.sites[1], pair, float(rec.amplitudes[k, i]))
                    )

    rows.sort(key=lambda r: (r[4], r[0]))
    amp_rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    meta = _metadata(config, started)
    if errors:
        meta["errors"] = errors
    main = ResultTable(
        columns=("t", "B", "infidelity", "residual", "ansatz_label"),
        rows=rows,
        metadata=meta,
    )
    amp_table = None
    if amp_rows:
        amp_meta = dict(meta)
        amp_meta["ansatz_label"] = amp_variant
        amp_table = ResultTable(
            columns=("t", "i1", "i2", "component_pair", "h_value"),
            rows=amp_rows,
            metadata=amp_meta,
        )
    return main, amp_table


def run_solve_aux(config: dict) -> ResultTable:
    """One-shot inspection of the variational solve at a single (B, rate) point."""
    started = time.monotonic()
    n = config["model"]["n_sites"][0]
    model = IsingModel(n_sites=n, coupling=config["model"]["coupling"])
    B = float(config["point"]["B"])
    rate = float(config["point"]["rate"])
    entry = config["ansatz"][0]
    basis = enumerate_basis(_ansatz_spec(entry, n), n)
    snap = diagonalize(build_hamiltonian(model, B), field=B)
    psi = StateVector(eigenstate_from_snapshot(snap), n)
    aux = exact_aux(snap, field_derivative(model), rate)
    system = build_system(basis, psi, aux)
    sol = solve(system, config["propagation"]["cutoff"])
    gram_spectrum = np.linalg.eigvalsh(system.gram)
    rows = [
        (i, p.label(), p.support_size, p.span, float(sol.amplitudes[i]),
         float(gram_spectrum[i]))
        for i, p in enumerate(basis.strings)
    ]
    meta = _metadata(config, started)
    meta.update(
        {
            "residual": sol.residual,
            "rank": sol.rank,
            "aux_norm_sq": system.aux_norm_sq,
            "B": B,
            "rate": rate,
            "basis_size": len(basis),
        }
    )
    return ResultTable(
        columns=("index", "operator", "support", "span", "h_value", "gram_eigenvalue"),
        rows=rows,
        metadata=meta,
    )


def run_resources(config: dict) -> ResultTable:
    """Tabulate the K-body interaction resource count over (N, K) grids."""
    started = time.monotonic()
    rows = []
    for n in config["n_sites"]:
        for k in config["k_body"]:
            if k > n:
                continue
            rows.append((int(n), int(k), paper_resource_count(int(n), int(k))))
    rows.sort()
    return ResultTable(
        columns=("N", "K", "count"), rows=rows, metadata=_metadata(config, started)
    )
