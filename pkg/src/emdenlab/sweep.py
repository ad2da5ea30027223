"""Run configuration files, parameter sweeps, and reproducible manifests.

A run configuration is an INI file with a [params] section plus optional
[integrator], [spans], [seed], [output] and [sweep] sections.  Sweeps
expand the [sweep] axes into a parameter grid, run one seeded crossing
per cell, classify both ends, and write a content-addressed output tree

    <output>/<run-id>/manifest.json
    <output>/<run-id>/cells/<index>/trajectory.csv

where run-id is a hash of the semantic configuration (parameters,
integrator, spans, seeds, axes; never the output directory or the worker
count).  Cell results are merged by grid index, so manifests and cell
files are byte-identical for any worker count apart from the recorded
wall-clock time.
"""

from __future__ import annotations

import configparser
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path

from ._version import __version__
from .classify import classify_end
from .integrate import IntegratorConfig, integrate, seed_frame, \
    singular_seed_start, write_trajectory_csv
from .params import ProblemParams, classify_regime, derive_constants
from .serialize import canonical_json, fmt_float
from .shooting import END_WINDOW

_SCHEMA = {
    "params": {"n", "p", "q", "l1", "l2", "k1", "k2"},
    "integrator": {"rtol", "atol", "max_step", "amplitude_cap",
                   "dense_output_stride"},
    "spans": {"t_min", "t_max"},
    "seed": {"eps_scale"},
    "output": {"directory"},
    "sweep": {"n", "p", "q", "l1", "l2", "jobs"},
}
_AXIS_ORDER = ("n", "p", "q", "l1", "l2")


@dataclass(frozen=True)
class RunConfig:
    params: ProblemParams
    integrator: IntegratorConfig = IntegratorConfig()
    t_min: float = -14.0
    t_max: float = 14.0
    eps_scale: float = 1e-4
    output_dir: str = "out"
    axes: dict = field(default_factory=dict)
    jobs: int = 1


def _parse_float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"[{section}] {key}: cannot parse {raw!r} as a "
                         "number") from None


def parse_run_config_text(text: str) -> RunConfig:
    """Parse and validate run-configuration INI text.

    Unknown sections or keys are rejected by name; [params] with n, p
    and q is required, everything else has defaults.
    """
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"bad config syntax: {exc}") from None
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
    if "params" not in cp:
        raise ValueError("missing required section [params]")
    ps = cp["params"]
    for req in ("n", "p", "q"):
        if req not in ps:
            raise ValueError(f"[params] is missing {req!r}")
    params = ProblemParams(
        n=int(ps["n"]),
        p=_parse_float("params", "p", ps["p"]),
        q=_parse_float("params", "q", ps["q"]),
        l1=_parse_float("params", "l1", ps.get("l1", "0")),
        l2=_parse_float("params", "l2", ps.get("l2", "0")),
        k1=float(int(ps.get("k1", "1"))),
        k2=float(int(ps.get("k2", "1"))),
    )
    kw = {}
    if "integrator" in cp:
        kw = {k: _parse_float("integrator", k, v)
              for k, v in cp["integrator"].items()}
    integrator = IntegratorConfig(**kw)
    t_min, t_max = -14.0, 14.0
    if "spans" in cp:
        t_min = _parse_float("spans", "t_min", cp["spans"].get("t_min", "-14"))
        t_max = _parse_float("spans", "t_max", cp["spans"].get("t_max", "14"))
    if not t_min < t_max:
        raise ValueError(f"need t_min < t_max, got {t_min} >= {t_max}")
    eps_scale = 1e-4
    if "seed" in cp and "eps_scale" in cp["seed"]:
        eps_scale = _parse_float("seed", "eps_scale", cp["seed"]["eps_scale"])
    output_dir = cp["output"].get("directory", "out") if "output" in cp \
        else "out"
    axes: dict = {}
    jobs = 1
    if "sweep" in cp:
        for key, raw in cp["sweep"].items():
            if key == "jobs":
                jobs = int(raw)
                if jobs < 1:
                    raise ValueError("[sweep] jobs must be >= 1")
                continue
            vals = [_parse_float("sweep", key, cell)
                    for cell in raw.split(",") if cell.strip()]
            if not vals:
                raise ValueError(f"[sweep] {key}: empty axis")
            axes[key] = [int(v) if key == "n" else v for v in vals]
    return RunConfig(params, integrator, t_min, t_max, eps_scale,
                     output_dir, axes, jobs)


def parse_run_config(path) -> RunConfig:
    with open(path, "r") as fh:
        return parse_run_config_text(fh.read())


def expanded_axes(cfg: RunConfig) -> dict:
    """Sweep axes with singleton fallbacks from [params]."""
    base = {"n": cfg.params.n, "p": cfg.params.p, "q": cfg.params.q,
            "l1": cfg.params.l1, "l2": cfg.params.l2}
    return {name: list(cfg.axes.get(name, [base[name]]))
            for name in _AXIS_ORDER}


def config_hash(cfg: RunConfig) -> str:
    """Hash of the semantic configuration (excludes output dir and jobs)."""
    axes = expanded_axes(cfg)
    lines = [
        f"params.n={cfg.params.n}",
        f"params.p={fmt_float(cfg.params.p)}",
        f"params.q={fmt_float(cfg.params.q)}",
        f"params.l1={fmt_float(cfg.params.l1)}",
        f"params.l2={fmt_float(cfg.params.l2)}",
        f"params.k1={fmt_float(cfg.params.k1)}",
        f"params.k2={fmt_float(cfg.params.k2)}",
        f"integrator.rtol={fmt_float(cfg.integrator.rtol)}",
        f"integrator.atol={fmt_float(cfg.integrator.atol)}",
        f"integrator.max_step={fmt_float(cfg.integrator.max_step)}",
        f"integrator.amplitude_cap={fmt_float(cfg.integrator.amplitude_cap)}",
        "integrator.dense_output_stride="
        + fmt_float(cfg.integrator.dense_output_stride),
        f"spans.t_min={fmt_float(cfg.t_min)}",
        f"spans.t_max={fmt_float(cfg.t_max)}",
        f"seed.eps_scale={fmt_float(cfg.eps_scale)}",
    ]
    for name in _AXIS_ORDER:
        vals = axes[name]
        cells = [str(v) if name == "n" else fmt_float(v) for v in vals]
        lines.append(f"sweep.{name}=" + ",".join(cells))
    return sha256("\n".join(lines).encode()).hexdigest()


def run_id_of(cfg: RunConfig) -> str:
    return config_hash(cfg)[:12]


def _cell_job(args) -> dict:
    """One sweep cell: derive, seed the available singular end, cross,
    classify both ends.  Failures are captured per cell."""
    (index, n, p, q, l1, l2, k1, k2, integrator, t_min, t_max, eps_scale,
     out_dir) = args
    cell = {
        "index": index,
        "params": {"n": n, "p": p, "q": q, "l1": l1, "l2": l2,
                   "k1": k1, "k2": k2},
        "error": None,
        "files": [],
    }
    try:
        params = ProblemParams(n=n, p=p, q=q, l1=l1, l2=l2, k1=k1, k2=k2)
        dc = derive_constants(params)
        flags = classify_regime(params, dc)
        cell["constants"] = dc.to_dict()
        cell["regime"] = flags.to_dict()
        if dc.lambda1 is not None:
            end, t_seed, t_stop = "infinity", t_max, t_min
        elif dc.lambda2 is not None:
            end, t_seed, t_stop = "origin", t_min, t_max
        else:
            raise ValueError("no singular amplitude in either frame")
        lam = dc.lambda1 if end == "infinity" else dc.lambda2
        start = singular_seed_start(end, eps_scale * lam, t_seed, params, dc)
        traj = integrate(start, seed_frame(end, dc), t_stop, params,
                         integrator)
        # end-hugging windows; the generic last-25% default is too wide
        # for typical sweep spans
        lo, hi = float(traj.t.min()), float(traj.t.max())
        if hi - lo >= 2.0 * END_WINDOW:
            rep_inf = classify_end(traj, dc, "infinity",
                                   window=(hi - END_WINDOW, hi))
            rep_ori = classify_end(traj, dc, "origin",
                                   window=(lo, lo + END_WINDOW))
        else:
            rep_inf = classify_end(traj, dc, "infinity")
            rep_ori = classify_end(traj, dc, "origin")
        cell["seeded_end"] = end
        cell["termination"] = traj.termination.kind.value
        cell["kinds"] = {"infinity": rep_inf.kind.value,
                         "origin": rep_ori.kind.value}
        cell["reports"] = {"infinity": rep_inf.to_dict(),
                           "origin": rep_ori.to_dict()}
        cell_dir = Path(out_dir) / "cells" / f"{index:04d}"
        cell_dir.mkdir(parents=True, exist_ok=True)
        csv_path = cell_dir / "trajectory.csv"
        write_trajectory_csv(traj, csv_path)
        cell["files"] = [f"cells/{index:04d}/trajectory.csv"]
    except Exception as exc:  # noqa: BLE001 - per-cell isolation
        cell["error"] = f"{type(exc).__name__}: {exc}"
    return cell


@dataclass
class SweepManifest:
    run_id: str
    path: Path
    data: dict

    @property
    def cells(self) -> list:
        return self.data["cells"]


def sweep(cfg: RunConfig, jobs: int | None = None) -> SweepManifest:
    """Run the sweep grid and write the manifest tree.

    A rerun with the same semantic configuration and output directory is
    a no-op: the existing manifest is loaded and returned.
    """
    if jobs is None:
        jobs = cfg.jobs
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    rid = run_id_of(cfg)
    out_dir = Path(cfg.output_dir) / rid
    manifest_path = out_dir / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path, "r") as fh:
            return SweepManifest(rid, manifest_path, json.load(fh))
    out_dir.mkdir(parents=True, exist_ok=True)
    axes = expanded_axes(cfg)
    grid = list(itertools.product(*(axes[name] for name in _AXIS_ORDER)))
    tasks = [
        (i, int(n), float(p), float(q), float(l1), float(l2),
         cfg.params.k1, cfg.params.k2, cfg.integrator, cfg.t_min, cfg.t_max,
         cfg.eps_scale, str(out_dir))
        for i, (n, p, q, l1, l2) in enumerate(grid)
    ]
    t0 = time.monotonic()
    cells: list = [None] * len(tasks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for cell in pool.map(_cell_job, tasks, chunksize=1):
                cells[cell["index"]] = cell
    else:
        for task in tasks:
            cell = _cell_job(task)
            cells[cell["index"]] = cell
    wall = time.monotonic() - t0
    data = {
        "run_id": rid,
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "wall_clock_seconds": wall,
        "axes": {k: list(v) for k, v in axes.items()},
        "cells": cells,
    }
    with open(manifest_path, "w", newline="\n") as fh:
        fh.write(canonical_json(data))
    return SweepManifest(rid, manifest_path, data)
