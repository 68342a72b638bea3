"""CSV and JSON emission. All floats are written with 17 significant digits so
that identical runs produce byte-identical files."""

from __future__ import annotations

import json
from typing import Iterable

import numpy as np

from .approx import ScalingResult
from .evolution import Trajectory
from .grid import Field, Grid1D
from .montecarlo import SampleSet


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_field_csv(path: str, field: Field) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,value,time\n")
        t = fmt(field.time)
        for x, v in zip(field.grid.nodes, field.values):
            fh.write(f"{fmt(x)},{fmt(v)},{t}\n")


def read_field_csv(path: str) -> Field:
    xs: list[float] = []
    vs: list[float] = []
    time = 0.0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x,value,time":
            raise ValueError(f"{path}: not a field CSV (header {header!r})")
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            sx, sv, st = line.split(",")
            xs.append(float(sx))
            vs.append(float(sv))
            time = float(st)
    if len(xs) < 3:
        raise ValueError(f"{path}: too few rows for a grid")
    grid = Grid1D(xs[0], xs[-1], len(xs))
    return Field(grid, np.asarray(vs), time=time)


def write_trajectory_csv(path: str, traj: Trajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x,value\n")
        for snap in traj.snapshots:
            t = fmt(snap.time)
            for x, v in zip(snap.grid.nodes, snap.values):
                fh.write(f"{t},{fmt(x)},{fmt(v)}\n")


def write_snapshot_series(directory: str, traj: Trajectory) -> list[str]:
    """One field CSV per snapshot, named snapshot_%06d.csv."""
    import os

    os.makedirs(directory, exist_ok=True)
    paths = []
    for k, snap in enumerate(traj.snapshots):
        p = os.path.join(directory, f"snapshot_{k:06d}.csv")
        write_field_csv(p, snap)
        paths.append(p)
    return paths


def write_scaling_csv(path: str, result: ScalingResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epsilon,linf_p_ptilde,linf_ptilde_phat,linf_p_phat\n")
        for eps, rep in zip(result.epsilons, result.reports):
            fh.write(
                f"{fmt(eps)},{fmt(rep.norms_p_ptilde.linf)},"
                f"{fmt(rep.norms_ptilde_phat.linf)},{fmt(rep.norms_p_phat.linf)}\n"
            )
        fh.write(
            f"# slopes: {fmt(result.slope_p_ptilde)},"
            f"{fmt(result.slope_ptilde_phat)},{fmt(result.slope_p_phat)}\n"
        )


def scaling_to_dict(result: ScalingResult) -> dict:
    def norms_dict(n):
        return {"l1": n.l1, "l2": n.l2, "linf": n.linf}

    return {
        "eval_time": result.eval_time,
        "epsilons": list(result.epsilons),
        "slopes": {
            "p_ptilde": result.slope_p_ptilde,
            "ptilde_phat": result.slope_ptilde_phat,
            "p_phat": result.slope_p_phat,
        },
        "errors": [
            {
                "epsilon": eps,
                "p_ptilde": norms_dict(rep.norms_p_ptilde),
                "ptilde_phat": norms_dict(rep.norms_ptilde_phat),
                "p_phat": norms_dict(rep.norms_p_phat),
            }
            for eps, rep in zip(result.epsilons, result.reports)
        ],
    }


def write_samples_csv(path: str, samples: SampleSet) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("path,position\n")
        for i, pos in enumerate(samples.positions):
            fh.write(f"{i},{fmt(pos)}\n")


def mc_summary(samples: SampleSet, out_of_range_fraction: float) -> dict:
    pos = samples.positions
    return {
        "n_paths": samples.n_paths,
        "t": samples.time,
        "mean": float(np.mean(pos)),
        "variance": float(np.var(pos, ddof=1)) if samples.n_paths > 1 else 0.0,
        "out_of_range_fraction": out_of_range_fraction,
    }


def write_json(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_gnuplot_script(path: str, data_path: str, columns: Iterable[tuple[int, int, str]],
                         title: str) -> None:
    """A ready-to-run gnuplot script for one of the CSV outputs."""
    plots = ", ".join(
        f"'{data_path}' using {cx}:{cy} with lines title '{label}'"
        for cx, cy, label in columns
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "set datafile separator ','\n"
            f"set title '{title}'\n"
            "set key left top\n"
            f"plot {plots}\n"
            "pause -1\n"
        )
