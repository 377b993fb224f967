"""Uniform-grid sampled (s, c) fields shared by the solvers and the checkers."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class GridField:
    """Samples s[j, i] = s(x[i], t[j]) (likewise c) on a tensor grid.

    ``meta`` carries solver bookkeeping (parameters, mass tallies, clip counts).
    """

    x: np.ndarray
    t: np.ndarray
    s: np.ndarray
    c: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.t = np.asarray(self.t, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        shape = (len(self.t), len(self.x))
        if self.s.shape != shape or self.c.shape != shape:
            raise ValueError(f"field arrays must have shape {shape}")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if len(self.x) > 1 else 0.0

    def frame(self, j: int):
        return self.x, self.s[j], self.c[j]

    def write_frames(self, outdir) -> list:
        """One CSV per frame with columns x,s,c."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = []
        for j, tj in enumerate(self.t):
            p = outdir / f"frame_{j:05d}.csv"
            with open(p, "w", newline="") as fh:
                fh.write(f"# t={tj:.17g}\n")
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x", "s", "c"])
                for row in zip(self.x, self.s[j], self.c[j]):
                    w.writerow([f"{v:.17g}" for v in row])
            paths.append(p)
        return paths

    @classmethod
    def read_frames(cls, indir) -> "GridField":
        files = sorted(Path(indir).glob("frame_*.csv"))
        if not files:
            raise FileNotFoundError(f"no frame_*.csv files in {indir}")
        ts, ss, cs, x = [], [], [], None
        for p in files:
            with open(p) as fh:
                first = fh.readline()
                ts.append(float(first.split("=", 1)[1]))
                data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
            x = data[:, 0]
            ss.append(data[:, 1])
            cs.append(data[:, 2])
        return cls(x, np.array(ts), np.array(ss), np.array(cs))
