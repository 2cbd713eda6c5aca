"""Rectification quality: proportion of aligned points and vertex distortion."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateConfigurationError, InsufficientDataError
from .geometry import Homography
from .solver import CorrespondenceSet

DEFAULT_EPSILONS = (1.0, 2.0, 3.0)


@dataclass(frozen=True)
class PapReport:
    thresholds: tuple[float, ...]
    pap: tuple[float, ...]
    n_points: int

    def at(self, eps: float) -> float:
        return self.pap[self.thresholds.index(float(eps))]


@dataclass(frozen=True)
class NvdReport:
    nvd_master: float
    nvd_slave: float


def vertical_errors(
    corr: CorrespondenceSet, h_master: Homography, h_slave: Homography
) -> np.ndarray:
    """|y - y~| between transformed master and transformed slave points."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ym = h_master.transform(corr.master)[:, 1]
        ys = h_slave.transform(corr.slave)[:, 1]
        err = np.abs(ym - ys)
    return np.where(np.isfinite(err), err, np.inf)


def pap(
    corr: CorrespondenceSet,
    h_master: Homography,
    h_slave: Homography,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
) -> PapReport:
    """Fraction of pairs whose transformed rows differ by strictly less than eps."""
    n = len(corr)
    if n == 0:
        raise InsufficientDataError("PAP is undefined for an empty correspondence set")
    err = vertical_errors(corr, h_master, h_slave)
    eps = tuple(float(e) for e in epsilons)
    values = tuple(float(np.count_nonzero(err < e)) / n for e in eps)
    return PapReport(eps, values, n)


def image_vertices(width: int, height: int) -> np.ndarray:
    w1, h1 = width - 1.0, height - 1.0
    return np.array([[0.0, 0.0], [w1, 0.0], [0.0, h1], [w1, h1]])


def nvd(h: Homography, width: int, height: int) -> float:
    """Summed corner displacement divided by the image diagonal."""
    v = image_vertices(width, height)
    if np.any(np.abs(h.denominators(v)) < 1e-12):
        raise DegenerateConfigurationError("an image vertex maps to infinity")
    d = np.hypot(*(h.transform(v) - v).T)
    return float(d.sum() / math.hypot(width, height))


@dataclass
class RectificationReport:
    pap: PapReport
    nvd: NvdReport
    p_max: float | None = None
    timing_us: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out: dict = {
            "n_points": self.pap.n_points,
            "pap": {_eps_key(e): v for e, v in zip(self.pap.thresholds, self.pap.pap)},
            "nvd_master": self.nvd.nvd_master,
            "nvd_slave": self.nvd.nvd_slave,
        }
        if self.p_max is not None:
            out["p_max"] = self.p_max
        if self.timing_us:
            out["timing_us"] = dict(self.timing_us)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        d = self.as_dict()
        lines = [f"n_points: {d['n_points']}"]
        lines += [f"pap[{k}]: {v!r}" for k, v in d["pap"].items()]
        lines += [f"nvd_master: {d['nvd_master']!r}", f"nvd_slave: {d['nvd_slave']!r}"]
        if "p_max" in d:
            lines.append(f"p_max: {d['p_max']!r}")
        lines += [f"timing_us[{k}]: {v!r}" for k, v in d.get("timing_us", {}).items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RectificationReport":
        vals: dict[str, str] = {}
        for line in text.splitlines():
            key, sep, value = line.partition(":")
            if sep:
                vals[key.strip()] = value.strip()
        paps = {k[4:-1]: float(v) for k, v in vals.items() if k.startswith("pap[")}
        timing = {k[10:-1]: float(v) for k, v in vals.items() if k.startswith("timing_us[")}
        return cls(
            pap=PapReport(
                tuple(float(k) for k in paps), tuple(paps.values()), int(vals["n_points"])
            ),
            nvd=NvdReport(float(vals["nvd_master"]), float(vals["nvd_slave"])),
            p_max=float(vals["p_max"]) if "p_max" in vals else None,
            timing_us=timing,
        )


def _eps_key(e: float) -> str:
    return f"{e:g}"


def evaluate(
    corr: CorrespondenceSet,
    h_master: Homography,
    h_slave: Homography,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    **extra,
) -> RectificationReport:
    return RectificationReport(
        pap=pap(corr, h_master, h_slave, epsilons),
        nvd=NvdReport(
            nvd(h_master, corr.width, corr.height), nvd(h_slave, corr.width, corr.height)
        ),
        **extra,
    )
