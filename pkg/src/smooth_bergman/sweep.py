"""Log-log decay fits and the CSV form of an h-sweep."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

__all__ = ["SlopeFit", "SweepReport", "fit_slope", "NOISE_FLOOR", "SLOPE_SLACK"]

NOISE_FLOOR = 1e-8
SLOPE_SLACK = 0.3


@dataclass
class SlopeFit:
    """Least-squares fit ``log e = p log h + c``.

    ``exact`` marks sweeps whose errors all sit at or below the noise floor;
    the slope is then meaningless and reported as infinity.
    """

    slope: float
    intercept: float
    residual: float
    stderr: float
    exact: bool = False


def fit_slope(h: Sequence[float], errors: Sequence[float], noise_floor: float = NOISE_FLOOR) -> SlopeFit:
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(h) < 3:
        raise ValueError("a slope fit needs at least 3 h values")
    if np.all(e <= noise_floor):
        return SlopeFit(math.inf, math.nan, 0.0, 0.0, exact=True)
    lx, ly = np.log(h), np.log(np.maximum(e, np.finfo(float).tiny))
    fit = stats.linregress(lx, ly)
    resid = ly - (fit.slope * lx + fit.intercept)
    return SlopeFit(
        float(fit.slope), float(fit.intercept), float(np.sqrt(np.mean(resid**2))), float(fit.stderr)
    )


@dataclass
class SweepReport:
    """Per-h error table with its fitted decay rate.

    ``threshold`` is the slope the contract demands; ``passed`` is true when
    the fit reaches it or the sweep is exact.
    """

    h_values: list
    errors: list
    fit: SlopeFit
    threshold: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def exact(self) -> bool:
        return self.fit.exact

    @property
    def passed(self) -> bool:
        if self.fit.exact:
            return True
        return self.threshold is None or self.fit.slope >= self.threshold

    @classmethod
    def from_errors(cls, h_values, errors, threshold=None, metadata=None, noise_floor=NOISE_FLOOR):
        h_values = [float(h) for h in h_values]
        errors = [float(e) for e in errors]
        return cls(h_values, errors, fit_slope(h_values, errors, noise_floor), threshold, dict(metadata or {}))

    def summary(self) -> str:
        label = self.metadata.get("label", "sweep")
        if self.exact:
            return f"{label}: exact (errors <= noise floor, max {max(self.errors):.2e})"
        status = "pass" if self.passed else "FAIL"
        thr = "" if self.threshold is None else f" (need >= {self.threshold:.2f})"
        return f"{label}: slope {self.slope:.3f}{thr} residual {self.fit.residual:.3f} {status}"

    def csv_text(self) -> str:
        meta = dict(self.metadata)
        meta.update(
            slope=None if self.exact else self.fit.slope,
            exact=self.exact,
            threshold=self.threshold,
            stderr=self.fit.stderr,
        )
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
        buf.write("h,error,slope,residual\n")
        slope = "exact" if self.exact else repr(self.fit.slope)
        for h, e in zip(self.h_values, self.errors):
            buf.write(f"{h!r},{e!r},{slope},{self.fit.residual!r}\n")
        return buf.getvalue()

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.csv_text())
        return path
