"""Log-log convergence fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ConvergenceFit", "fit_loglog", "EXACT_FLOOR"]

#: Residuals below this are treated as rounding noise.
EXACT_FLOOR = 1e-12


@dataclass(frozen=True)
class ConvergenceFit:
    """Least-squares fit ``log r = slope * log k + intercept``.

    ``exact`` is set when every residual sits below the rounding floor; the
    slope is then meaningless (reported as ``-inf``) and any order bound holds.
    """

    ks: tuple
    values: tuple
    slope: float
    intercept: float
    exact: bool

    def satisfies(self, threshold: float) -> bool:
        return self.exact or self.slope <= threshold

    def as_dict(self) -> dict:
        return {"ks": list(self.ks), "values": [float(v) for v in self.values],
                "slope": None if self.exact else float(self.slope),
                "intercept": None if self.exact else float(self.intercept),
                "exact": self.exact}


def fit_loglog(ks, values, floor: float = EXACT_FLOOR) -> ConvergenceFit:
    ks = np.asarray(ks, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if ks.size != v.size or ks.size < 2:
        raise ValueError("need at least two (k, value) pairs")
    if np.all(v <= floor):
        return ConvergenceFit(tuple(ks), tuple(v), -np.inf, -np.inf, True)
    v = np.maximum(v, floor)
    slope, intercept = np.polyfit(np.log(ks), np.log(v), 1)
    return ConvergenceFit(tuple(ks), tuple(v), float(slope), float(intercept), False)
