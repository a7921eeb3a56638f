"""Singular values, weak-Schatten diagnostics, submajorization, power-law fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import OperatorMatrix


def singular_values(A) -> np.ndarray:
    """Full singular value spectrum, descending."""
    entries = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=float)
    try:
        s = np.linalg.svd(entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD failed for a {entries.shape[0]}x{entries.shape[1]} matrix "
            f"(fro={np.linalg.norm(entries):.3e}): {exc}"
        ) from exc
    return np.sort(s)[::-1]


def weak_quasinorm(s, p: float) -> float:
    """sup over k of (k+1)^(1/p) * mu_k for a descending sequence."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        raise ValueError("empty singular value sequence")
    if p <= 0:
        raise ValueError("p must be positive")
    k = np.arange(s.size, dtype=float)
    return float(np.max((k + 1.0) ** (1.0 / p) * s))


def submajorize_check(g, f) -> bool:
    """True iff every prefix sum of the decreasing rearrangement of g is
    dominated by that of f (shorter sequence padded with zeros)."""
    g = np.sort(np.asarray(g, dtype=float))[::-1]
    f = np.sort(np.asarray(f, dtype=float))[::-1]
    m = max(g.size, f.size)
    g = np.pad(g, (0, m - g.size))
    f = np.pad(f, (0, m - f.size))
    return bool(np.all(np.cumsum(g) <= np.cumsum(f)))


@dataclass
class WeylFit:
    exponent: float  # free-fit slope of log mu vs log(k+1); ~ -1/p on a power law
    coefficient: float  # exp(intercept) of the free fit
    pinned_coefficient: float  # coefficient with the exponent pinned to -1/p
    window: tuple  # (lo, hi) inclusive 0-based index range used
    residual: float  # rms log-residual of the free fit

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "pinned_coefficient": self.pinned_coefficient,
            "window": [int(self.window[0]), int(self.window[1])],
            "residual": self.residual,
        }


def default_window(N: int, lo_exp: float = 0.3, hi_exp: float = 0.7) -> tuple:
    lo = int(np.ceil(N**lo_exp))
    hi = int(np.floor(N**hi_exp))
    return lo, hi


def weyl_fit(s, p: float, window=None) -> WeylFit:
    """Power-law fit of the singular value tail over an index window.

    The head of the spectrum carries the symbol's large-scale shape and the
    tail the discretization cutoff, so the default window is
    [N^0.3, N^0.7].  Both the free fit and the fit with exponent pinned to
    -1/p are reported; ratio experiments consume the pinned coefficient.
    """
    s = np.asarray(s, dtype=float)
    N = s.size
    if window is None:
        window = default_window(N)
    lo, hi = int(window[0]), int(window[1])
    if not (0 <= lo < hi < N):
        raise ValueError(f"window {window} invalid for a sequence of length {N}")
    mu = s[lo : hi + 1]
    if np.any(mu <= 0):
        raise ValueError("zero singular values inside the fit window")
    logk = np.log(np.arange(lo, hi + 1, dtype=float) + 1.0)
    logmu = np.log(mu)
    slope, intercept = np.polyfit(logk, logmu, 1)
    resid = logmu - (slope * logk + intercept)
    pinned = float(np.exp(np.mean(logmu + logk / p)))
    return WeylFit(
        exponent=float(slope),
        coefficient=float(np.exp(intercept)),
        pinned_coefficient=pinned,
        window=(lo, hi),
        residual=float(np.sqrt(np.mean(resid**2))),
    )
