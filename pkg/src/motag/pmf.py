from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-10


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on ``{0, ..., m}``.

    ``mass[y]`` is the probability of ``y``. Construction checks that the
    entries are nonnegative and sum to one within ``SUM_TOL``.
    """

    m: int
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (self.m + 1,):
            raise ValueError(f"mass must have length m+1={self.m + 1}, got {mass.shape}")
        if np.any(mass < 0):
            raise ValueError("mass has negative entries")
        if abs(mass.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"mass sums to {mass.sum()!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    def __getitem__(self, y):
        return self.mass[y]

    def __len__(self):
        return self.m + 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.m + 1), self.mass))

    def var(self) -> float:
        y = np.arange(self.m + 1)
        mu = self.mean()
        return float(np.dot((y - mu) ** 2, self.mass))

    def cdf(self, y: int) -> float:
        """P(Y <= y)."""
        if y < 0:
            return 0.0
        return float(min(1.0, self.mass[: min(y, self.m) + 1].sum()))

    def mode(self) -> int:
        return int(np.argmax(self.mass))

    @classmethod
    def from_log_weights(cls, log_w, tol: float | None = None) -> Pmf:
        """Exponentiate unnormalized log-weights and renormalize.

        If ``tol`` is given, the weights are expected to already sum to one and
        :class:`~motag.errors.PrecisionError` is raised when the pre-normalization
        total is further than ``tol`` from one.
        """
        from .errors import PrecisionError

        log_w = np.asarray(log_w, dtype=float)
        w = np.exp(log_w)
        total = w.sum()
        if tol is not None and abs(total - 1.0) > tol:
            raise PrecisionError(f"normalization factor {total!r} deviates from 1 by more than {tol}")
        return cls(len(w) - 1, w / total)
