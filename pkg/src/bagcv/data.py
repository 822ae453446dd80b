"""Immutable sorted sample container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Sample:
    """Sorted vector of real observations.

    Construct with :meth:`from_values`, which sorts and validates.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise DataError("a sample needs at least two observations")
        if not np.all(np.isfinite(v)):
            raise DataError("sample contains non-finite values")
        if np.any(np.diff(v) < 0):
            raise DataError("sample values must be nondecreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values) -> "Sample":
        v = np.sort(np.asarray(values, dtype=float))
        return cls(v)

    @property
    def n(self) -> int:
        return self.values.size

    def scale_estimate(self) -> float:
        """Robust scale: min(sd, IQR/1.349), falling back to sd if IQR is 0."""
        sd = float(np.std(self.values, ddof=1))
        q75, q25 = np.percentile(self.values, [75, 25])
        iqr = float(q75 - q25)
        if iqr > 0.0:
            return min(sd, iqr / 1.349)
        return sd
