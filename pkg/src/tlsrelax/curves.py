from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class RelaxationCurve:
    """A scalar relaxation function sampled on a time grid."""

    times: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != self.times.shape:
            raise ValueError("times and values must have the same shape")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.times.shape:
                raise ValueError("stderr must match times")

    def __len__(self):
        return len(self.times)

    def at(self, t):
        """Linear interpolation of the (real part of the) values."""
        return np.interp(t, self.times, np.real(self.values))
