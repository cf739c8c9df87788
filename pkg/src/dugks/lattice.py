"""D2Q9 velocity set and discrete moments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# rest, 4 axis, 4 diagonal
_E = np.array(
    [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1], [1, 1], [-1, 1], [-1, -1], [1, -1]],
    dtype=np.int64,
)
_W = np.array([4 / 9] + [1 / 9] * 4 + [1 / 36] * 4)

RT_DEFAULT = 1.0 / 3.0


@dataclass(frozen=True)
class LatticeD2Q9:
    """Discrete velocities ``xi = c * e`` with ``c = sqrt(3 RT)``."""

    rt: float = RT_DEFAULT
    e: np.ndarray = field(default_factory=lambda: _E.copy(), repr=False)
    weights: np.ndarray = field(default_factory=lambda: _W.copy(), repr=False)

    def __post_init__(self):
        if self.rt <= 0:
            raise ValueError("RT must be positive")
        self.e.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def c(self) -> float:
        return float(np.sqrt(3.0 * self.rt))

    @property
    def cs2(self) -> float:
        return self.c**2 / 3.0

    @property
    def sound_speed(self) -> float:
        return self.c / np.sqrt(3.0)

    @property
    def velocities(self) -> np.ndarray:
        return self.c * self.e

    @property
    def q(self) -> int:
        return 9


D2Q9 = LatticeD2Q9()


def moment0(f):
    """Sum over the last (velocity) axis."""
    return np.sum(f, axis=-1)


def moment1(f, lattice: LatticeD2Q9 = D2Q9):
    return np.asarray(f) @ lattice.velocities


def moment2(f, lattice: LatticeD2Q9 = D2Q9):
    xi = lattice.velocities
    return np.einsum("...a,ai,aj->...ij", f, xi, xi)
