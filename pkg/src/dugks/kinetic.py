"""Kinetic models for the conservative Allen-Cahn equation.

Variant A: second-order equilibrium, source ``w Theta xi.n``.
Variant B: linear equilibrium, source adds ``w xi.d_t(phi u) / cs2``.

Populations sit on the last axis (shape ``(..., 9)``) throughout this module.
The transforms between the auxiliary distributions are affine per population.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .lattice import D2Q9, LatticeD2Q9


class Variant(enum.IntEnum):
    A = 0
    B = 1

    @classmethod
    def parse(cls, name) -> "Variant":
        if isinstance(name, Variant):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown kinetic variant {name!r}") from None


@dataclass(frozen=True)
class KineticModel:
    variant: Variant
    W: float
    tau_f: float
    lattice: LatticeD2Q9 = field(default=D2Q9, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not self.W > 0:
            raise ValueError("interface width W must be positive")
        if not self.tau_f > 0:
            raise ValueError("relaxation time tau_f must be positive")

    @property
    def mobility(self) -> float:
        return self.lattice.cs2 * self.tau_f

    @classmethod
    def from_peclet(cls, variant, W: float, Pe: float, U0: float,
                    lattice: LatticeD2Q9 = D2Q9) -> "KineticModel":
        """tau_f = M / cs2 with M = U0 W / Pe (reference length = W)."""
        if not Pe > 0:
            raise ValueError("Pe must be positive")
        return cls(variant, W, U0 * W / Pe / lattice.cs2, lattice)


def theta(phi, W: float):
    return 2.0 * (1.0 - np.square(phi)) / W


def equilibrium(model: KineticModel, phi, u):
    lat = model.lattice
    phi = np.asarray(phi, dtype=np.float64)[..., None]
    u = np.asarray(u, dtype=np.float64)
    cs2 = lat.cs2
    xu = u @ lat.velocities.T
    if model.variant == Variant.A:
        uu = np.sum(u * u, axis=-1)[..., None]
        poly = 1.0 + xu / cs2 + xu * xu / (2.0 * cs2 * cs2) - uu / (2.0 * cs2)
    else:
        poly = 1.0 + xu / cs2
    return lat.weights * phi * poly


def source_term(model: KineticModel, theta_value, n, dtphiu=None):
    """F_a = w_a Theta xi_a.n  (+ w_a xi_a.dtphiu / cs2 for variant B)."""
    lat = model.lattice
    th = np.asarray(theta_value, dtype=np.float64)[..., None]
    xn = np.asarray(n, dtype=np.float64) @ lat.velocities.T
    F = lat.weights * th * xn
    if model.variant == Variant.B and dtphiu is not None:
        F = F + lat.weights * (np.asarray(dtphiu, dtype=np.float64) @ lat.velocities.T) / lat.cs2
    return F


def f_hat_plus_from_f_tilde(ft, feq, F, tau_f: float, dt: float):
    s = 0.5 * dt
    d = 2.0 * tau_f + dt
    return ((2.0 * tau_f - s) / d) * ft + (3.0 * s / d) * feq + (3.0 * tau_f * s / d) * F


def f_tilde_plus(ft, feq, F, tau_f: float, dt: float):
    d = 2.0 * tau_f + dt
    return ((2.0 * tau_f - dt) / d) * ft + (2.0 * dt / d) * feq + (2.0 * tau_f * dt / d) * F


def f_original_from_f_hat(fh, feq, F, tau_f: float, s: float):
    d = 2.0 * tau_f + s
    return (2.0 * tau_f / d) * fh + (s / d) * feq + (tau_f * s / d) * F


def f_hat_from_f(f, feq, F, tau_f: float, s: float):
    """Inverse of :func:`f_original_from_f_hat`."""
    return ((2.0 * tau_f + s) / (2.0 * tau_f)) * f - (s / (2.0 * tau_f)) * feq - 0.5 * s * F


def f_tilde_from_f_bar(f, feq, F, tau_f: float, dt: float):
    return ((2.0 * tau_f + dt) / (2.0 * tau_f)) * f - (dt / (2.0 * tau_f)) * feq - 0.5 * dt * F
