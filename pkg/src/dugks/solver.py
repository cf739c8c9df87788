"""DUGKS time stepping for the conservative Allen-Cahn equation.

Presets:

- ``DUGKS-AC``: variant B with the linear characteristic reconstruction
- ``DUGKS-I``:  variant A with the parabolic reconstruction
- ``DUGKS-II``: variant B with the parabolic reconstruction
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernel
from .fields import DistField, Grid2D, ScalarField, VectorField
from .fields import interface_normal, isotropic_gradient
from .kinetic import KineticModel, Variant, equilibrium, source_term, theta
from .lattice import D2Q9, LatticeD2Q9
from .reconstruction import FaceScheme


class FluxMode(enum.IntEnum):
    LINEAR = 0
    PARABOLIC = 1

    @classmethod
    def parse(cls, name) -> "FluxMode":
        if isinstance(name, FluxMode):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown flux mode {name!r}") from None


PRESETS = {
    "DUGKS-AC": (Variant.B, FluxMode.LINEAR),
    "DUGKS-I": (Variant.A, FluxMode.PARABOLIC),
    "DUGKS-II": (Variant.B, FluxMode.PARABOLIC),
}


def resolve_preset(name: str) -> tuple[Variant, FluxMode]:
    key = name.strip().upper()
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[key]


class SolverDivergence(RuntimeError):
    def __init__(self, step: int, last_phi_sum: float):
        super().__init__(f"non-finite distribution after step {step}")
        self.step = step
        self.last_phi_sum = last_phi_sum


@dataclass(frozen=True)
class SolverConfig:
    grid: Grid2D
    variant: Variant = Variant.A
    flux_mode: FluxMode = FluxMode.PARABOLIC
    face_scheme: FaceScheme = field(default_factory=FaceScheme)
    chi: float = 0.5
    W: float = 4.0
    Pe: float = 60.0
    U0: float = 0.02
    lattice: LatticeD2Q9 = field(default=D2Q9, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "flux_mode", FluxMode.parse(self.flux_mode))
        derived_timestep(self)
        if not self.W > 0 or not self.Pe > 0 or not self.U0 > 0:
            raise ValueError("W, Pe and U0 must be positive")

    @classmethod
    def preset(cls, name: str, grid: Grid2D, **kw) -> "SolverConfig":
        variant, mode = resolve_preset(name)
        return cls(grid=grid, variant=variant, flux_mode=mode, **kw)

    @property
    def model(self) -> KineticModel:
        return KineticModel.from_peclet(self.variant, self.W, self.Pe, self.U0, self.lattice)

    @property
    def dt(self) -> float:
        return derived_timestep(self)

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


def derived_timestep(config) -> float:
    """dt = chi * dx, with 0 < chi <= 1."""
    chi = config.chi
    if not (0.0 < chi <= 1.0):
        raise ValueError(f"chi must lie in (0, 1], got {chi}")
    return chi * config.grid.h


VelocitySampler = Callable[[np.ndarray, np.ndarray, float], tuple]


@dataclass
class SolverState:
    f_tilde: DistField
    phi: ScalarField
    phiu_prev: VectorField
    time: float = 0.0
    step_count: int = 0


def _sample(u: VelocitySampler, x, y, t):
    ux, uy = u(x, y, t)
    return (np.ascontiguousarray(np.broadcast_to(ux, x.shape), dtype=np.float64),
            np.ascontiguousarray(np.broadcast_to(uy, x.shape), dtype=np.float64))


def initialize(config: SolverConfig, phi0: ScalarField, u: VelocitySampler) -> SolverState:
    """Start at local equilibrium: f_tilde = f_eq - (dt/2) F."""
    grid = config.grid
    if phi0.grid != grid:
        raise ValueError("initial field grid does not match the solver grid")
    if not phi0.is_finite():
        raise ValueError("initial order parameter has non-finite values")
    model = config.model
    x, y = grid.cell_centers()
    ux, uy = _sample(u, x, y, 0.0)
    uvec = np.stack([ux, uy], axis=-1)
    phi = phi0.values
    n = interface_normal(isotropic_gradient(phi0, config.lattice))
    feq = equilibrium(model, phi, uvec)
    F = source_term(model, theta(phi, config.W), n.values, np.zeros_like(uvec))
    ft = feq - 0.5 * config.dt * F
    ft = np.ascontiguousarray(np.moveaxis(ft, -1, 0))
    return SolverState(
        f_tilde=DistField(grid, ft),
        phi=ScalarField(grid, ft.sum(axis=0)),
        phiu_prev=VectorField(grid, phi[..., None] * uvec),
    )


class Solver:
    """Owns the work buffers and velocity samples for repeated stepping.

    Two distribution buffers are swapped each step, so a state returned by
    :meth:`step` is only valid until the next call.  Use :func:`step` for a
    copy-safe single update.

    Velocity samplers are called as ``u(x, y, t)``.  A sampler with
    ``steady = True`` is sampled once; one exposing ``spatial(x, y)`` and
    ``time_factor(t)`` is sampled once and rescaled every step.
    """

    def __init__(self, config: SolverConfig, state: SolverState, u: VelocitySampler):
        self.config = config
        self.state = state
        self.u = u
        grid = config.grid
        self._ws = _kernel.workspace(grid.nx, grid.ny)
        self._xc = grid.cell_centers()
        self._xf = grid.xface_centers()
        self._yf = grid.yface_centers()
        self._steady = bool(getattr(u, "steady", False))
        self._separable = hasattr(u, "spatial") and hasattr(u, "time_factor")
        self._cache = None
        self._buf = np.empty_like(state.f_tilde.values)
        self._zero = np.zeros(grid.shape)
        self._tau = config.model.tau_f

    def _velocities(self, t):
        s = 0.5 * self.config.dt
        if self._separable:
            # u(x, t) = g(t) U(x): scale the cached spatial samples
            if self._cache is None:
                sp = self.u.spatial
                self._cache = (*_sample(lambda x, y, _: sp(x, y), *self._xc, 0.0),
                               *_sample(lambda x, y, _: sp(x, y), *self._xf, 0.0),
                               *_sample(lambda x, y, _: sp(x, y), *self._yf, 0.0))
            gc = self.u.time_factor(t)
            gf = self.u.time_factor(t + s)
            c = self._cache
            return (gc * c[0], gc * c[1], gf * c[2], gf * c[3], gf * c[4], gf * c[5])
        if self._steady and self._cache is not None:
            return self._cache
        out = (*_sample(self.u, *self._xc, t), *_sample(self.u, *self._xf, t + s),
               *_sample(self.u, *self._yf, t + s))
        if self._steady:
            self._cache = out
        return out

    def step(self) -> SolverState:
        cfg = self.config
        st = self.state
        lat = cfg.lattice
        ucx, ucy, fxx, fxy, fyx, fyy = self._velocities(st.time)
        ft = st.f_tilde.values
        phi = st.phi.values
        if cfg.variant == Variant.B:
            phiu = np.stack([phi * ucx, phi * ucy], axis=-1)
            dtpu = (phiu - st.phiu_prev.values) / cfg.dt
            dtx = np.ascontiguousarray(dtpu[..., 0])
            dty = np.ascontiguousarray(dtpu[..., 1])
        else:
            phiu = None
            dtx = dty = self._zero
        scheme = cfg.face_scheme
        total = _kernel.step(
            ft, self._buf, ucx, ucy, fxx, fxy, fyx, fyy, dtx, dty,
            int(cfg.variant), int(cfg.flux_mode == FluxMode.PARABOLIC), int(scheme.kind),
            float(scheme.weno_eps), int(scheme.weno_p), lat.c, lat.cs2, float(cfg.W),
            self._tau, cfg.dt, cfg.grid.h, self._ws,
        )
        if not math.isfinite(total):
            raise SolverDivergence(st.step_count + 1, float(phi.sum()))
        new_ft, self._buf = self._buf, ft
        if phiu is None:
            phiu_prev = st.phiu_prev
            phiu_prev.values[..., 0] = phi * ucx
            phiu_prev.values[..., 1] = phi * ucy
        else:
            phiu_prev = VectorField(cfg.grid, phiu)
        self.state = SolverState(
            f_tilde=DistField(cfg.grid, new_ft),
            phi=ScalarField(cfg.grid, new_ft.sum(axis=0)),
            phiu_prev=phiu_prev,
            time=st.time + cfg.dt,
            step_count=st.step_count + 1,
        )
        return self.state

    def advance(self, nsteps: int, callback=None, every: int = 1) -> SolverState:
        for _ in range(nsteps):
            self.step()
            if callback is not None and self.state.step_count % every == 0:
                callback(self.state)
        return self.state


def step(state: SolverState, config: SolverConfig, u: VelocitySampler) -> SolverState:
    """Single step that leaves ``state`` untouched."""
    copy = SolverState(
        f_tilde=DistField(config.grid, state.f_tilde.values.copy()),
        phi=ScalarField(config.grid, state.phi.values.copy()),
        phiu_prev=VectorField(config.grid, state.phiu_prev.values.copy()),
        time=state.time,
        step_count=state.step_count,
    )
    return Solver(config, copy, u).step()
