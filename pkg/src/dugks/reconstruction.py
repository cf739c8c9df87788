"""Face interpolation (2CDI, 4CDI, WENO-Z3, WENO-Z5) and face derivative stencils.

Stencils passed to :func:`face_value` are the cell averages symmetric about
the face ``i+1/2``: four values ``f[i-1..i+2]`` or six values ``f[i-2..i+3]``.
WENO-Z5 needs the six-value form.  Upwind bias follows the sign of the
velocity component normal to the face; a zero wind averages the two biased
reconstructions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba as nb
import numpy as np

# scheme codes shared with the step kernel
CDI2, CDI4, WENO_Z3, WENO_Z5 = 0, 1, 2, 3

_JIT = dict(nogil=True, cache=True, inline="always")


class SchemeKind(enum.IntEnum):
    CDI2 = CDI2
    CDI4 = CDI4
    WENO_Z3 = WENO_Z3
    WENO_Z5 = WENO_Z5

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        key = name.strip().upper().replace("-", "_")
        aliases = {"2CDI": "CDI2", "4CDI": "CDI4", "WZ3": "WENO_Z3", "WZ5": "WENO_Z5"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown face scheme {name!r}") from None


@dataclass(frozen=True)
class FaceScheme:
    kind: SchemeKind = SchemeKind.WENO_Z5
    weno_eps: float = 1e-6
    weno_p: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if not self.weno_eps > 0:
            raise ValueError("weno_eps must be positive")
        if int(self.weno_p) != self.weno_p or self.weno_p < 1:
            raise ValueError("weno_p must be an integer >= 1")

    @property
    def stencil_width(self) -> int:
        return 6 if self.kind == SchemeKind.WENO_Z5 else 4


@nb.njit(**_JIT)
def _zpow(r, p):
    if p == 1:
        return r
    if p == 2:
        return r * r
    return r**p


# w_k = g_k (1 + (tau/d_k)^p) with d_k = eps + beta_k.  Writing every weight
# over the common denominator prod(d_k^p) leaves a single division.


@nb.njit(**_JIT)
def _wz3_weights(a, b, c, eps, p):
    # upwind cells a=i-1, b=i, c=i+1; central stencil first
    b1 = (c - b) * (c - b)
    b2 = (b - a) * (b - a)
    tp = _zpow(abs(b1 - b2), p)
    d1 = _zpow(eps + b1, p)
    d2 = _zpow(eps + b2, p)
    w1 = (2.0 / 3.0) * (d1 + tp) * d2
    w2 = (1.0 / 3.0) * (d2 + tp) * d1
    r = 1.0 / (w1 + w2)
    return w1 * r, w2 * r


@nb.njit(**_JIT)
def _wz3(a, b, c, eps, p):
    w1, w2 = _wz3_weights(a, b, c, eps, p)
    return w1 * (0.5 * b + 0.5 * c) + w2 * (-0.5 * a + 1.5 * b)


@nb.njit(**_JIT)
def _wz5_weights(a, b, c, d, e, eps, p):
    # upwind cells a..e = i-2..i+2
    t1 = a - 2.0 * b + c
    t2 = a - 4.0 * b + 3.0 * c
    z1 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    t1 = b - 2.0 * c + d
    t2 = b - d
    z2 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    t1 = c - 2.0 * d + e
    t2 = 3.0 * c - 4.0 * d + e
    z3 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    tp = _zpow(abs(z1 - z3), p)
    d1 = _zpow(eps + z1, p)
    d2 = _zpow(eps + z2, p)
    d3 = _zpow(eps + z3, p)
    w1 = 0.1 * (d1 + tp) * (d2 * d3)
    w2 = 0.6 * (d2 + tp) * (d1 * d3)
    w3 = 0.3 * (d3 + tp) * (d1 * d2)
    r = 1.0 / (w1 + w2 + w3)
    return w1 * r, w2 * r, w3 * r


@nb.njit(**_JIT)
def _wz5(a, b, c, d, e, eps, p):
    w1, w2, w3 = _wz5_weights(a, b, c, d, e, eps, p)
    q1 = (1.0 / 3.0) * a - (7.0 / 6.0) * b + (11.0 / 6.0) * c
    q2 = -(1.0 / 6.0) * b + (5.0 / 6.0) * c + (1.0 / 3.0) * d
    q3 = (1.0 / 3.0) * c + (5.0 / 6.0) * d - (1.0 / 6.0) * e
    return w1 * q1 + w2 * q2 + w3 * q3


@nb.njit(**_JIT)
def face_kernel(kind, m2, m1, c0, p1, p2, p3, wind, eps, p):
    """Face value at i+1/2 from cells i-2..i+3 (m2..p3)."""
    if kind == CDI2:
        return 0.5 * (c0 + p1)
    if kind == CDI4:
        return (7.0 * (c0 + p1) - (m1 + p2)) / 12.0
    if kind == WENO_Z3:
        if wind > 0:
            return _wz3(m1, c0, p1, eps, p)
        if wind < 0:
            return _wz3(p2, p1, c0, eps, p)
        return 0.5 * (_wz3(m1, c0, p1, eps, p) + _wz3(p2, p1, c0, eps, p))
    if wind > 0:
        return _wz5(m2, m1, c0, p1, p2, eps, p)
    if wind < 0:
        return _wz5(p3, p2, p1, c0, m1, eps, p)
    return 0.5 * (_wz5(m2, m1, c0, p1, p2, eps, p) + _wz5(p3, p2, p1, c0, m1, eps, p))


@nb.njit(cache=True)
def _face_values(kind, st, wind, eps, p):
    n = st.shape[0]
    out = np.empty(n)
    for k in range(n):
        out[k] = face_kernel(
            kind, st[k, 0], st[k, 1], st[k, 2], st[k, 3], st[k, 4], st[k, 5], wind, eps, p
        )
    return out


def _as_six(stencil, scheme: FaceScheme, wind=1.0):
    st = np.asarray(stencil, dtype=np.float64)
    width = st.shape[-1]
    if width == 6:
        return st
    # edge padding: the padded slots carry zero weight for these schemes
    # (NaN would be cheaper to audit but fastmath kernels assume finite input)
    if width == 4 and scheme.kind != SchemeKind.WENO_Z5:
        return np.concatenate([st[..., :1], st, st[..., -1:]], axis=-1)
    if width == 5 and (scheme.kind != SchemeKind.WENO_Z5 or wind > 0):
        return np.concatenate([st, st[..., -1:]], axis=-1)
    raise ValueError(
        f"{scheme.kind.name} with wind {wind:+g} needs {scheme.stencil_width} "
        f"stencil values, got {width}"
    )


def face_value(scheme: FaceScheme, stencil, wind: float = 1.0):
    """Reconstruct the value at face i+1/2.

    ``stencil[..., :]`` holds ``f[i-1..i+2]`` (4 values), ``f[i-2..i+2]``
    (5 values) or ``f[i-2..i+3]`` (6 values).  WENO-Z5 needs all six unless
    the wind is positive.  Returns a float for a single stencil, else an array.
    """
    st = _as_six(stencil, scheme, wind)
    flat = np.ascontiguousarray(st.reshape(-1, 6))
    out = _face_values(int(scheme.kind), flat, float(np.sign(wind)), scheme.weno_eps,
                       int(scheme.weno_p))
    if st.ndim == 1:
        return float(out[0])
    return out.reshape(st.shape[:-1])


def weno_weights(scheme: FaceScheme, stencil, wind: float = 1.0) -> np.ndarray:
    """Nonlinear weights (upwind orientation) for a single stencil."""
    st = _as_six(stencil, scheme, wind)
    if wind < 0:
        st = st[::-1]
    m2, m1, c0, p1, p2, _ = (float(v) for v in st)
    if scheme.kind == SchemeKind.WENO_Z3:
        return np.array(_wz3_weights(m1, c0, p1, scheme.weno_eps, scheme.weno_p))
    if scheme.kind == SchemeKind.WENO_Z5:
        return np.array(_wz5_weights(m2, m1, c0, p1, p2, scheme.weno_eps, scheme.weno_p))
    raise ValueError("linear schemes have no nonlinear weights")


def face_first_derivatives(cells_x, faces_y, h: float = 1.0):
    """(d/dx, d/dy) at face (i+1/2, j).

    cells_x: cell averages f[i-1..i+2, j]
    faces_y: face values f[i+1/2, j-2..j+2]
    """
    c = np.asarray(cells_x, dtype=np.float64)
    f = np.asarray(faces_y, dtype=np.float64)
    dx = (c[..., 0] - 15.0 * c[..., 1] + 15.0 * c[..., 2] - c[..., 3]) / (12.0 * h)
    dy = (8.0 * (f[..., 3] - f[..., 1]) - f[..., 4] + f[..., 0]) / (12.0 * h)
    return dx, dy


def face_second_derivatives(cells_x, faces_y, corners, h: float = 1.0):
    """(d2/dx2, d2/dy2, d2/dxdy) at face (i+1/2, j).

    cells_x: f[i-1..i+2, j]
    faces_y: f[i+1/2, j-1..j+1]
    corners: ``corners[..., di, dj]`` = f[i+di, j-1+2*dj] for di, dj in {0, 1}
    """
    c = np.asarray(cells_x, dtype=np.float64)
    f = np.asarray(faces_y, dtype=np.float64)
    q = np.asarray(corners, dtype=np.float64)
    dxx = (c[..., 3] - c[..., 2] - c[..., 1] + c[..., 0]) / (2.0 * h * h)
    dyy = (f[..., 2] - 2.0 * f[..., 1] + f[..., 0]) / (h * h)
    dxy = (q[..., 1, 1] - q[..., 1, 0] - q[..., 0, 1] + q[..., 0, 0]) / (2.0 * h * h)
    return dxx, dyy, dxy


# Second-order face stencils and their isotropic three-row averages.  The
# solver does not use these; they document the direction-dependent leading
# truncation error that the isotropic forms remove.


def c2_face_value(cells):
    """(f[i] + f[i+1]) / 2; ``cells[..., 0:2]`` = f[i], f[i+1]."""
    c = np.asarray(cells, dtype=np.float64)
    return 0.5 * (c[..., 0] + c[..., 1])


def c2_face_dx(cells, h: float = 1.0):
    c = np.asarray(cells, dtype=np.float64)
    return (c[..., 1] - c[..., 0]) / h


def c2_face_dy(faces, h: float = 1.0):
    """Central y-difference of face values ``faces[..., 0:3]`` at rows j-1..j+1."""
    f = np.asarray(faces, dtype=np.float64)
    return (f[..., 2] - f[..., 0]) / (2.0 * h)


def isotropic_face_value(cells):
    """Rows j-1, j, j+1 of the C2 face value weighted 1:4:1.

    cells[..., r, k] = f[i+k, j-1+r]
    """
    v = c2_face_value(cells)
    return (v[..., 0] + 4.0 * v[..., 1] + v[..., 2]) / 6.0


def isotropic_face_dx(cells, h: float = 1.0):
    """Rows j-1, j, j+1 of the C2 x-derivative weighted 1:10:1."""
    d = c2_face_dx(cells, h)
    return (d[..., 0] + 10.0 * d[..., 1] + d[..., 2]) / 12.0
