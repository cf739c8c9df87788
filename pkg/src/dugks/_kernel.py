"""Fused DUGKS time step.

Arrays are velocity-major ``[a, i, j]``.  Cell-centred work arrays carry a
periodic halo of ``G`` cells on both axes, so stencil loops run over a
contiguous ``j`` range with no wrap-around arithmetic.  Branches on the
scheme, wind and WENO power are hoisted out of the inner loops to keep them
vectorisable.
"""
import numba as nb
import numpy as np

from .reconstruction import CDI2, CDI4, WENO_Z3, _wz3, _wz5

G = 3
EX = np.array([0, 1, 0, -1, 0, 1, -1, -1, 1], dtype=np.float64)
EY = np.array([0, 0, 1, 0, -1, 1, 1, -1, -1], dtype=np.float64)
WA = np.array([4 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 9, 1 / 36, 1 / 36, 1 / 36, 1 / 36])

# no nnan/ninf: divergence has to stay observable
_FM = {"nsz", "arcp", "contract", "afn", "reassoc"}
_JIT = dict(nogil=True, cache=True, fastmath=_FM, error_model="numpy", boundscheck=False)
_INL = dict(_JIT, inline="always")

# cell work-array slots
PHI, NX, NY, DX, DY, TH, UX, UY = range(8)


@nb.njit(**_JIT)
def fill_halo(a, nx, ny):
    for q in range(a.shape[0]):
        for g in range(G):
            for j in range(G, ny + G):
                a[q, g, j] = a[q, nx + g, j]
                a[q, nx + G + g, j] = a[q, G + g, j]
        for i in range(nx + 2 * G):
            for g in range(G):
                a[q, i, g] = a[q, i, ny + g]
                a[q, i, ny + G + g] = a[q, i, G + g]


@nb.njit(**_INL)
def feq_F(a, variant, c, cs2, phi, th, ux, uy, nx_, ny_, dx_, dy_):
    xu = c * (EX[a] * ux + EY[a] * uy)
    xn = c * (EX[a] * nx_ + EY[a] * ny_)
    if variant == 0:
        uu = ux * ux + uy * uy
        feq = WA[a] * phi * (1.0 + xu / cs2 + xu * xu / (2.0 * cs2 * cs2) - uu / (2.0 * cs2))
        F = WA[a] * th * xn
    else:
        feq = WA[a] * phi * (1.0 + xu / cs2)
        F = WA[a] * (th * xn + c * (EX[a] * dx_ + EY[a] * dy_) / cs2)
    return feq, F


@nb.njit(**_INL)
def _wz3_line(wind, src, dst, n, eps, p):
    if wind > 0:
        for k in range(n):
            dst[k] = _wz3(src[k + 1], src[k + 2], src[k + 3], eps, p)
    elif wind < 0:
        for k in range(n):
            dst[k] = _wz3(src[k + 4], src[k + 3], src[k + 2], eps, p)
    else:
        for k in range(n):
            dst[k] = 0.5 * (_wz3(src[k + 1], src[k + 2], src[k + 3], eps, p)
                            + _wz3(src[k + 4], src[k + 3], src[k + 2], eps, p))


@nb.njit(**_JIT)
def face_line(kind, wind, src, dst, n, eps, p):
    """dst[k] = face value between src[k+2] and src[k+3] for k < n.

    ``src[k..k+5]`` are the cells i-2..i+3 around face k.
    """
    if kind == CDI2:
        for k in range(n):
            dst[k] = 0.5 * (src[k + 2] + src[k + 3])
    elif kind == CDI4:
        for k in range(n):
            dst[k] = (7.0 * (src[k + 2] + src[k + 3]) - (src[k + 1] + src[k + 4])) / 12.0
    elif kind == WENO_Z3:
        if p == 1:
            _wz3_line(wind, src, dst, n, eps, 1)
        else:
            _wz3_line(wind, src, dst, n, eps, p)
    elif p == 1:
        if wind > 0:
            for k in range(n):
                dst[k] = _wz5(src[k], src[k + 1], src[k + 2], src[k + 3], src[k + 4], eps, 1)
        elif wind < 0:
            for k in range(n):
                dst[k] = _wz5(src[k + 5], src[k + 4], src[k + 3], src[k + 2], src[k + 1], eps, 1)
        else:
            for k in range(n):
                dst[k] = 0.5 * (
                    _wz5(src[k], src[k + 1], src[k + 2], src[k + 3], src[k + 4], eps, 1)
                    + _wz5(src[k + 5], src[k + 4], src[k + 3], src[k + 2], src[k + 1], eps, 1))
    else:
        if wind > 0:
            for k in range(n):
                dst[k] = _wz5(src[k], src[k + 1], src[k + 2], src[k + 3], src[k + 4], eps, p)
        elif wind < 0:
            for k in range(n):
                dst[k] = _wz5(src[k + 5], src[k + 4], src[k + 3], src[k + 2], src[k + 1], eps, p)
        else:
            for k in range(n):
                dst[k] = 0.5 * (
                    _wz5(src[k], src[k + 1], src[k + 2], src[k + 3], src[k + 4], eps, p)
                    + _wz5(src[k + 5], src[k + 4], src[k + 3], src[k + 2], src[k + 1], eps, p))


@nb.njit(**_INL)
def _wz3_row(wind, src, k, dst, eps, p):
    n = dst.shape[0]
    if wind > 0:
        for j in range(n):
            dst[j] = _wz3(src[k + 1, j], src[k + 2, j], src[k + 3, j], eps, p)
    elif wind < 0:
        for j in range(n):
            dst[j] = _wz3(src[k + 4, j], src[k + 3, j], src[k + 2, j], eps, p)
    else:
        for j in range(n):
            dst[j] = 0.5 * (_wz3(src[k + 1, j], src[k + 2, j], src[k + 3, j], eps, p)
                            + _wz3(src[k + 4, j], src[k + 3, j], src[k + 2, j], eps, p))


@nb.njit(**_INL)
def _wz5_row(wind, src, k, dst, eps, p):
    n = dst.shape[0]
    if wind > 0:
        for j in range(n):
            dst[j] = _wz5(src[k, j], src[k + 1, j], src[k + 2, j], src[k + 3, j],
                          src[k + 4, j], eps, p)
    elif wind < 0:
        for j in range(n):
            dst[j] = _wz5(src[k + 5, j], src[k + 4, j], src[k + 3, j], src[k + 2, j],
                          src[k + 1, j], eps, p)
    else:
        for j in range(n):
            dst[j] = 0.5 * (
                _wz5(src[k, j], src[k + 1, j], src[k + 2, j], src[k + 3, j], src[k + 4, j], eps, p)
                + _wz5(src[k + 5, j], src[k + 4, j], src[k + 3, j], src[k + 2, j],
                       src[k + 1, j], eps, p))


@nb.njit(**_JIT)
def face_row(kind, wind, src, k, dst, eps, p):
    """dst[j] = value on the face between rows src[k+2] and src[k+3].

    ``src`` is a C-contiguous plane; rows k..k+5 form the stencil.  Taking the
    whole plane plus an offset (rather than a slice) keeps the layout known to
    the compiler so the loop over j vectorises.
    """
    n = dst.shape[0]
    if kind == CDI2:
        for j in range(n):
            dst[j] = 0.5 * (src[k + 2, j] + src[k + 3, j])
    elif kind == CDI4:
        for j in range(n):
            dst[j] = (7.0 * (src[k + 2, j] + src[k + 3, j]) - (src[k + 1, j] + src[k + 4, j])) / 12.0
    elif kind == WENO_Z3:
        if p == 1:
            _wz3_row(wind, src, k, dst, eps, 1)
        else:
            _wz3_row(wind, src, k, dst, eps, p)
    elif p == 1:
        _wz5_row(wind, src, k, dst, eps, 1)
    else:
        _wz5_row(wind, src, k, dst, eps, p)


@nb.njit(**_JIT)
def step(ft, out, ucx, ucy, ufx_x, ufx_y, ufy_x, ufy_y, dtpu_x, dtpu_y,
         variant, parabolic, kind, eps, wp, c, cs2, W, tau, dt, h, ws):
    """Advance ``ft`` by one step into ``out``; returns the new sum of phi.

    ucx/ucy: cell velocity at t_n, (nx, ny)
    ufx_*:   x-face velocity at t_n + dt/2, face k at x = k h, (nx, ny)
    ufy_*:   y-face velocity at t_n + dt/2, face k at y = k h, (nx, ny)
    dtpu_*:  lagged d_t(phi u) at cells (variant B only)
    ws:      tuple of work arrays from :func:`workspace`
    """
    fp, fvx, fvy, cell, rows = ws
    nq, nx, ny = ft.shape
    s = 0.5 * dt

    for i in range(nx):
        I = i + G
        for j in range(ny):
            cell[PHI, I, j + G] = 0.0
        for a in range(9):
            for j in range(ny):
                cell[PHI, I, j + G] += ft[a, i, j]
        for j in range(ny):
            J = j + G
            cell[DX, I, J] = dtpu_x[i, j]
            cell[DY, I, J] = dtpu_y[i, j]
            cell[UX, I, J] = ucx[i, j]
            cell[UY, I, J] = ucy[i, j]
    fill_halo(cell[PHI:PHI + 1], nx, ny)

    # isotropic gradient -> unit normal, plus Theta
    inv = 3.0 / h
    for i in range(G, nx + G):
        for j in range(G, ny + G):
            pe = cell[PHI, i + 1, j]
            pw = cell[PHI, i - 1, j]
            pn = cell[PHI, i, j + 1]
            ps = cell[PHI, i, j - 1]
            pne = cell[PHI, i + 1, j + 1]
            pnw = cell[PHI, i - 1, j + 1]
            psw = cell[PHI, i - 1, j - 1]
            pse = cell[PHI, i + 1, j - 1]
            gx = inv * ((pe - pw) * (1.0 / 9.0) + (pne - pnw - psw + pse) * (1.0 / 36.0))
            gy = inv * ((pn - ps) * (1.0 / 9.0) + (pne + pnw - psw - pse) * (1.0 / 36.0))
            mag = np.sqrt(gx * gx + gy * gy) + 1e-12
            cell[NX, i, j] = gx / mag
            cell[NY, i, j] = gy / mag
            ph = cell[PHI, i, j]
            cell[TH, i, j] = 2.0 * (1.0 - ph * ph) / W
    fill_halo(cell[NX:NY + 1], nx, ny)
    fill_halo(cell[DX:DY + 1], nx, ny)

    d = 2.0 * tau + dt
    ah, bh, ch = (2.0 * tau - s) / d, 3.0 * s / d, 3.0 * tau * s / d
    at, bt, ct = (2.0 * tau - dt) / d, 2.0 * dt / d, 2.0 * tau * dt / d
    for i in range(nx):
        I = i + G
        for a in range(9):
            for j in range(ny):
                J = j + G
                feq, F = feq_F(a, variant, c, cs2, cell[PHI, I, J], cell[TH, I, J],
                               cell[UX, I, J], cell[UY, I, J], cell[NX, I, J], cell[NY, I, J],
                               cell[DX, I, J], cell[DY, I, J])
                f = ft[a, i, j]
                fp[a, I, J] = ah * f + bh * feq + ch * F
                out[a, i, j] = at * f + bt * feq + ct * F
    fill_halo(fp, nx, ny)

    db = 2.0 * tau + s
    af, bf, cf = 2.0 * tau / db, s / db, tau * s / db
    lam = dt / h
    h2 = h * h
    s2 = 0.5 * s * s
    inv12 = 1.0 / (12.0 * h)
    inv2h2 = 1.0 / (2.0 * h2)
    invh2 = 1.0 / h2
    nyp = ny + 2 * G
    phb = rows[9]
    thb = rows[10]
    nbx = rows[11]
    nby = rows[12]
    dbx = rows[13]
    dby = rows[14]

    # ---- x-faces: face k between cells k-1 and k ----
    for k in range(nx):
        for a in range(9):
            face_row(kind, EX[a], fp[a], k, fvx[a, 0], eps, wp)
        for a in range(9):
            xx = c * EX[a]
            xy = c * EY[a]
            for j in range(ny):
                J = j + G
                v = fvx[a, 0, J]
                ddx = (fp[a, k + 1, J] - 15.0 * fp[a, k + 2, J] + 15.0 * fp[a, k + 3, J]
                       - fp[a, k + 4, J]) * inv12
                ddy = (8.0 * (fvx[a, 0, J + 1] - fvx[a, 0, J - 1]) - fvx[a, 0, J + 2]
                       + fvx[a, 0, J - 2]) * inv12
                v -= s * (xx * ddx + xy * ddy)
                if parabolic:
                    dxx = (fp[a, k + 4, J] - fp[a, k + 3, J] - fp[a, k + 2, J] + fp[a, k + 1, J]) * inv2h2
                    dyy = (fvx[a, 0, J + 1] - 2.0 * fvx[a, 0, J] + fvx[a, 0, J - 1]) * invh2
                    dxy = (fp[a, k + 3, J + 1] - fp[a, k + 3, J - 1] - fp[a, k + 2, J + 1]
                           + fp[a, k + 2, J - 1]) * inv2h2
                    v += s2 * (xx * xx * dxx + 2.0 * xx * xy * dxy + xy * xy * dyy)
                rows[a, j] = v
        for j in range(ny):
            phb[j] = 0.0
        for a in range(9):
            for j in range(ny):
                phb[j] += rows[a, j]
        kl = k + G - 1
        kr = k + G
        for j in range(ny):
            J = j + G
            thb[j] = 2.0 * (1.0 - phb[j] * phb[j]) / W
            nbx[j] = 0.5 * (cell[NX, kl, J] + cell[NX, kr, J])
            nby[j] = 0.5 * (cell[NY, kl, J] + cell[NY, kr, J])
            dbx[j] = 0.5 * (cell[DX, kl, J] + cell[DX, kr, J])
            dby[j] = 0.5 * (cell[DY, kl, J] + cell[DY, kr, J])
        L = k - 1 if k > 0 else nx - 1
        for a in range(1, 9):
            if EX[a] == 0.0:
                continue
            cx = lam * c * EX[a]
            for j in range(ny):
                feq, F = feq_F(a, variant, c, cs2, phb[j], thb[j], ufx_x[k, j], ufx_y[k, j],
                               nbx[j], nby[j], dbx[j], dby[j])
                flux = cx * (af * rows[a, j] + bf * feq + cf * F)
                out[a, L, j] -= flux
                out[a, k, j] += flux

    # ---- y-faces: face k between cells (i, k-1) and (i, k) ----
    # the y-derivative stencil reaches two rows into the halo
    for a in range(9):
        wind = EY[a]
        for ii in range(G - 2, nx + G + 2):
            face_line(kind, wind, fp[a, ii], fvy[a, ii], ny, eps, wp)
    for i in range(nx):
        I = i + G
        for a in range(9):
            xx = c * EX[a]
            xy = c * EY[a]
            for k in range(ny):
                v = fvy[a, I, k]
                ddy = (fp[a, I, k + 1] - 15.0 * fp[a, I, k + 2] + 15.0 * fp[a, I, k + 3]
                       - fp[a, I, k + 4]) * inv12
                ddx = (8.0 * (fvy[a, I + 1, k] - fvy[a, I - 1, k]) - fvy[a, I + 2, k]
                       + fvy[a, I - 2, k]) * inv12
                v -= s * (xx * ddx + xy * ddy)
                if parabolic:
                    dyy = (fp[a, I, k + 4] - fp[a, I, k + 3] - fp[a, I, k + 2] + fp[a, I, k + 1]) * inv2h2
                    dxx = (fvy[a, I + 1, k] - 2.0 * fvy[a, I, k] + fvy[a, I - 1, k]) * invh2
                    dxy = (fp[a, I + 1, k + 3] - fp[a, I - 1, k + 3] - fp[a, I + 1, k + 2]
                           + fp[a, I - 1, k + 2]) * inv2h2
                    v += s2 * (xx * xx * dxx + 2.0 * xx * xy * dxy + xy * xy * dyy)
                rows[a, k] = v
        for k in range(ny):
            phb[k] = 0.0
        for a in range(9):
            for k in range(ny):
                phb[k] += rows[a, k]
        for k in range(ny):
            K = k + G
            thb[k] = 2.0 * (1.0 - phb[k] * phb[k]) / W
            nbx[k] = 0.5 * (cell[NX, I, K - 1] + cell[NX, I, K])
            nby[k] = 0.5 * (cell[NY, I, K - 1] + cell[NY, I, K])
            dbx[k] = 0.5 * (cell[DX, I, K - 1] + cell[DX, I, K])
            dby[k] = 0.5 * (cell[DY, I, K - 1] + cell[DY, I, K])
        for a in range(1, 9):
            if EY[a] == 0.0:
                continue
            cy = lam * c * EY[a]
            for k in range(ny):
                feq, F = feq_F(a, variant, c, cs2, phb[k], thb[k], ufy_x[i, k], ufy_y[i, k],
                               nbx[k], nby[k], dbx[k], dby[k])
                rows[a, k] = cy * (af * rows[a, k] + bf * feq + cf * F)
            # rows[a] now holds the flux through face k
            out[a, i, 0] += rows[a, 0]
            out[a, i, ny - 1] -= rows[a, 0]
            for k in range(1, ny):
                out[a, i, k - 1] -= rows[a, k]
                out[a, i, k] += rows[a, k]

    acc = rows[9]
    for j in range(ny):
        acc[j] = 0.0
    for a in range(9):
        for i in range(nx):
            for j in range(ny):
                acc[j] += out[a, i, j]
    total = 0.0
    for j in range(ny):
        total += acc[j]
    return total


def workspace(nx, ny):
    n = max(nx, ny) + 2 * G
    return (
        np.zeros((9, nx + 2 * G, ny + 2 * G)),  # fp: f-hat-plus with halo
        np.zeros((9, 1, ny + 2 * G)),  # fvx: one column of x-face values
        np.zeros((9, nx + 2 * G, ny)),  # fvy: y-face values on halo rows
        np.zeros((8, nx + 2 * G, ny + 2 * G)),  # cell scalars, see slot names
        np.zeros((15, n)),  # per-face-line scratch
    )
