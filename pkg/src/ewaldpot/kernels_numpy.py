"""Vectorized numpy/scipy twins of the kernels in kernels_numba.

Same signatures and same mathematics; summation uses numpy reductions, so
results agree with the loop kernels to rounding (~1e-15 relative), not bit
for bit.  Selected via the EWALDPOT_BACKEND environment variable or
backends.use_backend.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from .specfun import EULER_GAMMA, SQRT_PI, _k0inc_scalar


def real_space(pos, q, targets, src_index, images, xi, r_cut):
    n_tar = targets.shape[0]
    out = np.zeros(n_tar)
    delta = targets[:, None, :] - pos[None, :, :]  # (M, N, 3)
    sel = src_index >= 0
    rows = np.nonzero(sel)[0]
    cols = src_index[sel]
    for pvec in images:
        d = np.sqrt(((delta + pvec) ** 2).sum(axis=-1))
        excluded = np.zeros(d.shape, dtype=bool)
        if not pvec.any():
            excluded[rows, cols] = True
        if np.any((d == 0.0) & ~excluded):
            raise ValueError(
                "zero distance between a target and a periodic image")
        keep = (d <= r_cut) & ~excluded
        safe = np.where(keep, d, 1.0)
        out += np.where(keep, sp.erfc(xi * safe) * q[None, :] / safe,
                        0.0).sum(axis=1)
    return out


def kspace_3p(pos, q, targets, xi, kvecs, volume):
    n_tar = targets.shape[0]
    if len(kvecs) == 0:
        return np.zeros(n_tar), np.zeros(n_tar)
    k2 = (kvecs ** 2).sum(axis=1)
    w = (4.0 * math.pi / volume) * np.exp(-0.25 * k2 / xi ** 2) / k2
    phase_src = pos @ kvecs.T          # (N, K)
    cs = q @ np.cos(phase_src)         # (K,)
    sn = q @ np.sin(phase_src)
    phase_tar = targets @ kvecs.T      # (M, K)
    c = np.cos(phase_tar)
    s = np.sin(phase_tar)
    re = (w * (c * cs + s * sn)).sum(axis=1)
    im = (w * (c * sn - s * cs)).sum(axis=1)
    return re, im


def _g_array(kbar, dz, xi):
    # screened kernel g for one kbar over an array of z separations,
    # same two-branch overflow-safe evaluation as the scalar version
    h = 0.5 * kbar / xi
    w = xi * dz
    c = h * h + w * w
    kz = kbar * dz
    out = np.zeros(dz.shape)
    for arg, ekz in ((h + w, kz), (h - w, -kz)):
        neg = arg < 0.0
        out += np.where(neg, 0.0, sp.erfcx(np.abs(arg)) * np.exp(-c))
        if neg.any():
            out += np.where(neg, np.exp(np.where(neg, ekz, 0.0))
                            * sp.erfc(arg), 0.0)
    return out


def kspace_2p(pos, q, targets, xi, kvecs, area):
    n_tar = targets.shape[0]
    if len(kvecs) == 0:
        return np.zeros(n_tar), np.zeros(n_tar)
    re = np.zeros(n_tar)
    im = np.zeros(n_tar)
    dxy = targets[:, None, :2] - pos[None, :, :2]   # (M, N, 2)
    dz = targets[:, None, 2] - pos[None, :, 2]      # (M, N)
    pref = math.pi / area
    for kvec in kvecs:
        kb = math.hypot(kvec[0], kvec[1])
        g = _g_array(kb, dz, xi)
        ph = dxy[:, :, 0] * kvec[0] + dxy[:, :, 1] * kvec[1]
        re += (pref / kb) * (q[None, :] * g * np.cos(ph)).sum(axis=1)
        im -= (pref / kb) * (q[None, :] * g * np.sin(ph)).sum(axis=1)
    return re, im


def kspace_1p(pos, q, targets, xi, kz, length, abs_tol, rel_tol, max_sub):
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    re = np.zeros(n_tar)
    rho2 = ((targets[:, None, :2] - pos[None, :, :2]) ** 2).sum(axis=-1)
    dz = targets[:, None, 2] - pos[None, :, 2]
    xi2 = xi * xi
    for k3 in kz:
        if k3 <= 0.0:
            continue
        u = 0.25 * k3 * k3 / xi2
        table = np.empty((n_tar, n_src))
        for m in range(n_tar):
            for n in range(n_src):
                table[m, n] = _k0inc_scalar(u, rho2[m, n] * xi2,
                                            abs_tol, rel_tol, max_sub)
        re += (q[None, :] * 2.0 * np.cos(k3 * dz) * table).sum(axis=1)
    return re / length, np.zeros(n_tar)


def zero_mode_2p(zpos, q, ztar, xi, area):
    dz = ztar[:, None] - zpos[None, :]
    w = xi * dz
    terms = np.exp(-w * w) / xi + SQRT_PI * dz * sp.erf(w)
    return (-2.0 * SQRT_PI / area) * (q[None, :] * terms).sum(axis=1)


def _log_e1_bracket_array(x):
    # -gamma - log(x) - E1(x), continued to 0 at x = 0; series below 1e-3
    # where the log cancellation would otherwise cost accuracy
    small = x < 1e-3
    xs = np.where(small, x, 1.0)
    series = -xs + 0.25 * xs ** 2 - xs ** 3 / 18.0
    xl = np.where(small | (x == 0.0), 1.0, x)
    direct = -EULER_GAMMA - np.log(xl) - sp.exp1(xl)
    return np.where(x == 0.0, 0.0, np.where(small, series, direct))


def zero_mode_1p_sources(pos, q, targets, src_index, xi, length, variant):
    n_tar = targets.shape[0]
    dxy = targets[:, None, :2] - pos[None, :, :2]
    x = (dxy ** 2).sum(axis=-1) * xi * xi
    if variant == 0:
        br = _log_e1_bracket_array(x)
    else:
        xl = np.where(x == 0.0, 1.0, x)
        if variant == 1:
            br = -EULER_GAMMA - np.log(xl) + sp.exp1(xl)
        else:
            br = EULER_GAMMA - np.log(xl) - sp.exp1(xl)
        br = np.where(x == 0.0, 0.0, br)
    sel = src_index >= 0
    br[np.nonzero(sel)[0], src_index[sel]] = 0.0
    return (q[None, :] * br).sum(axis=1) / length


def zero_mode_1p_points(pos, q, targets, xi, length):
    rho2 = ((targets[:, None, :2] - pos[None, :, :2]) ** 2).sum(axis=-1)
    terms = np.log(rho2) + sp.exp1(rho2 * xi * xi)
    return -(q[None, :] * terms).sum(axis=1) / length
