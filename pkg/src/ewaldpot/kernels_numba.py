"""Loop kernels for the summation hot paths, compiled with numba.

Every kernel is a straight deterministic loop (shift shells outermost,
then grid order) so repeated runs are bit-identical.  The same source runs
uncompiled when numba is unavailable; the vectorized twin of this module
is kernels_numpy.
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import njit
from .specfun import (
    EULER_GAMMA,
    SQRT_PI,
    _e1_scalar,
    _g_scalar,
    _k0inc_scalar,
)


@njit(cache=True)
def real_space(pos, q, targets, src_index, images, xi, r_cut):
    """Screened pair sum  sum_p sum_n q_n erfc(xi d)/d  per target.

    images[0] must be the zero shift; the (n = src_index[m], p = 0) term
    is skipped.  Pairs with d > r_cut are dropped; an exact zero distance
    in any non-skipped term means overlapping charges and is an error.
    """
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    n_img = images.shape[0]
    out = np.zeros(n_tar)
    for m in range(n_tar):
        acc = 0.0
        for ip in range(n_img):
            px = images[ip, 0]
            py = images[ip, 1]
            pz = images[ip, 2]
            primary = px == 0.0 and py == 0.0 and pz == 0.0
            for n in range(n_src):
                if primary and n == src_index[m]:
                    continue
                dx = targets[m, 0] - pos[n, 0] + px
                dy = targets[m, 1] - pos[n, 1] + py
                dz = targets[m, 2] - pos[n, 2] + pz
                d2 = dx * dx + dy * dy + dz * dz
                if d2 == 0.0:
                    raise ValueError(
                        "zero distance between a target and a periodic image")
                d = math.sqrt(d2)
                if d > r_cut:
                    continue
                acc += q[n] * math.erfc(xi * d) / d
        out[m] = acc
    return out


@njit(cache=True)
def kspace_3p(pos, q, targets, xi, kvecs, volume):
    """Fully periodic k-space sum (4pi/V) sum_k e^{-k^2/4xi^2}/k^2 S_k(x).

    Returns (real, imag) accumulations; the imaginary part is a residue
    check that vanishes on negation-closed grids.
    """
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    n_k = kvecs.shape[0]
    re = np.zeros(n_tar)
    im = np.zeros(n_tar)
    quart = 0.25 / (xi * xi)
    pref = 4.0 * math.pi / volume
    for ik in range(n_k):
        kx = kvecs[ik, 0]
        ky = kvecs[ik, 1]
        kz = kvecs[ik, 2]
        k2 = kx * kx + ky * ky + kz * kz
        w = pref * math.exp(-k2 * quart) / k2
        cs = 0.0
        sn = 0.0
        for n in range(n_src):
            ph = kx * pos[n, 0] + ky * pos[n, 1] + kz * pos[n, 2]
            cs += q[n] * math.cos(ph)
            sn += q[n] * math.sin(ph)
        for m in range(n_tar):
            ph = kx * targets[m, 0] + ky * targets[m, 1] + kz * targets[m, 2]
            c = math.cos(ph)
            s = math.sin(ph)
            re[m] += w * (cs * c + sn * s)
            im[m] += w * (sn * c - cs * s)
    return re, im


@njit(cache=True)
def kspace_2p(pos, q, targets, xi, kvecs, area):
    """Planar k-space sum (pi/L1L2) sum_kbar (1/kbar) g(kbar, z-z_n, xi) terms."""
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    n_k = kvecs.shape[0]
    re = np.zeros(n_tar)
    im = np.zeros(n_tar)
    pref = math.pi / area
    for ik in range(n_k):
        kx = kvecs[ik, 0]
        ky = kvecs[ik, 1]
        kb = math.sqrt(kx * kx + ky * ky)
        w = pref / kb
        for m in range(n_tar):
            accr = 0.0
            acci = 0.0
            for n in range(n_src):
                dx = targets[m, 0] - pos[n, 0]
                dy = targets[m, 1] - pos[n, 1]
                dz = targets[m, 2] - pos[n, 2]
                g = _g_scalar(kb, dz, xi)
                ph = kx * dx + ky * dy
                accr += q[n] * g * math.cos(ph)
                acci -= q[n] * g * math.sin(ph)
            re[m] += w * accr
            im[m] += w * acci
    return re, im


@njit(cache=True)
def kspace_1p(pos, q, targets, xi, kz, length, abs_tol, rel_tol, max_sub):
    """Axial k-space sum (1/L3) sum_{k3!=0} K0(k3^2/4xi^2, rho_n^2 xi^2) terms.

    +k3 and -k3 share the same K0 value, so each positive k3 is evaluated
    once with a 2 cos(k3 dz) factor; the imaginary parts of such a pair
    cancel exactly, so the imag residue is structurally zero.
    """
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    n_k = kz.shape[0]
    re = np.zeros(n_tar)
    quart = 0.25 / (xi * xi)
    xi2 = xi * xi
    for ik in range(n_k):
        k3 = kz[ik]
        if k3 <= 0.0:
            continue
        u = k3 * k3 * quart
        for m in range(n_tar):
            acc = 0.0
            for n in range(n_src):
                dx = targets[m, 0] - pos[n, 0]
                dy = targets[m, 1] - pos[n, 1]
                rho2 = dx * dx + dy * dy
                val = _k0inc_scalar(u, rho2 * xi2, abs_tol, rel_tol, max_sub)
                dz = targets[m, 2] - pos[n, 2]
                acc += q[n] * 2.0 * math.cos(k3 * dz) * val
            re[m] += acc
    return re / length, np.zeros(n_tar)


@njit(cache=True)
def zero_mode_2p(zpos, q, ztar, xi, area):
    """Planar zero mode -(2 sqrt(pi)/L1L2) sum_n q_n [e^{-xi^2 dz^2}/xi + sqrt(pi) dz erf(xi dz)]."""
    n_tar = ztar.shape[0]
    n_src = zpos.shape[0]
    out = np.empty(n_tar)
    pref = -2.0 * SQRT_PI / area
    for m in range(n_tar):
        acc = 0.0
        for n in range(n_src):
            dz = ztar[m] - zpos[n]
            w = xi * dz
            acc += q[n] * (math.exp(-w * w) / xi
                           + SQRT_PI * dz * math.erf(w))
        out[m] = pref * acc
    return out


@njit(cache=True)
def _log_e1_bracket(x):
    # -gamma - log(x) - E1(x): tends to 0 as x -> 0+, and for x < 1 equals
    # the alternating series sum_k (-x)^k/(k k!) with no log cancellation.
    if x == 0.0:
        return 0.0
    if x < 1.0:
        s = 0.0
        term = 1.0
        k = 0.0
        while True:
            k += 1.0
            term *= -x / k
            d = term / k
            s += d
            if abs(d) < 1e-18:
                break
        return s
    return -EULER_GAMMA - math.log(x) - _e1_scalar(x)


@njit(cache=True)
def zero_mode_1p_sources(pos, q, targets, src_index, xi, length, variant):
    """Axial zero mode at source locations.

    (1/L3) sum_{n != m} q_n [-gamma - log(rho^2 xi^2) - E1(rho^2 xi^2)];
    the bracket vanishes as rho -> 0, which is why the n = m term drops.
    variant 1 flips the E1 sign, variant 2 flips the gamma sign (test-only
    switches for demonstrating that the standard resolution is forced).
    """
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    xi2 = xi * xi
    out = np.empty(n_tar)
    for m in range(n_tar):
        acc = 0.0
        for n in range(n_src):
            if n == src_index[m]:
                continue
            dx = targets[m, 0] - pos[n, 0]
            dy = targets[m, 1] - pos[n, 1]
            x = (dx * dx + dy * dy) * xi2
            if variant == 0:
                br = _log_e1_bracket(x)
            elif x == 0.0:
                br = 0.0
            elif variant == 1:
                br = -EULER_GAMMA - math.log(x) + _e1_scalar(x)
            else:
                br = EULER_GAMMA - math.log(x) - _e1_scalar(x)
            acc += q[n] * br
        out[m] = acc / length
    return out


@njit(cache=True)
def zero_mode_1p_points(pos, q, targets, xi, length):
    """Axial zero mode off the sources: -(1/L3) sum_n q_n [log(rho_n^2) + E1(rho_n^2 xi^2)].

    Callers must reject targets with rho_n = 0 (per-term log divergence).
    """
    n_tar = targets.shape[0]
    n_src = pos.shape[0]
    xi2 = xi * xi
    out = np.empty(n_tar)
    for m in range(n_tar):
        acc = 0.0
        for n in range(n_src):
            dx = targets[m, 0] - pos[n, 0]
            dy = targets[m, 1] - pos[n, 1]
            rho2 = dx * dx + dy * dy
            acc += q[n] * (math.log(rho2) + _e1_scalar(rho2 * xi2))
        out[m] = -acc / length
    return out
