"""Euler-Maruyama trajectory kernels.

Each kernel integrates ``n_traj`` independent trajectories and returns,
per trajectory, the time average of a fixed list of observables over the
post-burn-in window, the final state, and escape bookkeeping.  Random
numbers come from the trajectory's own Philox substream, so the outputs do
not depend on the number of threads.

Quadrature observables (shared layout, see ``QUAD_OBS``):
x1, y1, x2, y2, x1^2, y1^2, x2^2, y2^2, x1x2, y1y2, x1y1, x2y2, x1y2, y1x2
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .rng import STREAM_DYN, STREAM_INIT, fill_normals, new_stream

BUF_STEPS = 512

QUAD_OBS = ("x1", "y1", "x2", "y2", "x1x1", "y1y1", "x2x2", "y2y2",
            "x1x2", "y1y2", "x1y1", "x2y2", "x1y2", "y1x2")
THREE_MODE_OBS = QUAD_OBS + ("re_a0", "im_a0", "re_a1a2", "im_a1a2", "abs2_a0")
POSITIVE_P_OBS = QUAD_OBS + ("re_a0", "im_a0", "re_a1a2", "im_a1a2")
NQ = len(QUAD_OBS)


@nb.njit(cache=True, inline="always")
def _accumulate_quad(acc, x1, y1, x2, y2):
    acc[0] += x1
    acc[1] += y1
    acc[2] += x2
    acc[3] += y2
    acc[4] += x1 * x1
    acc[5] += y1 * y1
    acc[6] += x2 * x2
    acc[7] += y2 * y2
    acc[8] += x1 * x2
    acc[9] += y1 * y2
    acc[10] += x1 * y1
    acc[11] += x2 * y2
    acc[12] += x1 * y2
    acc[13] += y1 * x2


@nb.njit(cache=True, parallel=True)
def two_mode_kernel(n_traj, n_steps, burn_steps, dt, gamma, mu, g2, mult, noise,
                    seed_lo, seed_hi, bound2):
    """Adiabatically eliminated quadrature SDEs with 4x6 noise matrix."""
    n_obs = NQ
    avg = np.zeros((n_traj, n_obs))
    final = np.zeros((n_traj, 4))
    esc_step = np.full(n_traj, -1, dtype=np.int64)
    h = 0.5 * g2
    c = math.sqrt(0.5 * g2) * mult
    sq = math.sqrt(2.0 * gamma * dt) * noise
    n_samp = n_steps - burn_steps
    for i in nb.prange(n_traj):
        z0 = np.empty(4)
        fill_normals(new_stream(seed_lo, seed_hi, i, STREAM_INIT), z0)
        x1, y1, x2, y2 = z0[0], z0[1], z0[2], z0[3]
        st = new_stream(seed_lo, seed_hi, i, STREAM_DYN)
        buf = np.empty(6 * BUF_STEPS)
        k = buf.shape[0]
        acc = np.zeros(n_obs)
        for n in range(n_steps):
            if k == buf.shape[0]:
                fill_normals(st, buf)
                k = 0
            e0 = buf[k]
            e1 = buf[k + 1]
            e2 = buf[k + 2]
            e3 = buf[k + 3]
            e4 = buf[k + 4] * c
            e5 = buf[k + 5] * c
            k += 6
            r1 = x1 * x1 + y1 * y1
            r2 = x2 * x2 + y2 * y2
            d1 = gamma * (-x1 + mu * x2 - h * x1 * r2)
            d2 = gamma * (-y1 - mu * y2 - h * y1 * r2)
            d3 = gamma * (-x2 + mu * x1 - h * x2 * r1)
            d4 = gamma * (-y2 - mu * y1 - h * y2 * r1)
            n1 = e0 + x2 * e4 + y2 * e5
            n2 = e1 - y2 * e4 + x2 * e5
            n3 = e2 + x1 * e4 + y1 * e5
            n4 = e3 - y1 * e4 + x1 * e5
            x1 += d1 * dt + sq * n1
            y1 += d2 * dt + sq * n2
            x2 += d3 * dt + sq * n3
            y2 += d4 * dt + sq * n4
            if (x1 * x1 + y1 * y1 > bound2) or (x2 * x2 + y2 * y2 > bound2) or not (
                    math.isfinite(x1) and math.isfinite(y1) and math.isfinite(x2)
                    and math.isfinite(y2)):
                esc_step[i] = n
                break
            if n >= burn_steps:
                _accumulate_quad(acc, x1, y1, x2, y2)
        for k in range(n_obs):
            avg[i, k] = acc[k] / n_samp
        final[i, 0] = x1
        final[i, 1] = y1
        final[i, 2] = x2
        final[i, 3] = y2
    return avg, final, esc_step


@nb.njit(cache=True, parallel=True)
def three_mode_kernel(n_traj, n_steps, burn_steps, dt, gamma, gamma0, chi, E, noise,
                      seed_lo, seed_hi, bound2):
    """Truncated-Wigner SDEs for pump, signal and idler amplitudes."""
    n_obs = NQ + 5
    avg = np.zeros((n_traj, n_obs))
    final = np.zeros((n_traj, 6))
    esc_step = np.full(n_traj, -1, dtype=np.int64)
    s0 = math.sqrt(0.5 * gamma0 * dt) * noise
    s1 = math.sqrt(0.5 * gamma * dt) * noise
    vac = math.sqrt(0.25)
    n_samp = n_steps - burn_steps
    for i in nb.prange(n_traj):
        z0 = np.empty(6)
        fill_normals(new_stream(seed_lo, seed_hi, i, STREAM_INIT), z0)
        # Wigner vacuum: <|delta alpha|^2> = 1/2
        p = complex(E / gamma0 + vac * z0[0], vac * z0[1])
        a = complex(vac * z0[2], vac * z0[3])
        b = complex(vac * z0[4], vac * z0[5])
        st = new_stream(seed_lo, seed_hi, i, STREAM_DYN)
        buf = np.empty(6 * BUF_STEPS)
        k = buf.shape[0]
        acc = np.zeros(n_obs)
        for n in range(n_steps):
            if k == buf.shape[0]:
                fill_normals(st, buf)
                k = 0
            e0 = buf[k]
            e1 = buf[k + 1]
            e2 = buf[k + 2]
            e3 = buf[k + 3]
            e4 = buf[k + 4]
            e5 = buf[k + 5]
            k += 6
            dp = (-gamma0 * p + E - chi * a * b) * dt + s0 * complex(e0, e1)
            da = (-gamma * a + chi * p * b.conjugate()) * dt + s1 * complex(e2, e3)
            db = (-gamma * b + chi * p * a.conjugate()) * dt + s1 * complex(e4, e5)
            p += dp
            a += da
            b += db
            if (abs(a) ** 2 > bound2 or abs(b) ** 2 > bound2 or abs(p) ** 2 > bound2
                    or not (math.isfinite(a.real) and math.isfinite(a.imag)
                            and math.isfinite(b.real) and math.isfinite(b.imag)
                            and math.isfinite(p.real) and math.isfinite(p.imag))):
                esc_step[i] = n
                break
            if n >= burn_steps:
                _accumulate_quad(acc, 2.0 * a.real, 2.0 * a.imag, 2.0 * b.real, 2.0 * b.imag)
                ab = a * b
                acc[NQ] += p.real
                acc[NQ + 1] += p.imag
                acc[NQ + 2] += ab.real
                acc[NQ + 3] += ab.imag
                acc[NQ + 4] += p.real * p.real + p.imag * p.imag
        for k in range(n_obs):
            avg[i, k] = acc[k] / n_samp
        final[i, 0] = p.real
        final[i, 1] = p.imag
        final[i, 2] = a.real
        final[i, 3] = a.imag
        final[i, 4] = b.real
        final[i, 5] = b.imag
    return avg, final, esc_step


@nb.njit(cache=True, parallel=True)
def positive_p_kernel(n_traj, n_steps, burn_steps, dt, gamma, gamma0, chi, E, noise,
                      seed_lo, seed_hi, bound2):
    """Positive-P SDEs: deterministic pump, cross-diffusion chi*alpha0 for the pair.

    Observables are real parts of normally ordered moments built from the
    c-number quadratures x = alpha + beta, y = -i (alpha - beta).
    """
    n_obs = NQ + 4
    avg = np.zeros((n_traj, n_obs))
    final = np.zeros((n_traj, 12))
    esc_step = np.full(n_traj, -1, dtype=np.int64)
    sdt = math.sqrt(0.5 * dt) * noise
    n_samp = n_steps - burn_steps
    for i in nb.prange(n_traj):
        p = complex(E / gamma0, 0.0)
        q = complex(E / gamma0, 0.0)
        a1 = 0j
        b1 = 0j
        a2 = 0j
        b2 = 0j
        st = new_stream(seed_lo, seed_hi, i, STREAM_DYN)
        buf = np.empty(4 * BUF_STEPS)
        k = buf.shape[0]
        acc = np.zeros(n_obs)
        for n in range(n_steps):
            if k == buf.shape[0]:
                fill_normals(st, buf)
                k = 0
            w1 = buf[k]
            w2 = buf[k + 1]
            w3 = buf[k + 2]
            w4 = buf[k + 3]
            k += 4
            sa = np.sqrt(chi * p) * sdt
            sb = np.sqrt(chi * q) * sdt
            na = complex(w1, w2)
            nbb = complex(w3, w4)
            dp = (E - gamma0 * p - chi * a1 * a2) * dt
            dq = (E - gamma0 * q - chi * b1 * b2) * dt
            da1 = (-gamma * a1 + chi * p * b2) * dt + sa * na
            da2 = (-gamma * a2 + chi * p * b1) * dt + sa * na.conjugate()
            db1 = (-gamma * b1 + chi * q * a2) * dt + sb * nbb
            db2 = (-gamma * b2 + chi * q * a1) * dt + sb * nbb.conjugate()
            p += dp
            q += dq
            a1 += da1
            a2 += da2
            b1 += db1
            b2 += db2
            big = max(abs(a1), abs(a2), abs(b1), abs(b2), abs(p), abs(q))
            if big * big > bound2 or not math.isfinite(big):
                esc_step[i] = n
                break
            if n >= burn_steps:
                X1 = a1 + b1
                Y1 = -1j * (a1 - b1)
                X2 = a2 + b2
                Y2 = -1j * (a2 - b2)
                acc[0] += X1.real
                acc[1] += Y1.real
                acc[2] += X2.real
                acc[3] += Y2.real
                acc[4] += (X1 * X1).real
                acc[5] += (Y1 * Y1).real
                acc[6] += (X2 * X2).real
                acc[7] += (Y2 * Y2).real
                acc[8] += (X1 * X2).real
                acc[9] += (Y1 * Y2).real
                acc[10] += (X1 * Y1).real
                acc[11] += (X2 * Y2).real
                acc[12] += (X1 * Y2).real
                acc[13] += (Y1 * X2).real
                # pump and pair amplitudes: physical means of alpha0 and a1 a2
                acc[NQ] += 0.5 * (p.real + q.real)
                acc[NQ + 1] += 0.5 * (p.imag - q.imag)
                acc[NQ + 2] += (a1 * a2).real
                acc[NQ + 3] += (a1 * a2).imag
        for k in range(n_obs):
            avg[i, k] = acc[k] / n_samp
        final[i, 0] = p.real
        final[i, 1] = p.imag
        final[i, 2] = q.real
        final[i, 3] = q.imag
        final[i, 4] = a1.real
        final[i, 5] = a1.imag
        final[i, 6] = b1.real
        final[i, 7] = b1.imag
        final[i, 8] = a2.real
        final[i, 9] = a2.imag
        final[i, 10] = b2.real
        final[i, 11] = b2.imag
    return avg, final, esc_step
