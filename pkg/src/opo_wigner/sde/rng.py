"""Counter-based Philox4x32-10 streams and a ziggurat normal sampler for numba.

A Philox block is a pure function of (key, counter).  Each trajectory
builds its own stream from (seed, trajectory index, stream tag), so the
numbers it sees do not depend on how trajectories are scheduled across
threads.  A stream is a small uint64 array holding the key, counter words,
a block counter and a four-word output buffer.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

STREAM_INIT = 1
STREAM_DYN = 2

# stream layout
_K0, _K1, _C2, _C3, _CTR, _POS, _BUF = 0, 1, 2, 3, 4, 5, 6
STREAM_LEN = 10


@nb.njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds; all arguments are uint64 holding 32-bit words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0 = (hi1 ^ c1 ^ k0) & _MASK
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & _MASK
        c3 = lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@nb.njit(cache=True)
def new_stream(seed_lo, seed_hi, traj, tag):
    st = np.zeros(STREAM_LEN, dtype=np.uint64)
    st[_K0] = seed_lo
    st[_K1] = seed_hi
    t = np.uint64(traj)
    st[_C2] = t & _MASK
    st[_C3] = ((t >> _S32) ^ (np.uint64(tag) << np.uint64(24))) & _MASK
    st[_POS] = 4
    return st


@nb.njit(cache=True, inline="always")
def next_word(st):
    pos = st[_POS]
    if pos >= 4:
        ctr = st[_CTR]
        r0, r1, r2, r3 = philox4x32(ctr & _MASK, ctr >> _S32, st[_C2], st[_C3],
                                    st[_K0], st[_K1])
        st[_BUF] = r0
        st[_BUF + 1] = r1
        st[_BUF + 2] = r2
        st[_BUF + 3] = r3
        st[_CTR] = ctr + np.uint64(1)
        pos = np.uint64(0)
    st[_POS] = pos + np.uint64(1)
    return st[_BUF + pos]


@nb.njit(cache=True, inline="always")
def uniform(st):
    """Uniform on the open interval (0, 1) with 32-bit resolution."""
    return (np.float64(np.int64(next_word(st))) + 0.5) * 2.3283064365386963e-10


def _ziggurat_tables():
    # Marsaglia & Tsang (2000), 128 layers
    m1 = 2147483648.0
    dn = 3.442619855899
    tn = dn
    vn = 9.91256303526217e-3
    kn = np.zeros(128)
    wn = np.zeros(128)
    fn = np.zeros(128)
    q = vn / math.exp(-0.5 * dn * dn)
    kn[0] = (dn / q) * m1
    kn[1] = 0.0
    wn[0] = q / m1
    wn[127] = dn / m1
    fn[0] = 1.0
    fn[127] = math.exp(-0.5 * dn * dn)
    for i in range(126, 0, -1):
        dn = math.sqrt(-2.0 * math.log(vn / dn + math.exp(-0.5 * dn * dn)))
        kn[i + 1] = (dn / tn) * m1
        tn = dn
        fn[i] = math.exp(-0.5 * dn * dn)
        wn[i] = dn / m1
    return kn, wn, fn


_KN, _WN, _FN = _ziggurat_tables()
_ZIG_R = 3.442619855899


@nb.njit(cache=True, inline="always")
def _signed(word):
    w = np.int64(word)
    return w - 4294967296 if w >= 2147483648 else w


@nb.njit(cache=True, inline="always")
def normal(st):
    """Standard normal; value and layer index come from separate words."""
    while True:
        hz = _signed(next_word(st))
        iz = np.int64(next_word(st)) & 127
        x = hz * _WN[iz]
        if abs(hz) < _KN[iz]:
            return x
        if iz == 0:
            # base layer: sample the tail beyond R
            while True:
                xx = -math.log(uniform(st)) / _ZIG_R
                yy = -math.log(uniform(st))
                if yy + yy >= xx * xx:
                    break
            return _ZIG_R + xx if hz > 0 else -_ZIG_R - xx
        if _FN[iz] + uniform(st) * (_FN[iz - 1] - _FN[iz]) < math.exp(-0.5 * x * x):
            return x


@nb.njit(cache=True)
def fill_normals(st, buf):
    """Overwrite ``buf`` with the next ``len(buf)`` normals of the stream.

    Kernels draw from a per-trajectory buffer refilled here, which keeps a
    single inlined copy of the sampler and so keeps compile times short.
    """
    for i in range(buf.shape[0]):
        buf[i] = normal(st)


def split_seed(seed: int) -> tuple[np.uint64, np.uint64]:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.uint64(seed & 0xFFFFFFFF), np.uint64(seed >> 32)


@nb.njit(cache=True)
def _philox_block(c0, c1, c2, c3, k0, k1):
    r = philox4x32(np.uint64(c0), np.uint64(c1), np.uint64(c2), np.uint64(c3),
                   np.uint64(k0), np.uint64(k1))
    return np.array([r[0], r[1], r[2], r[3]], dtype=np.uint64)


def philox(counter, key) -> tuple[int, int, int, int]:
    """Python entry point for known-answer testing."""
    c = [int(v) & 0xFFFFFFFF for v in counter]
    k = [int(v) & 0xFFFFFFFF for v in key]
    out = _philox_block(c[0], c[1], c[2], c[3], k[0], k[1])
    return tuple(int(v) for v in out)


@nb.njit(cache=True)
def _normal_block(seed_lo, seed_hi, traj, tag, n):
    st = new_stream(seed_lo, seed_hi, traj, tag)
    out = np.empty(n)
    fill_normals(st, out)
    return out


def normal_stream(seed: int, traj: int, n: int, tag: int = STREAM_DYN) -> np.ndarray:
    """First ``n`` normals of trajectory ``traj`` (for inspection and tests)."""
    lo, hi = split_seed(seed)
    return _normal_block(lo, hi, np.int64(traj), np.int64(tag), np.int64(n))
