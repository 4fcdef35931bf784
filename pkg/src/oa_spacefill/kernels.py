"""Hot kernels, each in two flavours.

``*_jit`` are numba loops, ``*_np`` are vectorised numpy. The public names at
the bottom pick one according to ``_jit.USE_JIT``. Both flavours draw from
the same counter-based generator (a splitmix64 finaliser applied to a hashed
substream key plus a counter), so their outputs are bit-identical.
"""
import numpy as np

from ._jit import USE_JIT, njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S26 = np.uint64(26)
_MASK26 = np.uint64((1 << 26) - 1)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

# substream families
ROWS = 1
LEVELS = 2
JITTER = 3
SHIFT = 4
IID = 5
PERM = 6

_MAX_NUDGE = 64


# -- generator primitives (work on uint64 scalars under numba, arrays under numpy)

def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _combine(h, v):
    return _mix64(h ^ _mix64(v + GOLDEN))


def _key(seed, stream, family, a, b):
    h = _combine(_mix64(seed), stream)
    h = _combine(h, family)
    h = _combine(h, a)
    return _combine(h, b)


def _draw(key, counter):
    return _mix64(key + (counter + _ONE) * GOLDEN)


def _bounded(u, bound):
    # floor(m * bound / 2**53) for the top 53 bits m of u, exact for bound < 2**37
    m = u >> _S11
    t = (m & _MASK26) * bound
    s = (m >> _S26) * bound + (t >> _S26)
    return s >> _S27


mix64_jit = njit(_mix64)
bounded_jit = njit(_bounded)


@njit
def combine_jit(h, v):
    return mix64_jit(h ^ mix64_jit(v + GOLDEN))


@njit
def key_jit(seed, stream, family, a, b):
    h = combine_jit(mix64_jit(seed), stream)
    h = combine_jit(h, family)
    h = combine_jit(h, a)
    return combine_jit(h, b)


@njit
def draw_jit(key, counter):
    return mix64_jit(key + (counter + _ONE) * GOLDEN)


@njit
def unit_jit(u):
    return float(u >> _S11) * _INV53


def _u64(x):
    return np.asarray(x, dtype=np.uint64)


def key_np(seed, stream, family, a=0, b=0):
    with np.errstate(over="ignore"):
        return _key(_u64(seed), _u64(stream), _u64(family), _u64(a), _u64(b))


def draw_np(key, counter):
    with np.errstate(over="ignore"):
        return _draw(_u64(key), _u64(counter))


def unit_np(u):
    return (_u64(u) >> _S11).astype(np.float64) * _INV53


def bounded_np(u, bound):
    with np.errstate(over="ignore"):
        return _bounded(_u64(u), _u64(bound)).astype(np.int64)


# -- Fisher-Yates ----------------------------------------------------------

@njit
def _shuffle_jit(key, a, out):
    for i in range(a):
        out[i] = i
    step = np.uint64(0)
    for i in range(a - 1, 0, -1):
        j = np.int64(bounded_jit(draw_jit(key, step), np.uint64(i + 1)))
        step += _ONE
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp


@njit(parallel=True)
def permutations_jit(keys, a):
    m = keys.shape[0]
    out = np.empty((m, a), dtype=np.int64)
    for r in prange(m):
        _shuffle_jit(keys[r], a, out[r])
    return out


def permutations_np(keys, a):
    keys = _u64(keys).reshape(-1)
    m = keys.shape[0]
    out = np.tile(np.arange(a, dtype=np.int64), (m, 1))
    rows = np.arange(m)
    for step, i in enumerate(range(a - 1, 0, -1)):
        j = bounded_np(draw_np(keys, step), i + 1)
        tmp = out[:, i].copy()
        out[:, i] = out[rows, j]
        out[rows, j] = tmp
    return out


# -- placing a point inside its cell ----------------------------------------

@njit
def _place_jit(c, z, q, eta):
    # x = (c + eta) / z, nudged so that floor(z x) == c and floor((z/q) x) == c // q
    zf = float(z)
    zc = float(z // q)
    cc = c // q
    x = (c + eta) / zf
    for _ in range(_MAX_NUDGE):
        if np.floor(x * zf) > c or np.floor(x * zc) > cc:
            x = np.nextafter(x, -np.inf)
        else:
            break
    for _ in range(_MAX_NUDGE):
        if np.floor(x * zf) < c or np.floor(x * zc) < cc:
            x = np.nextafter(x, np.inf)
        else:
            break
    return x


def place_np(c, z, q, eta):
    c = np.asarray(c, dtype=np.int64)
    zf = float(z)
    zc = float(z // q)
    cc = c // q
    x = (c + eta) / zf
    for _ in range(_MAX_NUDGE):
        bad = (np.floor(x * zf) > c) | (np.floor(x * zc) > cc)
        if not bad.any():
            break
        x = np.where(bad, np.nextafter(x, -np.inf), x)
    for _ in range(_MAX_NUDGE):
        bad = (np.floor(x * zf) < c) | (np.floor(x * zc) < cc)
        if not bad.any():
            break
        x = np.where(bad, np.nextafter(x, np.inf), x)
    return x


# -- design batches ----------------------------------------------------------

@njit(parallel=True)
def oa_designs_jit(H, n, seed, streams, udesign, alpha_pos):
    N, K = H.shape
    R = streams.shape[0]
    q = N // n
    out = np.empty((R, N, K), dtype=np.float64)
    for r in prange(R):
        st = streams[r]
        src = np.empty(N, dtype=np.int64)
        _shuffle_jit(key_jit(seed, st, np.uint64(ROWS), np.uint64(0), np.uint64(0)), N, src)
        pi = np.empty(n, dtype=np.int64)
        shift = np.empty(q, dtype=np.int64)
        alpha = np.zeros((N, K), dtype=np.int64)
        for k in range(K):
            if udesign:
                for x in range(n):
                    _shuffle_jit(key_jit(seed, st, np.uint64(SHIFT), np.uint64(k), np.uint64(x)), q, shift)
                    for row in range(N):
                        if H[row, k] == x:
                            alpha[row, k] = shift[alpha_pos[row, k]]
        for k in range(K):
            _shuffle_jit(key_jit(seed, st, np.uint64(LEVELS), np.uint64(k), np.uint64(0)), n, pi)
            for i in range(N):
                row = src[i]
                eta = unit_jit(draw_jit(key_jit(seed, st, np.uint64(JITTER), np.uint64(i), np.uint64(k)), np.uint64(0)))
                level = pi[H[row, k]]
                if udesign:
                    out[r, i, k] = _place_jit(level * q + alpha[row, k], N, q, eta)
                else:
                    out[r, i, k] = _place_jit(level, n, 1, eta)
    return out


def oa_designs_np(H, n, seed, streams, udesign, alpha_pos):
    N, K = H.shape
    streams = _u64(streams)
    R = streams.shape[0]
    q = N // n
    src = permutations_np(key_np(seed, streams, ROWS), N)  # (R, N)
    ii = np.arange(N, dtype=np.uint64)
    out = np.empty((R, N, K), dtype=np.float64)
    for k in range(K):
        pi = permutations_np(key_np(seed, streams, LEVELS, k), n)  # (R, n)
        rows_h = H[src, k]  # (R, N) level of the source row
        level = np.take_along_axis(pi, rows_h, axis=1)
        eta = unit_np(draw_np(key_np(seed, streams[:, None], JITTER, ii[None, :], k), 0))
        if udesign:
            alpha = np.empty((R, N), dtype=np.int64)
            for x in range(n):
                shift = permutations_np(key_np(seed, streams, SHIFT, k, x), q)
                rows = np.flatnonzero(H[:, k] == x)
                alpha[:, rows] = shift[:, alpha_pos[rows, k]]
            a_src = np.take_along_axis(alpha, src, axis=1)
            out[:, :, k] = place_np(level * q + a_src, N, q, eta)
        else:
            out[:, :, k] = place_np(level, n, 1, eta)
    return out


@njit(parallel=True)
def lhs_designs_jit(N, K, seed, streams):
    R = streams.shape[0]
    out = np.empty((R, N, K), dtype=np.float64)
    for r in prange(R):
        st = streams[r]
        pi = np.empty(N, dtype=np.int64)
        for k in range(K):
            _shuffle_jit(key_jit(seed, st, np.uint64(LEVELS), np.uint64(k), np.uint64(0)), N, pi)
            for i in range(N):
                eta = unit_jit(draw_jit(key_jit(seed, st, np.uint64(JITTER), np.uint64(i), np.uint64(k)), np.uint64(0)))
                out[r, i, k] = _place_jit(pi[i], N, 1, eta)
    return out


def lhs_designs_np(N, K, seed, streams):
    streams = _u64(streams)
    R = streams.shape[0]
    ii = np.arange(N, dtype=np.uint64)
    out = np.empty((R, N, K), dtype=np.float64)
    for k in range(K):
        pi = permutations_np(key_np(seed, streams, LEVELS, k), N)
        eta = unit_np(draw_np(key_np(seed, streams[:, None], JITTER, ii[None, :], k), 0))
        out[:, :, k] = place_np(pi, N, 1, eta)
    return out


@njit(parallel=True)
def iid_points_jit(N, K, seed, streams):
    R = streams.shape[0]
    out = np.empty((R, N, K), dtype=np.float64)
    for r in prange(R):
        for i in range(N):
            for k in range(K):
                out[r, i, k] = unit_jit(draw_jit(key_jit(seed, streams[r], np.uint64(IID), np.uint64(i), np.uint64(k)), np.uint64(0)))
    return out


def iid_points_np(N, K, seed, streams):
    streams = _u64(streams)
    ii = np.arange(N, dtype=np.uint64)[None, :, None]
    kk = np.arange(K, dtype=np.uint64)[None, None, :]
    return unit_np(draw_np(key_np(seed, streams[:, None, None], IID, ii, kk), 0))


# -- pairwise row agreement ---------------------------------------------------

@njit
def first_agreement_jit(H, limit):
    # first row pair (lexicographic) agreeing in more than `limit` columns
    N, K = H.shape
    for i in range(N):
        for j in range(i + 1, N):
            agree = 0
            for k in range(K):
                if H[i, k] == H[j, k]:
                    agree += 1
            if agree > limit:
                return i, j, agree
    return -1, -1, 0


def first_agreement_np(H, limit, block=256):
    N = H.shape[0]
    for start in range(0, N, block):
        stop = min(N, start + block)
        agree = (H[start:stop, None, :] == H[None, :, :]).sum(axis=2)
        ii, jj = np.nonzero((agree > limit) & (np.arange(N)[None, :] > np.arange(start, stop)[:, None]))
        if ii.size:
            return int(ii[0] + start), int(jj[0]), int(agree[ii[0], jj[0]])
    return -1, -1, 0


def _as_u64(x):
    return np.uint64(int(x) & 0xFFFFFFFFFFFFFFFF)


if USE_JIT:
    def permutations(keys, a):
        return permutations_jit(_u64(keys).reshape(-1), int(a))

    def oa_designs(H, n, seed, streams, udesign, alpha_pos):
        return oa_designs_jit(np.ascontiguousarray(H, dtype=np.int64), int(n), _as_u64(seed),
                              _u64(streams), bool(udesign), np.ascontiguousarray(alpha_pos, dtype=np.int64))

    def lhs_designs(N, K, seed, streams):
        return lhs_designs_jit(int(N), int(K), _as_u64(seed), _u64(streams))

    def iid_points(N, K, seed, streams):
        return iid_points_jit(int(N), int(K), _as_u64(seed), _u64(streams))

    def first_agreement(H, limit):
        i, j, a = first_agreement_jit(np.ascontiguousarray(H, dtype=np.int64), int(limit))
        return int(i), int(j), int(a)
else:
    permutations = permutations_np

    def oa_designs(H, n, seed, streams, udesign, alpha_pos):
        return oa_designs_np(np.asarray(H, dtype=np.int64), int(n), _as_u64(seed), streams, udesign, alpha_pos)

    def lhs_designs(N, K, seed, streams):
        return lhs_designs_np(int(N), int(K), _as_u64(seed), streams)

    def iid_points(N, K, seed, streams):
        return iid_points_np(int(N), int(K), _as_u64(seed), streams)

    first_agreement = first_agreement_np
