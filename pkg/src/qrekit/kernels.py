"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names (``jacobi_eigh``, ``expected_acceptance``, ``mc_acceptance``)
are bound at import time to the numba variants unless numba is
missing or ``QREKIT_DISABLE_NUMBA`` is set. Both variants stay importable under
``*_numba`` / ``*_numpy`` so they can be cross-checked and benchmarked.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


# --------------------------------------------------------------------------
# counter-based mixing (splitmix64 finaliser)
# --------------------------------------------------------------------------

def mix64_numpy(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def _mix64_scalar(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


# --------------------------------------------------------------------------
# cyclic Jacobi eigensolver for complex Hermitian matrices
# --------------------------------------------------------------------------

def _sorted_result(a, v):
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@njit
def _jacobi_core_numba(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real ** 2 + a[i, j].imag ** 2
    scale = max(1.0, np.sqrt(scale))
    thresh = tol * scale
    tiny = 1e-18 * scale
    sweeps = 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if np.sqrt(2.0 * off) < thresh or sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < tiny:
                    continue
                ph = apq / mag
                phc = ph.conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * phc * akq
                    a[k, q] = s * ph * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * phc * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * phc * vkq
                    v[k, q] = s * ph * vkp + c * vkq
    return a, v, sweeps


def jacobi_eigh_numba(m, tol=1e-10, max_sweeps=100):
    a = np.array(m, dtype=np.complex128, copy=True)
    a, v, _ = _jacobi_core_numba(a, float(tol), int(max_sweeps))
    return _sorted_result(a, v)


def jacobi_eigh_numpy(m, tol=1e-10, max_sweeps=100):
    a = np.array(m, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))
    thresh = tol * scale
    tiny = 1e-18 * scale
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if np.sqrt(2.0 * np.sum(np.abs(a[iu]) ** 2)) < thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < tiny:
                    continue
                ph = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = np.copysign(1.0, tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                a[:, p] = c * colp - s * np.conj(ph) * a[:, q]
                a[:, q] = s * ph * colp + c * a[:, q]
                rowp = a[p, :].copy()
                a[p, :] = c * rowp - s * ph * a[q, :]
                a[q, :] = s * np.conj(ph) * rowp + c * a[q, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * np.conj(ph) * v[:, q]
                v[:, q] = s * ph * vp + c * v[:, q]
    return _sorted_result(a, v)


# --------------------------------------------------------------------------
# exact acceptance: sum over (h, m, x, z)
# --------------------------------------------------------------------------
# probs[h, m, o] with o = x * 2**N + z, accept[c] = P_V(acc | corrected bits c)

@njit
def expected_acceptance_numba(probs, accept, n):
    dim = 1 << n
    mask = dim - 1
    total = 0.0
    for h in range(2):
        for m in range(dim):
            for o in range(dim * dim):
                p = probs[h, m, o]
                if p == 0.0:
                    continue
                if h == 0:
                    c = m ^ (o >> n)
                else:
                    c = m ^ (o & mask)
                total += p * accept[c]
    return total / (2 * dim)


def expected_acceptance_numpy(probs, accept, n):
    dim = 1 << n
    o = np.arange(dim * dim)
    m = np.arange(dim)[:, None]
    c0 = m ^ (o >> n)[None, :]
    c1 = m ^ (o & (dim - 1))[None, :]
    total = np.sum(probs[0] * accept[c0]) + np.sum(probs[1] * accept[c1])
    return float(total) / (2 * dim)


# --------------------------------------------------------------------------
# Monte Carlo acceptance
# --------------------------------------------------------------------------
# cum[row, o]: cumulative outcome distribution for row = h * 2**N + m
# term_cum: cumulative term weights; ti/tj: 0-based qubit indices; tpar: required parity

@njit
def _search(cum_row, u):
    lo = 0
    hi = cum_row.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum_row[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit
def mc_acceptance_numba(master, trials, n, cum, term_cum, ti, tj, tpar):
    dim = 1 << n
    mask = dim - 1
    accepted = 0
    g = np.uint64(0x9E3779B97F4A7C15)
    for t in range(trials):
        seed = _mix64_scalar(master + np.uint64(t + 1) * g)
        w0 = _mix64_scalar(seed + g)
        w1 = _mix64_scalar(seed + np.uint64(2) * g)
        w2 = _mix64_scalar(seed + np.uint64(3) * g)
        h = np.int64(w0 & np.uint64(1))
        m = np.int64((w0 >> np.uint64(1)) & np.uint64(mask))
        u1 = np.float64(w1 >> np.uint64(11)) * (1.0 / 9007199254740992.0)
        u2 = np.float64(w2 >> np.uint64(11)) * (1.0 / 9007199254740992.0)
        o = _search(cum[h * dim + m], u1)
        k = _search(term_cum, u2)
        if h == 0:
            c = m ^ (o >> n)
        else:
            c = m ^ (o & mask)
        bi = (c >> (n - 1 - ti[k])) & 1
        bj = (c >> (n - 1 - tj[k])) & 1
        if (bi ^ bj) == tpar[k]:
            accepted += 1
    return accepted


def _first_above(cum, rows, u):
    # per-trial binary search on the selected rows, vectorised over trials
    lo = np.zeros(u.shape[0], dtype=np.int64)
    hi = np.full(u.shape[0], cum.shape[1] - 1, dtype=np.int64)
    while np.any(lo < hi):
        mid = (lo + hi) >> 1
        above = cum[rows, mid] > u
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid + 1)
    return lo


def mc_acceptance_numpy(master, trials, n, cum, term_cum, ti, tj, tpar):
    dim = 1 << n
    mask = dim - 1
    t = np.arange(1, trials + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seed = mix64_numpy(np.uint64(master) + t * GOLDEN)
        w0 = mix64_numpy(seed + GOLDEN)
        w1 = mix64_numpy(seed + np.uint64(2) * GOLDEN)
        w2 = mix64_numpy(seed + np.uint64(3) * GOLDEN)
    h = (w0 & _ONE).astype(np.int64)
    m = ((w0 >> _ONE) & np.uint64(mask)).astype(np.int64)
    u1 = (w1 >> _S11).astype(np.float64) * _INV53
    u2 = (w2 >> _S11).astype(np.float64) * _INV53
    o = _first_above(cum, h * dim + m, u1)
    k = _first_above(term_cum[None, :], np.zeros(trials, dtype=np.int64), u2)
    c = np.where(h == 0, m ^ (o >> n), m ^ (o & mask))
    bi = (c >> (n - 1 - ti[k])) & 1
    bj = (c >> (n - 1 - tj[k])) & 1
    return int(np.count_nonzero((bi ^ bj) == tpar[k]))


if USE_NUMBA:
    jacobi_eigh = jacobi_eigh_numba
    expected_acceptance = expected_acceptance_numba
    mc_acceptance = mc_acceptance_numba
    BACKEND = "numba"
else:
    jacobi_eigh = jacobi_eigh_numpy
    expected_acceptance = expected_acceptance_numpy
    mc_acceptance = mc_acceptance_numpy
    BACKEND = "numpy"


def mix64(z):
    """Vectorised splitmix64 finaliser on uint64 input (bijective)."""
    return mix64_numpy(z)
