"""Polar code construction, encoding, SCL decoding, and visited-node accounting.

Path metrics are exact log-domain quantities (no min-sum shortcuts), so callers
can treat them as likelihoods: downstream consumers aggregate them into channel
estimation metrics, where metric fidelity matters as much as the argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "PolarCode",
    "PuncturingSpec",
    "PathList",
    "NodeCounter",
    "SclDecoder",
    "beta_weights",
    "construct_code",
    "encode",
    "encode_rows",
    "qup_spec",
    "apply_puncturing",
    "scl_decode",
    "partial_prefix_metric",
]

LOG2 = math.log(2.0)

# LLR magnitude used by receivers to represent noiseless certainty while
# keeping all arithmetic finite.
LLR_CLAMP = 40.0


@dataclass(eq=False)
class PolarCode:
    """Immutable after construction; shareable across workers."""

    N: int
    K: int
    m: int
    A: np.ndarray  # sorted information indices, 0-based
    F: np.ndarray  # sorted frozen indices, 0-based
    construction_base: float
    frozen_mask: np.ndarray  # uint8, 1 at frozen positions
    # frozen_prefix[i] = number of frozen indices < i, for i in 0..N
    frozen_prefix: np.ndarray


@dataclass(frozen=True)
class PuncturingSpec:
    count: int
    positions: tuple[int, ...]  # coded-bit indices receiving LLR 0


@dataclass
class NodeCounter:
    """Counts (active path, input-bit stage) processing steps."""

    visited: int = 0

    def add(self, n: int) -> None:
        self.visited += int(n)


@dataclass
class PathList:
    """Survivors of one list decode, best first.

    metrics[l] = log p(y, u-prefix | frozen constraints) up to one additive
    constant shared by all entries; equivalently minus the accumulated penalty
    sum. Non-increasing under extension, so metrics[0] is the most likely path.
    """

    u: np.ndarray  # (n_paths, N) uint8
    metrics: np.ndarray  # (n_paths,) float64, descending


def beta_weights(N: int, base: float) -> np.ndarray:
    """w(i) = sum of base**j over the set bits b_j of the 0-based index i."""
    m = int(np.log2(N))
    w = np.zeros(N)
    for j in range(m):
        w[(np.arange(N) >> j) & 1 == 1] += base**j
    return w


def construct_code(N: int, K: int, base: float = 2.0 ** 0.25) -> PolarCode:
    """Channel-independent construction: keep the K largest-weight indices.

    Ties break toward the larger index, which is the more reliable position
    under the polarization partial order.
    """
    m = int(np.log2(N))
    if N < 2 or (1 << m) != N:
        raise ValueError("N must be a power of two, >= 2")
    if not 1 <= K <= N:
        raise ValueError("K out of range")
    if base <= 0:
        raise ValueError("base must be positive")
    w = beta_weights(N, base)
    order = np.lexsort((np.arange(N), w))  # ascending weight, then index
    A = np.sort(order[-K:]).astype(np.int64)
    mask = np.ones(N, dtype=np.uint8)
    mask[A] = 0
    F = np.flatnonzero(mask).astype(np.int64)
    prefix = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])
    return PolarCode(
        N=N, K=K, m=m, A=A, F=F, construction_base=base,
        frozen_mask=mask, frozen_prefix=prefix,
    )


def encode(code: PolarCode, u: np.ndarray) -> np.ndarray:
    """c = u times the m-fold Kronecker power of [[1,0],[1,1]], over GF(2)."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape != (code.N,):
        raise ValueError("input length must equal N")
    return encode_rows(code, u[np.newaxis, :])[0]


def encode_rows(code: PolarCode, u: np.ndarray) -> np.ndarray:
    # butterfly in natural order: each stage folds the right half of every
    # 2h block into its left half
    c = np.array(u, dtype=np.uint8, copy=True)
    rows = c.shape[0]
    h = 1
    while h < code.N:
        v = c.reshape(rows, -1, 2 * h)
        v[:, :, :h] ^= v[:, :, h:]
        h *= 2
    return c


def qup_spec(N: int, P: int) -> PuncturingSpec:
    """Quasi-uniform puncturing: drop the first P coded positions in natural order."""
    if not 0 <= P <= N:
        raise ValueError("P out of range")
    return PuncturingSpec(count=P, positions=tuple(range(P)))


def apply_puncturing(spec: PuncturingSpec, llr: np.ndarray) -> np.ndarray:
    out = np.array(llr, dtype=np.float64, copy=True)
    if spec.count:
        out[list(spec.positions)] = 0.0
    return out


@njit(cache=True)
def _f(a, b):
    # exact box-plus: sign-preserving min plus the two correction terms.
    # Written so that _f(-a, -b) == _f(a, b) bit for bit.
    aa = abs(a)
    ab = abs(b)
    mn = aa if aa < ab else ab
    if (a >= 0.0) != (b >= 0.0):
        mn = -mn
    return mn + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@njit(cache=True)
def _phi(x):
    # log(1 + exp(-x)) without overflow on either side
    if x >= 0.0:
        return math.log1p(math.exp(-x))
    return -x + math.log1p(math.exp(x))


@njit(cache=True)
def _store_bit(bits, l, i, bit, m, boff, N):
    # write the decided leaf bit, then fold partial sums upward while the
    # node index stays odd. Plane choice is the node index parity, so a left
    # sibling's sums survive until its right sibling consumes them.
    bits[l, i & 1, boff[m]] = bit
    d = m
    v = i
    while (v & 1) == 1 and d > 0:
        W = N >> d
        pp = (v >> 1) & 1
        for j in range(W):
            lb = bits[l, 0, boff[d] + j]
            rb = bits[l, 1, boff[d] + j]
            bits[l, pp, boff[d - 1] + j] = lb ^ rb
            bits[l, pp, boff[d - 1] + W + j] = rb
        v >>= 1
        d -= 1


@njit(cache=True)
def _scl_kernel(llr, frozen, L, stop, Pa, Pb, Ba, Bb, Ua, Ub, PMa, PMb,
                cand_pm, cand_ord, out_u, out_pm):
    """List decode through input stages 0..stop-1.

    Returns (number of surviving paths, visited-node count). Visited nodes are
    counted after each stage's extension and pruning: one unit per path that
    leaves the stage alive.
    """
    N = llr.shape[0]
    m = 0
    while (1 << m) < N:
        m += 1
    # poff[d]: offset of tree level d (1..m) in the per-path LLR rows;
    # boff[d]: offset of level d (0..m) in the per-path bit planes
    poff = np.empty(m + 1, np.int64)
    boff = np.empty(m + 1, np.int64)
    poff[0] = -1
    boff[0] = 0
    acc = 0
    for d in range(1, m + 1):
        poff[d] = acc
        acc += N >> d
        boff[d] = boff[d - 1] + (N >> (d - 1))
    n_act = 1
    PMa[0] = 0.0
    visited = 0
    for i in range(stop):
        if i == 0:
            d0 = 0
            dstart = 1
        else:
            t = 0
            ii = i
            while ii & 1 == 0:
                t += 1
                ii >>= 1
            d0 = m - t
            dstart = d0 + 1
        for l in range(n_act):
            if i > 0:
                # one g step at the level where the path turns right
                W = N >> d0
                co = poff[d0]
                if d0 == 1:
                    for j in range(W):
                        a = llr[j]
                        b = llr[W + j]
                        if Ba[l, 0, boff[1] + j]:
                            Pa[l, co + j] = b - a
                        else:
                            Pa[l, co + j] = b + a
                else:
                    po = poff[d0 - 1]
                    for j in range(W):
                        a = Pa[l, po + j]
                        b = Pa[l, po + W + j]
                        if Ba[l, 0, boff[d0] + j]:
                            Pa[l, co + j] = b - a
                        else:
                            Pa[l, co + j] = b + a
            for d in range(dstart, m + 1):
                W = N >> d
                co = poff[d]
                if d == 1:
                    for j in range(W):
                        Pa[l, co + j] = _f(llr[j], llr[W + j])
                else:
                    po = poff[d - 1]
                    for j in range(W):
                        Pa[l, co + j] = _f(Pa[l, po + j], Pa[l, po + W + j])
        if frozen[i]:
            for l in range(n_act):
                lam = Pa[l, poff[m]]
                PMa[l] += _phi(lam)
                Ua[l, i] = 0
                _store_bit(Ba, l, i, 0, m, boff, N)
            visited += n_act
        else:
            nc = 2 * n_act
            for l in range(n_act):
                lam = Pa[l, poff[m]]
                cand_pm[2 * l] = PMa[l] + _phi(lam)
                cand_pm[2 * l + 1] = PMa[l] + _phi(-lam)
            keep = nc if nc < L else L
            # stable ascending order: on ties the lower candidate index,
            # hence the lower parent path, survives
            for c in range(nc):
                cand_ord[c] = c
            for c in range(1, nc):
                key = cand_ord[c]
                kv = cand_pm[key]
                j = c - 1
                while j >= 0 and cand_pm[cand_ord[j]] > kv:
                    cand_ord[j + 1] = cand_ord[j]
                    j -= 1
                cand_ord[j + 1] = key
            for t2 in range(keep):
                c = cand_ord[t2]
                par = c >> 1
                bit = np.uint8(c & 1)
                for j2 in range(N - 1):
                    Pb[t2, j2] = Pa[par, j2]
                for j2 in range(2 * N - 1):
                    Bb[t2, 0, j2] = Ba[par, 0, j2]
                    Bb[t2, 1, j2] = Ba[par, 1, j2]
                for j2 in range(i):
                    Ub[t2, j2] = Ua[par, j2]
                Ub[t2, i] = bit
                PMb[t2] = cand_pm[c]
                _store_bit(Bb, t2, i, bit, m, boff, N)
            tmpP = Pa
            Pa = Pb
            Pb = tmpP
            tmpB = Ba
            Ba = Bb
            Bb = tmpB
            tmpU = Ua
            Ua = Ub
            Ub = tmpU
            tmpM = PMa
            PMa = PMb
            PMb = tmpM
            n_act = keep
            visited += n_act
    for l in range(n_act):
        out_pm[l] = PMa[l]
        for j in range(stop):
            out_u[l, j] = Ua[l, j]
    return n_act, visited


class SclDecoder:
    """Reusable decoder with preallocated path state.

    One instance per worker: the scratch buffers make instances stateful, so
    do not share one across threads. A PolarCode itself is safe to share.
    """

    def __init__(self, code: PolarCode, max_list: int):
        if max_list < 1:
            raise ValueError("list size must be >= 1")
        self.code = code
        self.max_list = max_list
        N = code.N
        L = max_list
        self._Pa = np.empty((L, N - 1), dtype=np.float64)
        self._Pb = np.empty((L, N - 1), dtype=np.float64)
        self._Ba = np.empty((L, 2, 2 * N - 1), dtype=np.uint8)
        self._Bb = np.empty((L, 2, 2 * N - 1), dtype=np.uint8)
        self._Ua = np.empty((L, N), dtype=np.uint8)
        self._Ub = np.empty((L, N), dtype=np.uint8)
        self._PMa = np.empty(L, dtype=np.float64)
        self._PMb = np.empty(L, dtype=np.float64)
        self._cand_pm = np.empty(2 * L, dtype=np.float64)
        self._cand_ord = np.empty(2 * L, dtype=np.int64)
        self._out_u = np.empty((L, N), dtype=np.uint8)
        self._out_pm = np.empty(L, dtype=np.float64)

    def _run(self, llr: np.ndarray, L: int, stop: int) -> tuple[int, int]:
        llr = np.ascontiguousarray(llr, dtype=np.float64)
        if llr.shape != (self.code.N,):
            raise ValueError("llr length must equal N")
        if not 1 <= L <= self.max_list:
            raise ValueError("list size exceeds decoder capacity")
        if not 1 <= stop <= self.code.N:
            raise ValueError("stage index out of range")
        return _scl_kernel(
            llr, self.code.frozen_mask, L, stop,
            self._Pa, self._Pb, self._Ba, self._Bb,
            self._Ua, self._Ub, self._PMa, self._PMb,
            self._cand_pm, self._cand_ord, self._out_u, self._out_pm,
        )

    def decode(self, llr: np.ndarray, L: int | None = None,
               counter: NodeCounter | None = None) -> PathList:
        L = self.max_list if L is None else L
        n, visited = self._run(llr, L, self.code.N)
        if counter is not None:
            counter.add(visited)
        pm = self._out_pm[:n]
        order = np.argsort(pm, kind="stable")
        return PathList(u=self._out_u[order].copy(), metrics=-pm[order])

    def prefix_metric(self, llr: np.ndarray, beta: int, L_e: int | None = None,
                      counter: NodeCounter | None = None,
                      aggregate: str = "sum") -> float:
        """Log-likelihood that the frozen bits among stages 1..beta are all zero.

        List decodes through stage beta with list size L_e and aggregates the
        survivors by log-sum-exp; exact when L_e covers every prefix, an
        underestimate otherwise (dropped paths only remove probability mass).
        aggregate="max" keeps only the best survivor instead of the sum.
        The value is calibrated against the per-bit densities implied by the
        LLRs: it equals

            logsumexp(metrics) + sum_k log(2 cosh(llr_k / 2)) - (N - |F_beta|) log 2

        with F_beta the frozen stages up to beta. Undecoded stages are
        marginalized uniformly, and the bit-independent factor of the channel
        density is dropped, so differences of this value across channel
        hypotheses are exact log-likelihood-ratio differences.
        """
        if aggregate not in ("sum", "max"):
            raise ValueError("aggregate must be 'sum' or 'max'")
        L_e = self.max_list if L_e is None else L_e
        n, visited = self._run(llr, L_e, beta)
        if counter is not None:
            counter.add(visited)
        neg_pm = -self._out_pm[:n]
        if aggregate == "max":
            lse = float(neg_pm.max())
        elif n == 1:
            lse = float(neg_pm[0])
        else:
            lse = float(np.logaddexp.reduce(np.sort(neg_pm)))
        a = np.abs(np.asarray(llr, dtype=np.float64))
        log2cosh = float(np.sum(a / 2.0 + np.log1p(np.exp(-a))))
        n_free = self.code.N - int(self.code.frozen_prefix[beta])
        return lse + log2cosh - n_free * LOG2


def scl_decode(code: PolarCode, llr: np.ndarray, L: int,
               counter: NodeCounter | None = None) -> PathList:
    """One-shot list decode; allocates scratch state per call."""
    return SclDecoder(code, L).decode(llr, L, counter)


def partial_prefix_metric(code: PolarCode, llr: np.ndarray, beta: int, L_e: int,
                          counter: NodeCounter | None = None,
                          aggregate: str = "sum") -> float:
    """One-shot prefix metric; see SclDecoder.prefix_metric for semantics."""
    return SclDecoder(code, L_e).prefix_metric(llr, beta, L_e, counter, aggregate)
