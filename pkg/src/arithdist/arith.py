"""Exact arithmetic tables: d(n), d(n)^2 sums, Delta(x), Ramanujan tau.

Divisor counts come from a sieve over pairs ``i * j`` with ``i <= j``; the
summatory function uses the hyperbola method and needs no table. The weight-12
coefficients are the q-expansion of eta(q)^24, obtained from the Jacobi series
of eta^3 by three squarings carried out as single big-integer products
(Kronecker substitution).
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

EULER_GAMMA = 0.57721566490153286

DIVISOR_CEILING = 400_000_000
HECKE_CEILING = 1_000_000
STREAM_BLOCK = 1 << 22

CACHE_MAGIC = b"ADTB"
CACHE_VERSION = 1


class CapacityError(ValueError):
    """Requested size exceeds a table or configured ceiling."""


class UnsupportedWeightError(ValueError):
    """Only the weight-12 level-1 eigenform is implemented."""


class FitError(ValueError):
    """Least-squares fit is degenerate."""


# ---------------------------------------------------------------------------
# divisor function


@dataclass(frozen=True)
class DivisorTable:
    """d(n) for 1 <= n <= limit, with prefix sums.

    ``values[0]`` and ``prefix[0]`` are 0 so that indexing is by n.
    """

    limit: int
    values: np.ndarray = field(repr=False)
    prefix: np.ndarray = field(repr=False)

    def d2_prefix(self) -> np.ndarray:
        v = self.values.astype(np.int64)
        return np.cumsum(v * v)


def _divisor_block(lo: int, hi: int) -> np.ndarray:
    """d(n) for lo <= n < hi (lo >= 1)."""
    out = np.zeros(hi - lo, dtype=np.uint16)
    root = math.isqrt(hi - 1)
    for i in range(1, root + 1):
        sq = i * i
        # multiples i*j with j > i contribute the pair (i, j)
        first = max(sq + i, -(-lo // i) * i)
        if first < hi:
            out[first - lo::i] += 2
        if lo <= sq < hi:
            out[sq - lo] += 1
    return out


def build_divisor_table(N: int, ceiling: int = DIVISOR_CEILING) -> DivisorTable:
    """Sieve d(n) for n <= N.

    Raises
    ------
    CapacityError
        If ``N < 1`` or ``N > ceiling``.
    """
    N = int(N)
    if N < 1 or N > ceiling:
        raise CapacityError(f"divisor table size {N} outside [1, {ceiling}]")
    values = np.zeros(N + 1, dtype=np.uint16)
    for lo in range(1, N + 1, STREAM_BLOCK * 8):
        hi = min(N + 1, lo + STREAM_BLOCK * 8)
        values[lo:hi] = _divisor_block(lo, hi)
    prefix = np.cumsum(values, dtype=np.int64)
    return DivisorTable(N, values, prefix)


def divisor_summatory(x) -> int:
    """Exact sum of d(n) over n <= x by the hyperbola method.

    Real ``x`` is floored; ``x < 1`` gives 0.
    """
    if x < 1:
        return 0
    n = int(math.floor(x))
    r = math.isqrt(n)
    k = np.arange(1, r + 1, dtype=np.int64)
    return 2 * int((n // k).sum()) - r * r


def divisor_summatory_many(xs) -> np.ndarray:
    """Vectorised :func:`divisor_summatory` over an array of reals."""
    return np.array([divisor_summatory(x) for x in np.asarray(xs, dtype=float).ravel()],
                    dtype=np.int64).reshape(np.shape(xs))


def main_term(x: float) -> float:
    """x (log x + 2 gamma - 1)."""
    return x * (math.log(x) + 2.0 * EULER_GAMMA - 1.0)


def main_term_increment(x: float, h: float) -> float:
    """main_term(x + h) - main_term(x) without cancellation."""
    return (x + h) * math.log1p(h / x) + h * (math.log(x) + 2.0 * EULER_GAMMA - 1.0)


@dataclass(frozen=True)
class SummatoryRemainder:
    x: float
    exact: int
    main_term: float

    @property
    def remainder(self) -> float:
        return float(self.exact) - self.main_term


def delta_remainder(x) -> SummatoryRemainder:
    """Delta(x) = D(x) - x (log x + 2 gamma - 1) with its two parts."""
    if x < 1:
        raise ValueError("delta_remainder needs x >= 1")
    return SummatoryRemainder(float(x), divisor_summatory(x), main_term(float(x)))


def delta(x) -> float:
    return delta_remainder(x).remainder


# ---------------------------------------------------------------------------
# sums of d(n)^2


def d2_summatory_many(ts, table: DivisorTable | None = None) -> np.ndarray:
    """Exact sums of d(n)^2 over n <= t for each t in ``ts``.

    Uses ``table`` when it covers max(ts); otherwise streams a segmented sieve
    up to max(ts) (bounded by ``DIVISOR_CEILING``).
    """
    ts = np.floor(np.asarray(ts, dtype=float)).astype(np.int64)
    if ts.size == 0:
        return np.zeros(0, dtype=np.int64)
    if ts.min() < 1:
        raise ValueError("d2_summatory needs t >= 1")
    top = int(ts.max())
    if table is not None and top <= table.limit:
        return table.d2_prefix()[ts]
    if top > DIVISOR_CEILING:
        raise CapacityError(f"t={top} beyond the streaming ceiling {DIVISOR_CEILING}")
    order = np.argsort(ts, kind="stable")
    out = np.zeros(ts.size, dtype=np.int64)
    running = 0
    pos = 0
    for lo in range(1, top + 1, STREAM_BLOCK):
        hi = min(top + 1, lo + STREAM_BLOCK)
        v = _divisor_block(lo, hi).astype(np.int64)
        csum = np.cumsum(v * v) + running
        while pos < ts.size and ts[order[pos]] < hi:
            out[order[pos]] = csum[ts[order[pos]] - lo]
            pos += 1
        running = int(csum[-1])
    return out


def d2_summatory(t, table: DivisorTable | None = None) -> int:
    """Exact sum of d(n)^2 over n <= t."""
    return int(d2_summatory_many([t], table)[0])


def fit_c3(t_grid, table: DivisorTable | None = None) -> float:
    """Leading coefficient a3 of a fit D2(t) = t (a3 L^3 + a2 L^2 + a1 L + a0), L = log t.

    Rows are weighted by 1/(t L^3) so every grid point carries comparable
    relative weight. Small-t grids return a value with no accuracy promise.

    Raises
    ------
    FitError
        Fewer than four distinct points or a rank-deficient design.
    """
    ts = np.unique(np.asarray(t_grid, dtype=float))
    if ts.size < 4 or ts.min() <= 1:
        raise FitError("need at least four distinct t > 1")
    y = d2_summatory_many(ts, table).astype(float)
    lg = np.log(ts)
    design = np.stack([lg**3, lg**2, lg, np.ones_like(lg)], axis=1) * ts[:, None]
    scale = 1.0 / (ts * lg**3)
    a = design * scale[:, None]
    if np.linalg.matrix_rank(a) < 4:
        raise FitError("degenerate grid")
    coef, *_ = np.linalg.lstsq(a, y * scale, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# Ramanujan tau via Kronecker substitution


def _slot_bytes(n_terms: int, max_a: int, max_b: int) -> int:
    bits = (n_terms * max_a * max_b).bit_length() + 2
    return -(-bits // 8)


def _pack(coeffs, nbytes: int):
    off = 1 << (8 * nbytes - 1)
    buf = b"".join((c + off).to_bytes(nbytes, "little") for c in coeffs)
    bias = int.from_bytes(off.to_bytes(nbytes, "little") * len(coeffs), "little")
    return gmpy2.mpz(int.from_bytes(buf, "little")) - bias


def _unpack(value, n: int, nbytes: int) -> list[int]:
    off = 1 << (8 * nbytes - 1)
    bias = int.from_bytes(off.to_bytes(nbytes, "little") * n, "little")
    raw = int((value + bias) & ((gmpy2.mpz(1) << (8 * nbytes * n)) - 1)).to_bytes(n * nbytes, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - off for i in range(n)]


def _square_series(coeffs: list[int]) -> list[int]:
    """First len(coeffs) coefficients of the square of a power series."""
    n = len(coeffs)
    mx = max(abs(c) for c in coeffs)
    nbytes = _slot_bytes(n, mx, mx)
    packed = _pack(coeffs, nbytes)
    return _unpack(packed * packed, n, nbytes)


def eta24_coefficients(n_terms: int) -> list[int]:
    """Coefficients of prod (1 - q^m)^24 up to q^(n_terms - 1)."""
    c = [0] * n_terms
    j = 0
    while j * (j + 1) // 2 < n_terms:
        c[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    for _ in range(3):
        c = _square_series(c)
    return c


@dataclass(frozen=True)
class HeckeTable:
    """Coefficients of the weight-12 level-1 eigenform up to ``limit``.

    ``exact`` holds Python ints (object array), ``normalized`` holds
    tau(n)/n^(11/2) and ``prefix_normalized`` their running sums; index 0 is
    a zero placeholder throughout.
    """

    weight: int
    limit: int
    exact: np.ndarray = field(repr=False)
    normalized: np.ndarray = field(repr=False)
    prefix_normalized: np.ndarray = field(repr=False)


def _normalize(exact, k: int) -> np.ndarray:
    n = np.arange(len(exact), dtype=float)
    vals = np.array([float(v) for v in exact])
    out = np.zeros(len(exact))
    out[1:] = vals[1:] / n[1:] ** ((k - 1) / 2)
    return out


def build_hecke_table(k: int = 12, N: int = HECKE_CEILING,
                      ceiling: int = HECKE_CEILING) -> HeckeTable:
    """Ramanujan tau(n) for n <= N and the normalised rho(n) = tau(n)/n^(11/2).

    Raises
    ------
    UnsupportedWeightError
        If ``k != 12``.
    CapacityError
        If ``N < 1`` or ``N > ceiling``.
    """
    if k != 12:
        raise UnsupportedWeightError(f"weight {k} not supported (only 12)")
    N = int(N)
    if N < 1 or N > ceiling:
        raise CapacityError(f"Hecke table size {N} outside [1, {ceiling}]")
    coeffs = eta24_coefficients(N)
    exact = np.empty(N + 1, dtype=object)
    exact[0] = 0
    exact[1:] = coeffs
    normalized = _normalize(exact, k)
    return HeckeTable(k, N, exact, normalized, np.cumsum(normalized))


def hecke_summatory(table: HeckeTable, x) -> float:
    """A_f(x) = sum of rho(n) over n <= x."""
    if x > table.limit:
        raise CapacityError(f"x={x} beyond Hecke table limit {table.limit}")
    if x < 1:
        return 0.0
    return float(table.prefix_normalized[int(math.floor(x))])


def estimate_cf(table: HeckeTable, X) -> float:
    """Rankin-Selberg estimate sum_{n<=X} rho(n)^2 / X.

    Warns (``RuntimeWarning``) when X < 1e3, where the O(X^(-2/5)) error
    term is not small.
    """
    if X > table.limit:
        raise CapacityError(f"X={X} beyond Hecke table limit {table.limit}")
    if X < 1:
        raise ValueError("X must be >= 1")
    if X < 1e3:
        warnings.warn(f"estimate_cf at X={X} < 1e3 is imprecise", RuntimeWarning, stacklevel=2)
    n = int(math.floor(X))
    rho = table.normalized[1:n + 1]
    return float(np.sum(rho * rho) / X)


# ---------------------------------------------------------------------------
# binary cache

_HEADER = struct.Struct("<4sHHq")


def save_table(table, path) -> None:
    """Write a table as header (magic, version, k, N) followed by raw arrays.

    Divisor tables store ``k = 0`` and the uint16 values; Hecke tables store
    tau(n) as little-endian int128 (two int64 words per entry).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        if isinstance(table, DivisorTable):
            fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, 0, table.limit))
            fh.write(np.ascontiguousarray(table.values, dtype="<u2").tobytes())
        else:
            fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.weight, table.limit))
            words = np.empty((table.limit + 1, 2), dtype="<u8")
            mask = (1 << 64) - 1
            for i, v in enumerate(table.exact):
                u = int(v) & ((1 << 128) - 1)
                words[i, 0] = u & mask
                words[i, 1] = u >> 64
            fh.write(words.tobytes())


def load_table(path):
    """Inverse of :func:`save_table`."""
    with open(path, "rb") as fh:
        magic, version, k, n = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError(f"{path}: not a table cache (magic {magic!r}, version {version})")
        body = fh.read()
    if k == 0:
        values = np.frombuffer(body, dtype="<u2").astype(np.uint16)
        if values.size != n + 1:
            raise ValueError(f"{path}: truncated cache")
        return DivisorTable(n, values, np.cumsum(values, dtype=np.int64))
    words = np.frombuffer(body, dtype="<u8").reshape(-1, 2)
    if words.shape[0] != n + 1:
        raise ValueError(f"{path}: truncated cache")
    exact = np.empty(n + 1, dtype=object)
    for i, (lo, hi) in enumerate(words.tolist()):
        u = lo | (hi << 64)
        exact[i] = u - (1 << 128) if u >> 127 else u
    normalized = _normalize(exact, k)
    return HeckeTable(k, n, exact, normalized, np.cumsum(normalized))


_CACHE_DIR: Path | None = None


def set_cache_dir(path) -> None:
    """Directory used by :func:`divisor_table` / :func:`hecke_table` (None disables)."""
    global _CACHE_DIR
    _CACHE_DIR = None if path is None else Path(path)
    divisor_table.cache_clear()
    hecke_table.cache_clear()


@lru_cache(maxsize=4)
def divisor_table(N: int) -> DivisorTable:
    """Memoised divisor table of size at least N (disk cache when configured)."""
    if _CACHE_DIR is not None:
        f = _CACHE_DIR / f"divisor_{N}.bin"
        if f.exists():
            return load_table(f)
        t = build_divisor_table(N)
        save_table(t, f)
        return t
    return build_divisor_table(N)


@lru_cache(maxsize=2)
def hecke_table(N: int = HECKE_CEILING) -> HeckeTable:
    """Memoised weight-12 table (disk cache when configured)."""
    if _CACHE_DIR is not None:
        f = _CACHE_DIR / f"hecke12_{N}.bin"
        if f.exists():
            return load_table(f)
        t = build_hecke_table(12, N)
        save_table(t, f)
        return t
    return build_hecke_table(12, N)
