"""Low-discrepancy sequences and their randomizations.

Three constructions are provided, all indexed from ``i = 1`` (the point
with index 1 is the origin):

* Halton: coordinate ``j`` is the radical inverse of ``i - 1`` in base ``b_j``.
* Generalized Halton: the digits of ``i - 1`` are multiplied by a factor
  ``f_j`` modulo ``b_j`` before radical inversion (a diagonal scrambling
  matrix).
* Sobol': base-2 digital sequence with Joe--Kuo direction numbers, points
  enumerated in Gray-code order.

Points are built as integers ``X`` with ``m`` base-``b`` digits and then
scaled by ``b**-m``, so digital shifts can be applied exactly in integer
space.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

__all__ = [
    "SequenceSpec",
    "PseudoRandom",
    "PointSet",
    "CranleyPatterson",
    "DigitalShift",
    "Randomizer",
    "first_primes",
    "radical_inverse",
    "scrambled_radical_inverse",
    "generate",
    "cranley_patterson_shift",
    "digital_shift",
    "randomized_replicates",
    "pseudo_random",
    "digits_for_base",
    "format_float",
]

SOBOL_BITS = 52
KINDS = ("halton", "ghalton", "sobol")


def first_primes(k: int) -> list[int]:
    """Return the first ``k`` primes."""
    if k <= 0:
        return []
    limit = max(16, int(k * (math.log(k + 1) + math.log(math.log(k + 2)) + 2)))
    while True:
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(limit**0.5) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        primes = np.flatnonzero(sieve)
        if len(primes) >= k:
            return [int(p) for p in primes[:k]]
        limit *= 2


def digits_for_base(b: int) -> int:
    """Number of base-``b`` digits that fit exactly in a double mantissa."""
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    m = int(52 / math.log2(b))
    while b ** (m + 1) <= 2**52:
        m += 1
    while b**m > 2**52:
        m -= 1
    return m


# --------------------------------------------------------------------------
# Embedded parameter tables
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _direction_table() -> tuple[tuple[int, int, tuple[int, ...]], ...]:
    text = resources.files("qrcopula.data").joinpath("new-joe-kuo-6.1024.txt").read_text()
    rows = [(1, 0, ())]  # first dimension: identity generating matrix
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        vals = [int(x) for x in line.split()]
        s, a = vals[1], vals[2]
        rows.append((s, a, tuple(vals[3 : 3 + s])))
    return tuple(rows)


@lru_cache(maxsize=None)
def _multiplier_table() -> dict[int, int]:
    text = resources.files("qrcopula.data").joinpath("halton_multipliers.txt").read_text()
    table = {}
    for line in text.splitlines():
        if line.startswith("#") or not line.strip():
            continue
        b, f = (int(x) for x in line.split())
        table[b] = f
    return table


def max_sobol_dimension() -> int:
    return len(_direction_table())


@lru_cache(maxsize=None)
def _sobol_direction_integers(dim: int) -> np.ndarray:
    """``(dim, SOBOL_BITS)`` array of direction integers ``v_k = m_k << (B - k)``."""
    table = _direction_table()
    if dim > len(table):
        raise ValueError(f"Sobol' dimension {dim} exceeds the {len(table)} available direction numbers")
    V = np.zeros((dim, SOBOL_BITS), dtype=np.uint64)
    for j in range(dim):
        s, a, m_init = table[j]
        if j == 0:
            m = [1] * SOBOL_BITS
        else:
            m = list(m_init)
            for k in range(s, SOBOL_BITS):
                new = m[k - s] ^ (m[k - s] << s)
                for r in range(1, s):
                    if (a >> (s - 1 - r)) & 1:
                        new ^= m[k - r] << r
                m.append(new)
        for k in range(SOBOL_BITS):
            V[j, k] = m[k] << (SOBOL_BITS - 1 - k)
    return V


# --------------------------------------------------------------------------
# Specs and point sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    """Which low-discrepancy construction to use, and its parameters.

    ``bases`` default to the first ``dimension`` primes; ``scramble_factors``
    (generalized Halton only) default to the embedded multiplier table.
    """

    kind: str
    dimension: int
    bases: tuple[int, ...] | None = None
    scramble_factors: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dimension) < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        if self.kind == "sobol":
            if self.bases is not None or self.scramble_factors is not None:
                raise ValueError("Sobol' sequences take no bases or scramble factors")
            if self.dimension > max_sobol_dimension():
                raise ValueError(
                    f"Sobol' dimension {self.dimension} exceeds the "
                    f"{max_sobol_dimension()} available direction numbers"
                )
            return
        bases = tuple(first_primes(self.dimension)) if self.bases is None else tuple(int(b) for b in self.bases)
        if len(bases) != self.dimension:
            raise ValueError(f"bases has length {len(bases)}, expected {self.dimension}")
        for b in bases:
            if b < 2:
                raise ValueError(f"bases must be >= 2, got {b}")
        for i in range(len(bases)):
            for j in range(i + 1, len(bases)):
                if math.gcd(bases[i], bases[j]) != 1:
                    raise ValueError(f"bases {bases[i]} and {bases[j]} are not relatively prime")
        object.__setattr__(self, "bases", bases)
        if self.kind == "halton":
            if self.scramble_factors is not None:
                raise ValueError("plain Halton takes no scramble factors; use kind='ghalton'")
            return
        if self.scramble_factors is None:
            table = _multiplier_table()
            missing = [b for b in bases if b not in table]
            if missing:
                warnings.warn(
                    f"no scramble factor tabulated for bases {missing}; using factor 1 (plain Halton)",
                    stacklevel=3,
                )
            factors = tuple(table.get(b, 1) for b in bases)
        else:
            factors = tuple(int(f) for f in self.scramble_factors)
        if len(factors) != self.dimension:
            raise ValueError(f"scramble_factors has length {len(factors)}, expected {self.dimension}")
        for b, f in zip(bases, factors):
            if not 1 <= f <= b - 1 or math.gcd(f, b) != 1:
                raise ValueError(f"scramble factor {f} is not a unit modulo base {b}")
        object.__setattr__(self, "scramble_factors", factors)

    @property
    def digit_bases(self) -> tuple[int, ...]:
        """Base used for digit arithmetic in each coordinate."""
        if self.kind == "sobol":
            return (2,) * self.dimension
        return self.bases

    def describe(self) -> str:
        if self.kind == "sobol":
            return f"sobol(k={self.dimension})"
        return f"{self.kind}(k={self.dimension})"


@dataclass(frozen=True)
class PseudoRandom:
    """Marker spec for i.i.d. uniforms from a seeded Philox stream."""

    dimension: int
    seed: int = 0
    kind: str = field(default="pseudo", init=False)

    def describe(self) -> str:
        return f"pseudo(k={self.dimension},seed={self.seed})"


@dataclass(frozen=True)
class CranleyPatterson:
    offset: tuple[float, ...]

    def describe(self) -> str:
        return "cranley_patterson"


@dataclass(frozen=True)
class DigitalShift:
    shift: tuple[float, ...]
    bases: tuple[int, ...]

    def describe(self) -> str:
        return "digital_shift"


@dataclass(frozen=True, eq=False)
class PointSet:
    """An immutable ``n x k`` set of points in ``[0, 1)^k`` with provenance."""

    points: np.ndarray
    spec: SequenceSpec | PseudoRandom | None = None
    start: int = 1
    randomization: CranleyPatterson | DigitalShift | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
        if pts.size and (pts.min() < 0.0 or pts.max() >= 1.0):
            raise ValueError("point coordinates must lie in [0, 1)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def __len__(self):
        return self.n

    def provenance(self) -> str:
        seq = self.spec.describe() if self.spec is not None else "external"
        rnd = self.randomization.describe() if self.randomization is not None else "none"
        return f"sequence={seq} start={self.start} randomization={rnd}"

    def to_csv(self, path, comment: str | None = None) -> None:
        """Write as headerless CSV, one point per row, round-trip exact floats.

        ``comment`` (if given) is written first as a ``#`` line.
        """
        with open(path, "w", newline="\n") as fh:
            if comment is not None:
                fh.write(f"# {comment}\n")
            write_rows(fh, self.points)


def format_float(x: float) -> str:
    """Shortest round-trip decimal representation (at most 17 significant digits)."""
    return np.format_float_positional(float(x), unique=True, trim="-")


def write_rows(fh, rows: np.ndarray) -> None:
    for row in np.atleast_2d(rows):
        fh.write(",".join(format_float(x) for x in row))
        fh.write("\n")


# --------------------------------------------------------------------------
# Scalar radical inverses
# --------------------------------------------------------------------------


def _digits(i: int, b: int) -> list[int]:
    out = []
    while i > 0:
        i, r = divmod(i, b)
        out.append(r)
    return out


def radical_inverse(i: int, b: int) -> float:
    """Van der Corput value of point ``i`` (1-based) in base ``b``."""
    return scrambled_radical_inverse(i, b, 1)


def scrambled_radical_inverse(i: int, b: int, factor: int) -> float:
    """Radical inverse of ``i - 1`` in base ``b`` with digits mapped ``a -> factor * a mod b``."""
    if b < 2:
        raise ValueError(f"base must be >= 2, got {b}")
    if i < 1:
        raise ValueError(f"index must be >= 1, got {i}")
    if not 1 <= factor <= b - 1 or math.gcd(factor, b) != 1:
        raise ValueError(f"factor {factor} is not a unit modulo base {b}")
    digits = _digits(i - 1, b)
    num = 0
    for a in digits:
        num = num * b + (factor * a) % b
    # num holds the reversed digits; exact rational num / b**len
    return num / b ** len(digits) if digits else 0.0


# --------------------------------------------------------------------------
# Vectorized generation (integer representation)
# --------------------------------------------------------------------------


def _halton_column(idx: np.ndarray, b: int, factor: int, m: int) -> np.ndarray:
    """Integer ``X`` with ``m`` base-``b`` digits: x = X / b**m."""
    q = idx.copy()
    X = np.zeros_like(idx)
    scale = b ** (m - 1)
    for _ in range(m):
        if not q.any():
            break
        q, r = np.divmod(q, b)
        X += ((factor * r) % b) * scale
        scale //= b
    return X


def _sobol_columns(idx: np.ndarray, dim: int) -> np.ndarray:
    V = _sobol_direction_integers(dim)
    gray = (idx ^ (idx >> 1)).astype(np.uint64)
    nbits = int(idx.max()).bit_length() if idx.size else 0
    X = np.zeros((idx.size, dim), dtype=np.uint64)
    for k in range(nbits):
        bit = ((gray >> np.uint64(k)) & np.uint64(1)).astype(bool)
        X[bit] ^= V[:, k]
    return X


def _integer_points(spec: SequenceSpec, n: int, start: int):
    """Return ``(X, bases, m)``: integer digit matrix and per-column digit counts."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if start < 1:
        raise ValueError(f"start index must be >= 1, got {start}")
    idx = np.arange(start - 1, start - 1 + n, dtype=np.int64)
    if spec.kind == "sobol":
        if start - 1 + n > 2**SOBOL_BITS:
            raise ValueError("index range exceeds the Sobol' precision")
        X = _sobol_columns(idx, spec.dimension).astype(np.int64)
        return X, (2,) * spec.dimension, (SOBOL_BITS,) * spec.dimension
    factors = spec.scramble_factors if spec.kind == "ghalton" else (1,) * spec.dimension
    ms = tuple(digits_for_base(b) for b in spec.bases)
    X = np.empty((n, spec.dimension), dtype=np.int64)
    for j, (b, f, m) in enumerate(zip(spec.bases, factors, ms)):
        if start - 1 + n > b**m:
            raise ValueError(f"index range exceeds the {m}-digit precision of base {b}")
        X[:, j] = _halton_column(idx, b, f, m)
    return X, spec.bases, ms


def _to_float(X: np.ndarray, bases, ms) -> np.ndarray:
    out = np.empty(X.shape, dtype=float)
    for j, (b, m) in enumerate(zip(bases, ms)):
        out[:, j] = X[:, j] / float(b**m)
    return out


def generate(spec: SequenceSpec, n: int, start: int = 1) -> PointSet:
    """Points ``start, ..., start + n - 1`` of the sequence as a :class:`PointSet`.

    Use ``start=2`` to skip the origin before quantile transforms.
    """
    X, bases, ms = _integer_points(spec, n, start)
    return PointSet(_to_float(X, bases, ms), spec=spec, start=start)


# --------------------------------------------------------------------------
# Randomizations
# --------------------------------------------------------------------------


def cranley_patterson_shift(P: PointSet | np.ndarray, offset) -> PointSet:
    """Shift every point by ``offset`` modulo 1, coordinate-wise."""
    pts = np.asarray(P, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    offset = np.asarray(offset, dtype=float).ravel()
    if offset.shape[0] != pts.shape[1]:
        raise ValueError(f"offset has length {offset.shape[0]}, expected {pts.shape[1]}")
    out = pts + offset
    out -= np.floor(out)
    out[out >= 1.0] = 0.0  # x + u can round up to exactly 1
    spec = P.spec if isinstance(P, PointSet) else None
    start = P.start if isinstance(P, PointSet) else 1
    return PointSet(out, spec=spec, start=start, randomization=CranleyPatterson(tuple(offset)))


def _float_to_digits(x: np.ndarray, b: int, m: int) -> np.ndarray:
    """Integer with ``m`` base-``b`` digits, truncating ``x`` beyond that precision."""
    if b == 2:
        return np.floor(np.ldexp(x, m)).astype(np.int64)
    y = np.asarray(x, dtype=np.longdouble) * np.longdouble(b**m)
    r = np.rint(y)
    # snap float renderings of exact m-digit values; truncate anything else
    X = np.where(np.abs(y - r) <= 0.3, r, np.floor(y))
    return np.minimum(X, b**m - 1).astype(np.int64)


def _digitwise_add(X: np.ndarray, S: np.ndarray, b: int, m: int) -> np.ndarray:
    if b == 2:
        return X ^ S
    out = np.zeros(np.broadcast(X, S).shape, dtype=np.int64)
    x, s = X.copy(), np.broadcast_to(S, out.shape).copy()
    scale = 1
    for _ in range(m):
        x, rx = np.divmod(x, b)
        s, rs = np.divmod(s, b)
        out += ((rx + rs) % b) * scale
        scale *= b
    return out


def digital_shift(P: PointSet | np.ndarray, shift, b, digits: int | Sequence[int] | None = None) -> PointSet:
    """Digit-wise addition modulo ``b`` of ``shift`` to every point.

    ``b`` is a single base or one base per coordinate; ``digits`` defaults
    to :func:`digits_for_base` (52 in base 2). Digits beyond the precision
    are truncated.
    """
    pts = np.asarray(P, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    k = pts.shape[1]
    shift = np.asarray(shift, dtype=float).ravel()
    if shift.shape[0] != k:
        raise ValueError(f"shift has length {shift.shape[0]}, expected {k}")
    bases = (int(b),) * k if np.isscalar(b) else tuple(int(x) for x in b)
    if digits is None:
        ms = tuple(digits_for_base(x) for x in bases)
    else:
        ms = (int(digits),) * k if np.isscalar(digits) else tuple(int(x) for x in digits)
    if any(m <= 0 for m in ms):
        raise ValueError("digit precision must be positive")
    out = np.empty_like(pts)
    for j, (bj, m) in enumerate(zip(bases, ms)):
        X = _float_to_digits(pts[:, j], bj, m)
        S = _float_to_digits(shift[j : j + 1], bj, m)
        out[:, j] = _digitwise_add(X, S, bj, m) / float(bj**m)
    spec = P.spec if isinstance(P, PointSet) else None
    start = P.start if isinstance(P, PointSet) else 1
    return PointSet(out, spec=spec, start=start, randomization=DigitalShift(tuple(shift), bases))


@dataclass(frozen=True)
class Randomizer:
    """Seeded source of RQMC shifts.

    ``kind`` is ``"digital_shift"``, ``"cranley_patterson"`` or ``None``.
    Each replicate draws from its own Philox stream keyed by
    ``(seed, replicate)``, so replicates are independent and reproducible.
    """

    kind: str | None = "digital_shift"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (None, "digital_shift", "cranley_patterson"):
            raise ValueError(f"unknown randomization {self.kind!r}")

    def generator(self, replicate: int, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(*key, int(replicate)))
        return np.random.Generator(np.random.Philox(ss))


def pseudo_random(n: int, k: int, rng: np.random.Generator, seed: int = 0) -> PointSet:
    return PointSet(rng.random((n, k)), spec=PseudoRandom(k, seed))


def _randomize_integers(X, bases, ms, kind, rng):
    """Apply one random shift to integer points; returns floats and the record."""
    k = X.shape[1]
    u = rng.random(k)
    if kind == "digital_shift":
        out = np.empty(X.shape, dtype=float)
        for j, (b, m) in enumerate(zip(bases, ms)):
            S = _float_to_digits(u[j : j + 1], b, m)
            out[:, j] = _digitwise_add(X[:, j], S, b, m) / float(b**m)
        return out, DigitalShift(tuple(u), tuple(bases))
    out = _to_float(X, bases, ms) + u
    out -= np.floor(out)
    out[out >= 1.0] = 0.0
    return out, CranleyPatterson(tuple(u))


def randomized_replicates(
    spec: SequenceSpec | PseudoRandom,
    n: int,
    B: int,
    randomizer: Randomizer | None = None,
    start: int = 1,
    key: tuple[int, ...] = (),
) -> list[PointSet]:
    """``B`` independently randomized copies of the first ``n`` points.

    For :class:`PseudoRandom` each replicate is a fresh i.i.d. uniform
    sample from the replicate's stream. ``key`` adds extra spawn-key
    entries (e.g. the sample size) to the per-replicate streams.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    randomizer = randomizer if randomizer is not None else Randomizer(None, 0)
    if isinstance(spec, PseudoRandom):
        return [
            PointSet(
                randomizer.generator(r, *key).random((n, spec.dimension)),
                spec=PseudoRandom(spec.dimension, randomizer.seed),
            )
            for r in range(B)
        ]
    X, bases, ms = _integer_points(spec, n, start)
    if randomizer.kind is None:
        base = PointSet(_to_float(X, bases, ms), spec=spec, start=start)
        return [base] * B
    out = []
    for r in range(B):
        pts, record = _randomize_integers(X, bases, ms, randomizer.kind, randomizer.generator(r, *key))
        out.append(PointSet(pts, spec=spec, start=start, randomization=record))
    return out
