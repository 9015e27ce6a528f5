"""Signed permutations of l_p^n and their distance from the identity."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._numerics import make_rng
from .errors import DimensionTooLarge
from .mazur import lp_norm

__all__ = [
    "SignedPermutation",
    "MinGap",
    "enumerate_isometries",
    "operator_gap",
    "lp_operator_norm",
    "min_gap",
    "gap_bound",
]

STARTS = 64
STEPS = 500


@dataclass(frozen=True)
class SignedPermutation:
    """Acts by ``(T x)[perm[i]] = signs[i] * x[i]``."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))) or len(signs) != len(perm):
            raise ValueError("perm must be a permutation of 0..n-1 with one sign per entry")
        if any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def matrix(self) -> np.ndarray:
        T = np.zeros((self.n, self.n), dtype=int)
        T[list(self.perm), list(range(self.n))] = self.signs
        return T

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., list(self.perm)] = x * np.asarray(self.signs)
        return out

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """``self`` after ``other``."""
        perm = tuple(self.perm[j] for j in other.perm)
        signs = tuple(self.signs[other.perm[i]] * other.signs[i] for i in range(self.n))
        return SignedPermutation(perm, signs)

    def inverse(self) -> "SignedPermutation":
        perm = [0] * self.n
        signs = [1] * self.n
        for i, (j, s) in enumerate(zip(self.perm, self.signs)):
            perm[j] = i
            signs[j] = s
        return SignedPermutation(tuple(perm), tuple(signs))

    def cycles(self) -> list[tuple[tuple[int, ...], int]]:
        """Cycles of the underlying permutation with the product of their signs."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc, sign, i = [], 1, start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                sign *= self.signs[i]
                i = self.perm[i]
            out.append((tuple(cyc), sign))
        return out

    def cycle_type(self) -> str:
        """E.g. ``"2-,1+"``: cycle lengths with sign products, longest first."""
        parts = sorted(((len(c), s) for c, s in self.cycles()), key=lambda t: (-t[0], -t[1]))
        return ",".join(f"{k}{'+' if s > 0 else '-'}" for k, s in parts)

    def __str__(self) -> str:
        return f"perm={list(self.perm)} signs={list(self.signs)}"


def enumerate_isometries(n: int) -> list[SignedPermutation]:
    """All ``2^n n!`` signed permutations, identity first."""
    if not 1 <= n <= 5:
        raise DimensionTooLarge(f"enumeration supports 1 <= n <= 5, got {n}")
    return [
        SignedPermutation(perm, signs)
        for perm in itertools.permutations(range(n))
        for signs in itertools.product((1, -1), repeat=n)
    ]


def _dual_unit(v: np.ndarray, p: float) -> np.ndarray:
    """Row-wise norming functional of ``v`` in l_p, as a unit vector of l_p'."""
    a = np.abs(v)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    r = a / safe
    w = np.sign(v) * r ** (p - 1)
    q = p / (p - 1)
    norm = np.sum(r**p, axis=-1, keepdims=True) ** (1 / q)
    return w / np.where(m > 0, norm, 1.0)


def lp_operator_norm(A, p: float, seed: int = 0) -> float:
    """``|A|_{p -> p}``: exact for p in {1, 2}, otherwise Boyd's power iteration from many starts."""
    A = np.asarray(A, dtype=float)
    k = A.shape[1]
    if p == 1:
        return float(np.max(np.sum(np.abs(A), axis=0)))
    if p == 2:
        return float(np.linalg.norm(A, 2))
    q = p / (p - 1)
    rng = make_rng(seed)
    eye = np.eye(k)
    alt = np.array([(-1.0) ** i for i in range(k)])
    X = np.vstack([rng.standard_normal((STARTS, k)), eye, -eye, np.ones((1, k)), alt[None]])
    X = X / lp_norm(X, p)[:, None]
    val = lp_norm(X @ A.T, p)
    for _ in range(STEPS):
        Y = X @ A.T
        Z = _dual_unit(Y, p) @ A
        Xn = _dual_unit(Z, q)
        dead = ~np.any(Z != 0, axis=1)
        Xn[dead] = X[dead]
        vn = lp_norm(Xn @ A.T, p)
        X = Xn
        if np.all(np.abs(vn - val) <= 1e-15 * np.maximum(1.0, vn)):
            val = np.maximum(val, vn)
            break
        val = np.maximum(val, vn)
    return float(np.max(val))


@lru_cache(maxsize=None)
def _block_gap(length: int, sign: int, p: float) -> float:
    C = np.zeros((length, length))
    for i in range(length - 1):
        C[i + 1, i] = 1.0
    C[0, length - 1] = sign
    return lp_operator_norm(C - np.eye(length), p)


def operator_gap(T: SignedPermutation, p: float, n: int | None = None) -> float:
    """``|T - I|`` on l_p^n.

    ``T - I`` splits as an l_p direct sum over the cycles of ``T``, and each
    cycle is conjugate by a diagonal sign change to a canonical block that
    depends only on its length and sign product.
    """
    if n is not None and n != T.n:
        raise ValueError("dimension mismatch")
    if not 1 <= p < np.inf:
        raise ValueError("operator_gap needs 1 <= p < inf")
    return max((_block_gap(len(c), s, float(p)) for c, s in T.cycles() if not (len(c) == 1 and s == 1)),
               default=0.0)


def gap_bound(p: float) -> float:
    """``max(2^(1/p), 2^(1/q))`` with ``1/p + 1/q = 1``."""
    q = np.inf if p == 1 else p / (p - 1)
    return float(max(2 ** (1 / p), 2 ** (1 / q)))


@dataclass(frozen=True)
class MinGap:
    value: float
    argmin: SignedPermutation
    bound: float | None
    groupOrder: int

    @property
    def holds(self) -> bool | None:
        return None if self.bound is None else self.value >= self.bound - 1e-6

    def to_dict(self) -> dict:
        return {"value": self.value, "argmin": {"perm": list(self.argmin.perm), "signs": list(self.argmin.signs)},
                "cycleType": self.argmin.cycle_type(), "bound": self.bound,
                "groupOrder": self.groupOrder, "boundHolds": self.holds}


def min_gap(n: int, p: float) -> MinGap:
    """Exhaustive minimum of ``|T - I|`` over non-identity signed permutations of l_p^n.

    At ``p = 2`` the lower bound does not apply and ``bound`` is ``None``.
    """
    if not 1 <= n <= 4:
        raise DimensionTooLarge(f"min_gap supports 1 <= n <= 4, got {n}")
    group = enumerate_isometries(n)
    best, arg = np.inf, None
    for T in group[1:]:
        g = operator_gap(T, p)
        if g < best - 1e-12:
            best, arg = g, T
    return MinGap(float(best), arg, None if p == 2 else gap_bound(p), len(group))
