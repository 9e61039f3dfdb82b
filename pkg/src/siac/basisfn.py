"""Compactly supported piecewise functions with terms c * x^n * {1, cos, sin}.

Every function here is a finite list of breakpoints plus, per interval, a sum
of terms ``c * x^n * trig(q*pi*x)``.  That class is closed under translation,
differentiation, antidifferentiation, and convolution with the unit box
``chi_[-1/2,1/2]``, which is exactly what the recursive construction

    phi^(1)   = seed (box, raised cosine, custom),
    phi^(l+1) = phi^(l) * chi_[-1/2,1/2]   (convolution)

needs.  The box seed produces the central B-splines with exact rational
coefficients; trig seeds carry binary64 coefficients but exact rational
breakpoints and frequencies (stored as multiples of pi).
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

Number = Union[Fraction, float, int]

TRIG_NONE = "none"
TRIG_COS = "cos"
TRIG_SIN = "sin"

_MERGE_TOL = 1e-12  # breakpoints closer than this are fused when convolving


class QuadratureOnlyBasisError(ValueError):
    """Raised when a symbolic operation receives a numeric-only basis."""


def _cospi(t: Number) -> Number:
    """cos(pi*t), exact (+-1, 0) when t is an integer or half-integer Fraction."""
    if isinstance(t, (Fraction, int)):
        t = Fraction(t)
        r = t % 2
        if r.denominator == 1:
            return 1 if r == 0 else -1
        if r.denominator == 2:
            return 0
        return math.cos(math.pi * float(t))
    return math.cos(math.pi * t)


def _sinpi(t: Number) -> Number:
    """sin(pi*t), exact when t is an integer or half-integer Fraction."""
    if isinstance(t, (Fraction, int)):
        t = Fraction(t)
        r = t % 2
        if r.denominator == 1:
            return 0
        if r.denominator == 2:
            return 1 if r == Fraction(1, 2) else -1
        return math.sin(math.pi * float(t))
    return math.sin(math.pi * t)


def _binom(n: int, i: int) -> int:
    return math.comb(n, i)


@dataclass(frozen=True)
class Term:
    """One summand c * x^degree * trig(freq*pi*x); freq is a multiple of pi."""

    degree: int
    trig: str = TRIG_NONE
    freq: Fraction = Fraction(0)
    coeff: Number = Fraction(1)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("term degree must be non-negative")
        if self.trig not in (TRIG_NONE, TRIG_COS, TRIG_SIN):
            raise ValueError(f"unknown trig part {self.trig!r}")
        if self.trig == TRIG_NONE and self.freq != 0:
            raise ValueError("polynomial terms carry no frequency")

    def value(self, x: Number) -> Number:
        v = self.coeff * x**self.degree
        if self.trig == TRIG_COS:
            v = v * _cospi(self.freq * x if isinstance(x, (Fraction, int)) else float(self.freq) * x)
        elif self.trig == TRIG_SIN:
            v = v * _sinpi(self.freq * x if isinstance(x, (Fraction, int)) else float(self.freq) * x)
        return v


def _merge_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    acc: dict[tuple[int, str, Fraction], Number] = {}
    for t in terms:
        key = (t.degree, t.trig, t.freq if t.trig != TRIG_NONE else Fraction(0))
        acc[key] = acc.get(key, 0) + t.coeff
    out = [
        Term(d, trig, f, c)
        for (d, trig, f), c in sorted(acc.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0]))
        if c != 0
    ]
    return tuple(out)


def _shift_arg(terms: Iterable[Term], delta: Number) -> list[Term]:
    """Terms of x -> f(x + delta) given the terms of f."""
    out: list[Term] = []
    for t in terms:
        # (x + delta)^n expansion
        poly = [(_binom(t.degree, i) * delta ** (t.degree - i), i) for i in range(t.degree + 1)]
        if t.trig == TRIG_NONE:
            for c, i in poly:
                out.append(Term(i, TRIG_NONE, Fraction(0), t.coeff * c))
            continue
        cw = _cospi(t.freq * delta if isinstance(delta, (Fraction, int)) else float(t.freq) * delta)
        sw = _sinpi(t.freq * delta if isinstance(delta, (Fraction, int)) else float(t.freq) * delta)
        # cos(w(x+d)) = cos(wx)cos(wd) - sin(wx)sin(wd); sin likewise
        for c, i in poly:
            base = t.coeff * c
            if t.trig == TRIG_COS:
                if cw != 0:
                    out.append(Term(i, TRIG_COS, t.freq, base * cw))
                if sw != 0:
                    out.append(Term(i, TRIG_SIN, t.freq, -base * sw))
            else:
                if cw != 0:
                    out.append(Term(i, TRIG_SIN, t.freq, base * cw))
                if sw != 0:
                    out.append(Term(i, TRIG_COS, t.freq, base * sw))
    return out


def _antiderivative_terms(terms: Iterable[Term]) -> list[Term]:
    out: list[Term] = []
    for t in terms:
        if t.trig == TRIG_NONE:
            out.append(Term(t.degree + 1, TRIG_NONE, Fraction(0), t.coeff * Fraction(1, t.degree + 1)))
            continue
        # integral of x^m trig(wx) by repeated parts; w = freq*pi forces floats
        w = float(t.freq) * math.pi
        m, c, kind = t.degree, float(t.coeff), t.trig
        while True:
            if kind == TRIG_COS:
                out.append(Term(m, TRIG_SIN, t.freq, c / w))
                if m == 0:
                    break
                c, kind, m = -c * m / w, TRIG_SIN, m - 1
            else:
                out.append(Term(m, TRIG_COS, t.freq, -c / w))
                if m == 0:
                    break
                c, kind, m = c * m / w, TRIG_COS, m - 1
    return out


def _derivative_terms(terms: Iterable[Term]) -> list[Term]:
    out: list[Term] = []
    for t in terms:
        if t.degree > 0:
            out.append(Term(t.degree - 1, t.trig, t.freq, t.coeff * t.degree))
        if t.trig == TRIG_COS:
            out.append(Term(t.degree, TRIG_SIN, t.freq, -float(t.coeff) * float(t.freq) * math.pi))
        elif t.trig == TRIG_SIN:
            out.append(Term(t.degree, TRIG_COS, t.freq, float(t.coeff) * float(t.freq) * math.pi))
    return out


def _eval_terms(terms: Sequence[Term], x: Number) -> Number:
    total: Number = 0
    for t in terms:
        total = total + t.value(x)
    return total


class PiecewiseFunction:
    """Immutable piecewise trig-polynomial with compact support."""

    __slots__ = ("breakpoints", "pieces", "_moment_cache")

    def __init__(self, breakpoints: Sequence[Number], pieces: Sequence[Iterable[Term]]):
        bps = tuple(Fraction(b) for b in breakpoints)
        if len(bps) < 2:
            raise ValueError("need at least two breakpoints")
        if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != len(bps) - 1:
            raise ValueError("need exactly one piece per interval")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", tuple(_merge_terms(p) for p in pieces))
        object.__setattr__(self, "_moment_cache", {})

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("PiecewiseFunction is immutable")

    # -- basic queries ---------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def support_exact(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def width(self) -> Fraction:
        return self.breakpoints[-1] - self.breakpoints[0]

    @property
    def is_polynomial(self) -> bool:
        return all(t.trig == TRIG_NONE for p in self.pieces for t in p)

    @property
    def is_rational(self) -> bool:
        return self.is_polynomial and all(
            isinstance(t.coeff, (Fraction, int)) for p in self.pieces for t in p
        )

    @property
    def degree(self) -> int:
        return max((t.degree for p in self.pieces for t in p), default=0)

    def _piece_index(self, x: float) -> int:
        """Right piece at interior breakpoints, left piece at the far end."""
        bps = self.breakpoints
        if x < bps[0] or x > bps[-1]:
            return -1
        i = bisect_right(bps, x) - 1
        return min(i, len(self.pieces) - 1)

    # -- evaluation ------------------------------------------------------

    def __call__(self, x):
        if np.ndim(x) > 0:
            return self.evaluate_many(np.asarray(x, dtype=float))
        return self.evaluate(float(x))

    def evaluate(self, x: float) -> float:
        i = self._piece_index(x)
        if i < 0:
            return 0.0
        return float(_eval_terms(self.pieces[i], x))

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        bps = np.array([float(b) for b in self.breakpoints])
        idx = np.searchsorted(bps, xs, side="right") - 1
        idx = np.minimum(idx, len(self.pieces) - 1)
        inside = (xs >= bps[0]) & (xs <= bps[-1])
        for i, terms in enumerate(self.pieces):
            m = inside & (idx == i)
            if not m.any():
                continue
            xm = xs[m]
            acc = np.zeros_like(xm)
            for t in terms:
                v = float(t.coeff) * xm**t.degree
                if t.trig == TRIG_COS:
                    v = v * np.cos(float(t.freq) * math.pi * xm)
                elif t.trig == TRIG_SIN:
                    v = v * np.sin(float(t.freq) * math.pi * xm)
                acc += v
            out[m] = acc
        return out

    def evaluate_exact(self, x: Number) -> Fraction:
        """Exact rational evaluation; only for the rational (B-spline) family."""
        if not self.is_rational:
            raise QuadratureOnlyBasisError("exact evaluation needs rational polynomial pieces")
        x = Fraction(x)
        i = self._piece_index(x)
        if i < 0:
            return Fraction(0)
        return Fraction(_eval_terms(self.pieces[i], x))

    def limit(self, x: float, side: str) -> float:
        """One-sided limit at x ('left' or 'right'); zero outside support."""
        bps = self.breakpoints
        if side == "right":
            if x < bps[0] or x >= bps[-1]:
                return 0.0
            i = bisect_right(bps, x) - 1
        elif side == "left":
            if x <= bps[0] or x > bps[-1]:
                return 0.0
            i = bisect_right(bps, x) - 1
            if i >= len(self.pieces) or bps[i] == x:
                i -= 1
        else:
            raise ValueError("side must be 'left' or 'right'")
        return float(_eval_terms(self.pieces[i], x))

    # -- calculus --------------------------------------------------------

    def derivative(self) -> "PiecewiseFunction":
        return PiecewiseFunction(self.breakpoints, [_derivative_terms(p) for p in self.pieces])

    def translate(self, s: Number) -> "PiecewiseFunction":
        """g(x) = f(x - s)."""
        s = Fraction(s)
        return PiecewiseFunction(
            [b + s for b in self.breakpoints],
            [_shift_arg(p, -s) for p in self.pieces],
        )

    def raw_moment(self, j: int) -> Number:
        """integral of x^j f(x) dx over the support; exact on the rational family."""
        if j < 0:
            raise ValueError("moment order must be non-negative")
        cache = self._moment_cache
        if j in cache:
            return cache[j]
        total: Number = 0
        for (a, b), terms in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            for t in terms:
                total = total + _definite_integral(t, j, a, b)
        cache[j] = total
        return total

    def integral(self) -> Number:
        return self.raw_moment(0)

    def moment(self, j: int, shift: Number = 0) -> Number:
        """integral of f(xi - shift) * xi^j d(xi)  =  sum_i C(j,i) shift^(j-i) m_i."""
        if shift == 0:
            return self.raw_moment(j)
        if not isinstance(shift, (Fraction, int)):
            shift = Fraction(shift)
        total: Number = 0
        for i in range(j + 1):
            total = total + _binom(j, i) * shift ** (j - i) * self.raw_moment(i)
        return total

    def convolve_with_box(self) -> "PiecewiseFunction":
        """Exact convolution with chi_[-1/2,1/2]; widens support by 1/2 each side."""
        half = Fraction(1, 2)
        bps = self.breakpoints
        # cumulative antiderivative F with F(bps[0]) = 0
        anti = [_antiderivative_terms(p) for p in self.pieces]
        consts: list[Number] = []
        c: Number = 0
        for i, (a, b) in enumerate(zip(bps, bps[1:])):
            consts.append(c - _eval_terms(anti[i], a))
            c = c + _eval_terms(anti[i], b) - _eval_terms(anti[i], a)
        total = c

        new_bps: list[Fraction] = []
        for b in sorted({b - half for b in bps} | {b + half for b in bps}):
            if new_bps and float(b - new_bps[-1]) < _MERGE_TOL:
                continue
            new_bps.append(b)

        def f_upper_terms(xm: Fraction, delta: Fraction) -> list[Term]:
            """Terms of x -> F(x + delta) on the new piece containing xm."""
            arg = xm + delta
            if arg <= bps[0]:
                return []
            if arg >= bps[-1]:
                return [Term(0, TRIG_NONE, Fraction(0), total)]
            i = bisect_right(bps, arg) - 1
            i = min(i, len(anti) - 1)
            return _shift_arg(anti[i], delta) + [Term(0, TRIG_NONE, Fraction(0), consts[i])]

        pieces: list[list[Term]] = []
        for u, v in zip(new_bps, new_bps[1:]):
            xm = (u + v) / 2
            terms = f_upper_terms(xm, half)
            terms += [
                Term(t.degree, t.trig, t.freq, -t.coeff) for t in f_upper_terms(xm, -half)
            ]
            pieces.append(terms)
        return PiecewiseFunction(new_bps, pieces)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        def num(v: Number) -> str:
            if isinstance(v, (Fraction, int)):
                return str(Fraction(v))
            return float(v).hex()

        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "pieces": [
                [[t.degree, t.trig, str(t.freq), num(t.coeff)] for t in piece]
                for piece in self.pieces
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseFunction":
        def num(s: str) -> Number:
            try:
                return Fraction(s)
            except ValueError:
                return float.fromhex(s)

        return cls(
            [Fraction(b) for b in d["breakpoints"]],
            [
                [Term(int(deg), trig, Fraction(freq), num(c)) for deg, trig, freq, c in piece]
                for piece in d["pieces"]
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "PiecewiseFunction":
        return cls.from_dict(json.loads(s))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseFunction):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.pieces == other.pieces

    def __hash__(self):
        return hash((self.breakpoints, self.pieces))

    def __repr__(self) -> str:
        return f"PiecewiseFunction({len(self.pieces)} pieces on [{self.support[0]}, {self.support[1]}])"


def _definite_integral(t: Term, extra_degree: int, a: Fraction, b: Fraction) -> Number:
    """integral over [a, b] of x^extra_degree * term."""
    m = t.degree + extra_degree
    if t.trig == TRIG_NONE:
        return t.coeff * (b ** (m + 1) - a ** (m + 1)) * Fraction(1, m + 1)
    w = float(t.freq) * math.pi
    fa, fb = float(a), float(b)
    sa, sb = math.sin(w * fa), math.sin(w * fb)
    ca, cb = math.cos(w * fa), math.cos(w * fb)
    # iterate I_cos(i), I_sin(i) = integrals of x^i cos(wx), x^i sin(wx)
    ic = (sb - sa) / w
    is_ = (ca - cb) / w
    pa, pb = 1.0, 1.0  # a^i, b^i
    for i in range(1, m + 1):
        pa *= fa
        pb *= fb
        ic, is_ = (
            (pb * sb - pa * sa) / w - i * is_ / w,
            -(pb * cb - pa * ca) / w + i * ic / w,
        )
    return float(t.coeff) * (ic if t.trig == TRIG_COS else is_)


# -- basis families -------------------------------------------------------

BASIS_KINDS = ("box", "raised_cosine", "bump")


def box() -> PiecewiseFunction:
    """Characteristic function of [-1/2, 1/2]."""
    h = Fraction(1, 2)
    return PiecewiseFunction([-h, h], [[Term(0)]])


def raised_cosine_seed() -> PiecewiseFunction:
    """(1 + cos(2 pi x)) / 2 on [-1/2, 1/2]."""
    h = Fraction(1, 2)
    return PiecewiseFunction(
        [-h, h],
        [[Term(0, TRIG_NONE, Fraction(0), Fraction(1, 2)), Term(0, TRIG_COS, Fraction(2), Fraction(1, 2))]],
    )


def convolve_with_box(f: PiecewiseFunction) -> PiecewiseFunction:
    if not isinstance(f, PiecewiseFunction):
        raise QuadratureOnlyBasisError(
            "symbolic box convolution needs a closed-form PiecewiseFunction"
        )
    return f.convolve_with_box()


def basis(kind, order: int) -> PiecewiseFunction:
    """phi^(order): the seed convolved with the unit box order-1 times.

    kind is 'box', 'raised_cosine', or a custom PiecewiseFunction seed.  The
    numeric-only 'bump' family is built by the filter layer, not here.
    """
    if order < 1:
        raise ValueError(f"basis order must be >= 1, got {order}")
    if isinstance(kind, PiecewiseFunction):
        f = kind
    elif kind == "box":
        f = box()
    elif kind == "raised_cosine":
        f = raised_cosine_seed()
    elif kind == "bump":
        raise QuadratureOnlyBasisError(
            "the bump seed has no closed form; use the numeric basis in filtercore"
        )
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    if f.integral() == 0:
        raise ValueError("seed must have nonzero integral")
    for _ in range(order - 1):
        f = f.convolve_with_box()
    return f
