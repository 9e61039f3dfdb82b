"""Convolution filter kernels built from shifted basis functions.

A kernel is sum_g c_g * phi^(k+1)(x - x_g) over 2k+1 node positions x_g.  The
coefficients are the unique solution of the polynomial-reproduction system:
convolving the kernel with any polynomial of degree <= 2k must return that
polynomial.  Node layouts: 'standard' (x_g = -k+g, support 3k+1) and 'compact'
(x_g = eps*(-k+g), support (2*eps+1)*k+1), both optionally shifted for
boundary use.

Two independent solve paths are kept deliberately: exact rational elimination
for the polynomial (B-spline) family, and extended-precision pivoted
elimination (mpmath) for everything else.  Compressed node layouts make the
moment matrix ill-conditioned, so binary64 solves are not trusted anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath as mp
import numpy as np
from numpy.polynomial import chebyshev as _cheb

from . import basisfn
from .basisfn import PiecewiseFunction, QuadratureOnlyBasisError, Term
from .quadrature import gauss_rule

SOLVER_DPS = 45          # working digits for the extended-precision solve
COND_LIMIT = 1e30        # beyond this the extended solve cannot be trusted

NODE_KINDS = ("standard", "compact", "custom")


class FilterConditioningError(RuntimeError):
    """Moment system too ill-conditioned for the extended-precision solve."""


class DomainTooShortError(ValueError):
    """The scaled kernel support cannot fit inside the domain at all."""


# ---------------------------------------------------------------------------
# node distributions


@dataclass(frozen=True)
class NodeDistribution:
    k: int
    kind: str
    epsilon: Optional[Fraction]
    shift: Fraction
    positions: tuple[Fraction, ...]

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def spread(self) -> Fraction:
        return self.positions[-1] - self.positions[0]


def default_epsilon(k: int) -> Fraction:
    """Compression parameter used when none is given: 1/(2k)."""
    return Fraction(1, 2 * k)


def make_nodes(
    k: int,
    kind: str = "standard",
    epsilon: Union[Fraction, float, None] = None,
    shift: Union[Fraction, float] = 0,
    custom: Optional[Sequence[Union[Fraction, float]]] = None,
) -> NodeDistribution:
    """2k+1 node positions for the requested layout, uniformly shifted."""
    if k < 1:
        raise ValueError(f"polynomial degree k must be >= 1, got {k}")
    if kind not in NODE_KINDS:
        raise ValueError(f"unknown node kind {kind!r}; expected one of {NODE_KINDS}")
    shift = Fraction(shift)
    if kind == "standard":
        base = [Fraction(-k + g) for g in range(2 * k + 1)]
        eps = None
    elif kind == "compact":
        eps = default_epsilon(k) if epsilon is None else Fraction(epsilon)
        if not 0 < eps <= 1:
            raise ValueError(f"compression parameter must satisfy 0 < eps <= 1, got {float(eps)}")
        base = [eps * (-k + g) for g in range(2 * k + 1)]
    else:
        if custom is None:
            raise ValueError("custom node kind needs an explicit position list")
        base = [Fraction(c) for c in custom]
        if len(base) != 2 * k + 1:
            raise ValueError(f"need exactly {2 * k + 1} custom nodes, got {len(base)}")
        if any(a >= b for a, b in zip(base, base[1:])):
            raise ValueError("custom nodes must be strictly increasing")
        eps = None
    return NodeDistribution(k, kind, eps, shift, tuple(b + shift for b in base))


# ---------------------------------------------------------------------------
# moment systems

# The reproduction requirement "kernel * p = p for all polynomials p of degree
# <= 2k" is equivalent to the raw-moment conditions
#     sum_g c_g * integral(phi(s - x_g) s^j ds) = delta_j0,   j = 0..2k.
# Assembling instead about the node mean cbar (rows of (s - cbar)^j moments)
# is a triangular recombination of the same conditions with right-hand side
# (-cbar)^j; it keeps the shifted and compact systems far better conditioned
# than raw monomials do.


def _mpf(v) -> mp.mpf:
    if isinstance(v, Fraction):
        return mp.mpf(v.numerator) / mp.mpf(v.denominator)
    return mp.mpf(v)


def _definite_integral_mp(t: Term, extra_degree: int, a: Fraction, b: Fraction):
    m = t.degree + extra_degree
    if t.trig == basisfn.TRIG_NONE:
        av, bv = _mpf(a), _mpf(b)
        return _mpf(t.coeff) * (bv ** (m + 1) - av ** (m + 1)) / (m + 1)
    w = _mpf(t.freq) * mp.pi
    av, bv = _mpf(a), _mpf(b)
    sa, sb = mp.sin(w * av), mp.sin(w * bv)
    ca, cb = mp.cos(w * av), mp.cos(w * bv)
    ic = (sb - sa) / w
    is_ = (ca - cb) / w
    pa, pb = mp.mpf(1), mp.mpf(1)
    for i in range(1, m + 1):
        pa *= av
        pb *= bv
        ic, is_ = (
            (pb * sb - pa * sa) / w - i * is_ / w,
            -(pb * cb - pa * ca) / w + i * ic / w,
        )
    return _mpf(t.coeff) * (ic if t.trig == basisfn.TRIG_COS else is_)


def _raw_moment_mp(basis, j: int):
    """j-th raw moment of the basis at the active mpmath precision."""
    if isinstance(basis, PiecewiseFunction):
        cache = basis._moment_cache
        key = ("mp", mp.mp.dps, j)
        if key not in cache:
            total = mp.mpf(0)
            for (a, b), terms in zip(
                zip(basis.breakpoints, basis.breakpoints[1:]), basis.pieces
            ):
                for t in terms:
                    total += _definite_integral_mp(t, j, a, b)
            cache[key] = total
        return cache[key]
    # numeric bases carry binary64 moments; convert exactly
    return mp.mpf(float(basis.raw_moment(j)))


def _shifted_moment_mp(basis, j: int, shift) -> mp.mpf:
    s = _mpf(shift)
    total = mp.mpf(0)
    for i in range(j + 1):
        total += math.comb(j, i) * s ** (j - i) * _raw_moment_mp(basis, i)
    return total


def moment_matrix(basis, nodes: NodeDistribution, center=None):
    """Rows j = 0..2k of shifted-basis moments about the node mean.

    Entry (j, g) is the j-th moment of phi(. - x_g) about `center`; solving
    against the right-hand side (-center)^j yields the reproduction
    coefficients.
    """
    if basis.integral() == 0:
        raise ValueError("basis must have nonzero integral")
    if center is None:
        center = sum(nodes.positions, Fraction(0)) / len(nodes.positions)
    n = nodes.count
    rows = []
    for j in range(n):
        rows.append([basis.moment(j, shift=x - center) for x in nodes.positions])
    return rows, center


def moment_matrix_float(basis, nodes: NodeDistribution, center=None) -> np.ndarray:
    rows, _ = moment_matrix(basis, nodes, center)
    return np.array([[float(v) for v in row] for row in rows], dtype=float)


def solve_coefficients_exact(basis, nodes: NodeDistribution) -> tuple[Fraction, ...]:
    """Exact rational elimination; only for the rational (B-spline) family."""
    if not getattr(basis, "is_rational", False):
        raise QuadratureOnlyBasisError("exact solve needs a rational polynomial basis")
    rows, center = moment_matrix(basis, nodes)
    n = len(rows)
    a = [[Fraction(v) for v in row] + [(-Fraction(center)) ** j] for j, row in enumerate(rows)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise FilterConditioningError("moment system is exactly singular")
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f == 0:
                continue
            for c in range(col, n + 1):
                a[r][c] -= f * a[col][c]
    sol = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n] - sum(a[r][c] * sol[c] for c in range(r + 1, n))
        sol[r] = s / a[r][r]
    return tuple(sol)


def condition_estimate(basis, nodes: NodeDistribution) -> float:
    """1-norm condition estimate of the moment system in binary64."""
    a = moment_matrix_float(basis, nodes)
    try:
        return float(np.linalg.cond(a, 1))
    except np.linalg.LinAlgError:
        return math.inf


def solve_coefficients_mp(
    basis, nodes: NodeDistribution, dps: int = SOLVER_DPS, full: bool = False
):
    """Pivoted elimination carried at `dps` significant digits."""
    cond = condition_estimate(basis, nodes)
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise FilterConditioningError(
            f"moment system beyond the extended-precision solve: "
            f"estimated condition number {cond:.3e} exceeds {COND_LIMIT:.1e}"
        )
    with mp.workdps(dps):
        center = sum(nodes.positions, Fraction(0)) / len(nodes.positions)
        n = nodes.count
        a = [
            [_shifted_moment_mp(basis, j, x - center) for x in nodes.positions]
            + [(-_mpf(center)) ** j]
            for j in range(n)
        ]
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if a[piv][col] == 0:
                raise FilterConditioningError("moment system is numerically singular")
            a[col], a[piv] = a[piv], a[col]
            for r in range(col + 1, n):
                f = a[r][col] / a[col][col]
                for c in range(col, n + 1):
                    a[r][c] -= f * a[col][c]
        sol = [mp.mpf(0)] * n
        for r in range(n - 1, -1, -1):
            s = a[r][n] - mp.fsum(a[r][c] * sol[c] for c in range(r + 1, n))
            sol[r] = s / a[r][r]
        floats = np.array([float(v) for v in sol], dtype=float)
        return (floats, tuple(sol)) if full else floats


def solve_coefficients(basis, nodes: NodeDistribution):
    """Reproduction coefficients: floats plus the higher-precision original.

    Returns (float64 vector, exact Fractions or mpf tuple).  The second item
    preserves the solve precision for invariant checks that would otherwise
    drown in binary64 representation noise of large compact coefficients.
    """
    if getattr(basis, "is_rational", False):
        exact = solve_coefficients_exact(basis, nodes)
        floats = np.array([float(c) for c in exact], dtype=float)
        if not np.all(np.isfinite(floats)):
            raise FilterConditioningError(
                f"exact coefficients overflow binary64 (max |c| ~ 1e{max(len(str(abs(c.numerator))) - len(str(c.denominator)) for c in exact)}); "
                f"estimated condition number {condition_estimate(basis, nodes):.3e}"
            )
        return floats, exact
    return solve_coefficients_mp(basis, nodes, full=True)


# ---------------------------------------------------------------------------
# numeric basis (no closed form): piecewise Chebyshev representation


def bump_seed_callable(x):
    """exp(-1/(1-4x^2)) on (-1/2, 1/2), zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 0.5
    xm = x[m]
    out[m] = np.exp(-1.0 / (1.0 - 4.0 * xm**2))
    return out


class NumericBasis:
    """Piecewise-Chebyshev basis for seeds without a closed trig-poly form.

    The box-convolution recursion is realized exactly in this representation:
    the antiderivative of a Chebyshev series is again a Chebyshev series, so
    phi^(l+1)(x) = F(x+1/2) - F(x-1/2) is a polynomial on each new piece and
    is re-interpolated without additional approximation error.  Only the
    initial fit of the seed is approximate (~1e-15 relative).
    """

    kind = "bump"
    is_rational = False
    is_polynomial = False
    quadrature_only = True

    def __init__(self, breakpoints: Sequence[float], coeffs: Sequence[np.ndarray], order: int):
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self.pieces = [np.asarray(c, dtype=float) for c in coeffs]
        self.order = order
        self._moment_cache: dict[int, float] = {}

    # construction ---------------------------------------------------------

    @classmethod
    def bump(cls, order: int, seed_degree: int = 220) -> "NumericBasis":
        if order < 1:
            raise ValueError(f"basis order must be >= 1, got {order}")
        c = _cheb.chebinterpolate(lambda t: bump_seed_callable(t / 2.0), seed_degree)
        f = cls([-0.5, 0.5], [c], 1)
        for _ in range(order - 1):
            f = f.convolve_with_box()
        return f

    def convolve_with_box(self) -> "NumericBasis":
        bps = self.breakpoints
        anti = []
        consts = []
        c0 = 0.0
        for (a, b), coeff in zip(zip(bps, bps[1:]), self.pieces):
            ci = _cheb.chebint(coeff, lbnd=-1) * (b - a) / 2.0
            anti.append(ci)
            consts.append(c0)
            c0 += _cheb.chebval(1.0, ci)
        total = c0

        def f_anti(x: float) -> float:
            if x <= bps[0]:
                return 0.0
            if x >= bps[-1]:
                return total
            i = np.searchsorted(bps, x, side="right") - 1
            i = min(i, len(anti) - 1)
            a, b = bps[i], bps[i + 1]
            return float(_cheb.chebval(2.0 * (x - a) / (b - a) - 1.0, anti[i])) + consts[i]

        new_bps = sorted({round(b - 0.5, 12) for b in bps} | {round(b + 0.5, 12) for b in bps})
        merged = [new_bps[0]]
        for b in new_bps[1:]:
            if b - merged[-1] > 1e-12:
                merged.append(b)
        deg = max(len(c) for c in self.pieces) + 1
        pieces = []
        for a, b in zip(merged, merged[1:]):
            def g(t, a=a, b=b):
                x = a + (np.asarray(t) + 1.0) * (b - a) / 2.0
                return np.array([f_anti(xi + 0.5) - f_anti(xi - 0.5) for xi in np.atleast_1d(x)])
            pieces.append(_cheb.chebinterpolate(g, deg))
        return NumericBasis(merged, pieces, self.order + 1)

    # queries ----------------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def width(self) -> float:
        return self.breakpoints[-1] - self.breakpoints[0]

    def __call__(self, x):
        if np.ndim(x) > 0:
            return self.evaluate_many(np.asarray(x, dtype=float))
        return self.evaluate(float(x))

    def evaluate(self, x: float) -> float:
        return float(self.evaluate_many(np.array([x]))[0])

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros_like(xs)
        bps = np.asarray(self.breakpoints)
        idx = np.searchsorted(bps, xs, side="right") - 1
        idx = np.minimum(idx, len(self.pieces) - 1)
        inside = (xs >= bps[0]) & (xs <= bps[-1])
        for i, coeff in enumerate(self.pieces):
            m = inside & (idx == i)
            if not m.any():
                continue
            a, b = bps[i], bps[i + 1]
            out[m] = _cheb.chebval(2.0 * (xs[m] - a) / (b - a) - 1.0, coeff)
        return out

    def limit(self, x: float, side: str) -> float:
        eps = 1e-13
        return self.evaluate(x + eps if side == "right" else x - eps)

    def raw_moment(self, j: int) -> float:
        if j in self._moment_cache:
            return self._moment_cache[j]
        total = 0.0
        for (a, b), coeff in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            npts = (len(coeff) + j) // 2 + 2
            r, w = gauss_rule(npts)
            x = a + (r + 1.0) * (b - a) / 2.0
            total += float(np.dot(w, x**j * _cheb.chebval(r, coeff))) * (b - a) / 2.0
        self._moment_cache[j] = total
        return total

    def integral(self) -> float:
        return self.raw_moment(0)

    def moment(self, j: int, shift=0) -> float:
        s = float(shift)
        return sum(math.comb(j, i) * s ** (j - i) * self.raw_moment(i) for i in range(j + 1))

    # serialization ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "order": self.order,
            "breakpoints": [float(b).hex() for b in self.breakpoints],
            "pieces": [[float(v).hex() for v in c] for c in self.pieces],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NumericBasis":
        return cls(
            [float.fromhex(b) for b in d["breakpoints"]],
            [np.array([float.fromhex(v) for v in c]) for c in d["pieces"]],
            int(d["order"]),
        )


# ---------------------------------------------------------------------------
# filter kernels


@dataclass(frozen=True)
class FilterConfig:
    """Declarative description of one filter kernel."""

    k: int
    basis: Union[str, PiecewiseFunction] = "box"
    nodes: str = "standard"
    epsilon: Union[Fraction, float, None] = None
    shift: Union[Fraction, float] = 0
    scaling: float = 1.0
    custom_nodes: Optional[tuple] = None


from functools import lru_cache


@lru_cache(maxsize=8)
def bump_basis(order: int) -> NumericBasis:
    """Shared numeric bump basis; construction costs a Chebyshev fit cascade."""
    return NumericBasis.bump(order)


def resolve_basis(kind, order: int):
    """Basis function phi^(order) for a config basis spec."""
    if isinstance(kind, (PiecewiseFunction, NumericBasis)):
        if isinstance(kind, NumericBasis):
            return kind
        return basisfn.basis(kind, order)
    if kind == "bump":
        return bump_basis(order)
    return basisfn.basis(kind, order)


@dataclass(frozen=True)
class FilterKernel:
    """Evaluable scaled kernel: (1/H) sum_g c_g phi((x/H) - x_g).

    coefficients_exact keeps the solve-precision values: Fractions on the
    rational path, mpf on the extended-precision path, None for imports
    that carried only binary64.
    """

    k: int
    basis: object
    basis_kind: str
    nodes: NodeDistribution
    coefficients: np.ndarray
    coefficients_exact: Optional[tuple]
    scaling: float = 1.0

    def __post_init__(self):
        self.coefficients.setflags(write=False)

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.basis.support
        return (
            self.scaling * (float(self.nodes.positions[0]) + lo),
            self.scaling * (float(self.nodes.positions[-1]) + hi),
        )

    @property
    def support_unscaled(self) -> tuple[float, float]:
        lo, hi = self.basis.support
        return float(self.nodes.positions[0]) + lo, float(self.nodes.positions[-1]) + hi

    @property
    def support_width(self) -> float:
        lo, hi = self.support_unscaled
        return hi - lo

    @property
    def support_width_exact(self) -> Fraction:
        if isinstance(self.basis, PiecewiseFunction):
            return self.nodes.spread + self.basis.width
        return Fraction(self.support_width)

    @property
    def has_trig(self) -> bool:
        if isinstance(self.basis, PiecewiseFunction):
            return not self.basis.is_polynomial
        return True  # numeric pieces are treated like transcendental ones

    @property
    def poly_degree(self) -> Optional[int]:
        if isinstance(self.basis, PiecewiseFunction) and self.basis.is_polynomial:
            return self.basis.degree
        return None

    def breakpoints_unscaled(self) -> list[float]:
        """Sorted kernel breakpoints in kernel coordinates (scaling 1)."""
        pts: set = set()
        if isinstance(self.basis, PiecewiseFunction):
            for x in self.nodes.positions:
                for b in self.basis.breakpoints:
                    pts.add(x + b)
            out = sorted(pts)
            merged = [out[0]]
            for p in out[1:]:
                if float(p - merged[-1]) > 1e-12:
                    merged.append(p)
            return [float(p) for p in merged]
        for x in self.nodes.positions:
            for b in self.basis.breakpoints:
                pts.add(float(x) + b)
        out = sorted(pts)
        merged = [out[0]]
        for p in out[1:]:
            if p - merged[-1] > 1e-12:
                merged.append(p)
        return merged

    def with_scaling(self, scaling: float) -> "FilterKernel":
        return replace(self, scaling=float(scaling))

    def evaluate_unscaled(self, x) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        acc = np.zeros_like(xs)
        for c, xg in zip(self.coefficients, self.nodes.positions):
            acc += c * self.basis.evaluate_many(xs - float(xg))
        return acc if np.ndim(x) > 0 else float(acc[0])

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        h = self.scaling
        if np.ndim(x) > 0:
            return self.evaluate_unscaled(np.asarray(x, dtype=float) / h) / h
        return self.evaluate_unscaled(float(x) / h) / h

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        if isinstance(self.basis, NumericBasis):
            basis_field = self.basis.to_dict()
        elif self.basis_kind in ("box", "raised_cosine"):
            basis_field = {"kind": self.basis_kind, "order": self.k + 1}
        else:
            basis_field = {
                "kind": "custom",
                "order": self.k + 1,
                "function": self.basis.to_dict(),
            }
        return {
            "format": "siac-kernel",
            "version": 1,
            "k": self.k,
            "basis": basis_field,
            "nodes": {
                "kind": self.nodes.kind,
                "epsilon": str(self.nodes.epsilon) if self.nodes.epsilon is not None else None,
                "shift": str(self.nodes.shift),
                "positions": [str(p) for p in self.nodes.positions],
            },
            "coefficients": [float(c).hex() for c in self.coefficients],
            "coefficients_exact": (
                [str(c) for c in self.coefficients_exact]
                if self.coefficients_exact is not None
                and all(isinstance(c, (Fraction, int)) for c in self.coefficients_exact)
                else None
            ),
            "scaling": float(self.scaling).hex(),
            "support": [float(s).hex() for s in self.support],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterKernel":
        if d.get("format") != "siac-kernel":
            raise ValueError("not a kernel document")
        k = int(d["k"])
        bd = d["basis"]
        if bd["kind"] == "bump" and "pieces" in bd:
            basis = NumericBasis.from_dict(bd)
            basis_kind = "bump"
        elif bd["kind"] == "custom":
            basis = PiecewiseFunction.from_dict(bd["function"])
            basis_kind = "custom"
        else:
            basis = basisfn.basis(bd["kind"], int(bd["order"]))
            basis_kind = bd["kind"]
        nd = d["nodes"]
        nodes = NodeDistribution(
            k,
            nd["kind"],
            Fraction(nd["epsilon"]) if nd["epsilon"] is not None else None,
            Fraction(nd["shift"]),
            tuple(Fraction(p) for p in nd["positions"]),
        )
        coeffs = np.array([float.fromhex(c) for c in d["coefficients"]])
        exact = (
            tuple(Fraction(c) for c in d["coefficients_exact"])
            if d.get("coefficients_exact")
            else None
        )
        return cls(k, basis, basis_kind, nodes, coeffs, exact, float.fromhex(d["scaling"]))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)

    @classmethod
    def load(cls, path) -> "FilterKernel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def build_filter(config: FilterConfig) -> FilterKernel:
    """Kernel with reproduction coefficients for the configured layout."""
    basis = resolve_basis(config.basis, config.k + 1)
    nodes = make_nodes(
        config.k,
        config.nodes,
        epsilon=config.epsilon,
        shift=config.shift,
        custom=config.custom_nodes,
    )
    coeffs, exact = solve_coefficients(basis, nodes)
    if isinstance(config.basis, str):
        basis_kind = config.basis
    elif isinstance(config.basis, NumericBasis):
        basis_kind = "bump"
    else:
        basis_kind = "custom"
    return FilterKernel(
        k=config.k,
        basis=basis,
        basis_kind=basis_kind,
        nodes=nodes,
        coefficients=coeffs,
        coefficients_exact=exact,
        scaling=float(config.scaling),
    )


def evaluate_kernel(kernel: FilterKernel, x):
    return kernel.evaluate(x)


# ---------------------------------------------------------------------------
# quality checks and geometry


def _quad_points_for(kernel: FilterKernel, extra_degree: int) -> int:
    deg = kernel.poly_degree
    if deg is not None:
        return max(2, math.ceil((deg + extra_degree + 2) / 2))
    if isinstance(kernel.basis, NumericBasis):
        # Chebyshev pieces are high-degree polynomials; integrate them exactly
        rep_deg = max(len(c) for c in kernel.basis.pieces)
        return math.ceil((rep_deg + extra_degree + 2) / 2)
    return 16


def reproduction_residual(kernel: FilterKernel, m: int, xs) -> float:
    """max |(K * p)(x) - p(x)| over xs for p(x) = x^m, via direct quadrature.

    Integrates the evaluated kernel, independently of the moment solve that
    produced the coefficients.
    """
    if m < 0 or m > 2 * kernel.k:
        raise ValueError(f"reproduction holds only for degrees 0..{2 * kernel.k}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    bps = kernel.breakpoints_unscaled()
    npts = _quad_points_for(kernel, m)
    r, w = gauss_rule(npts)
    tg, wg = [], []
    for a, b in zip(bps, bps[1:]):
        half = (b - a) / 2.0
        tg.append(a + half * (r + 1.0))
        wg.append(half * w)
    tg = np.concatenate(tg)
    wg = np.concatenate(wg)
    kv = kernel.evaluate_unscaled(tg) * wg
    conv = ((xs[:, None] - tg[None, :]) ** m) @ kv
    return float(np.max(np.abs(conv - xs**m)))


def zeroth_moment_defect(kernel: FilterKernel) -> float:
    """|sum_g c_g * integral(phi) - 1| evaluated at the solve's precision.

    Binary64 storage of large compact coefficients already carries ~1e-13
    representation noise, so the condition is checked on the exact or
    extended-precision coefficient vector whenever one is available.
    """
    ce = kernel.coefficients_exact
    if ce is not None and all(isinstance(c, (Fraction, int)) for c in ce):
        return float(abs(sum(ce, Fraction(0)) * Fraction(kernel.basis.integral()) - 1))
    with mp.workdps(SOLVER_DPS):
        mu0 = _raw_moment_mp(kernel.basis, 0)
        cs = ce if ce is not None else [_mpf(float(c)) for c in kernel.coefficients]
        return float(abs(mp.fsum(c * mu0 for c in cs) - 1))


def kernel_support_width(k: int, kind: str, epsilon=None) -> Fraction:
    """Unscaled support width: 3k+1 for standard, (2*eps+1)k+1 for compact."""
    if kind == "standard":
        return Fraction(3 * k + 1)
    if kind == "compact":
        eps = default_epsilon(k) if epsilon is None else Fraction(epsilon)
        return (2 * eps + 1) * k + 1
    raise ValueError("support width formula needs 'standard' or 'compact' nodes")


def boundary_shift(
    k: int,
    kind: str,
    x: float,
    domain: tuple[float, float],
    scaling: float,
    epsilon=None,
    support_width=None,
) -> float:
    """Smallest-magnitude node shift placing the data window inside the domain.

    The window of the shifted kernel evaluated at x is
    [x + H*(shift - S/2), x + H*(shift + S/2)] with S the unscaled support
    width; the shift is positive near the left boundary (window pushed right)
    and zero wherever the symmetric window already fits.
    """
    a, b = float(domain[0]), float(domain[1])
    if not a <= x <= b:
        raise ValueError(f"evaluation point {x} outside domain [{a}, {b}]")
    s = float(support_width if support_width is not None else kernel_support_width(k, kind, epsilon))
    lo = (a - x) / scaling + s / 2.0
    hi = (b - x) / scaling - s / 2.0
    if lo > hi:
        raise DomainTooShortError(
            f"domain of length {b - a} cannot contain the scaled kernel support {s * scaling}"
        )
    if lo <= 0.0 <= hi:
        return 0.0
    return lo if lo > 0.0 else hi


@dataclass(frozen=True)
class TensorKernel2D:
    """Separable product of two 1D kernels."""

    kx: FilterKernel
    ky: FilterKernel

    def evaluate(self, x, y):
        return np.asarray(self.kx.evaluate(x)) * np.asarray(self.ky.evaluate(y))

    def __call__(self, x, y):
        return self.evaluate(x, y)

    @property
    def support(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return self.kx.support, self.ky.support

    @property
    def support_area(self) -> float:
        (x0, x1), (y0, y1) = self.support
        return (x1 - x0) * (y1 - y0)


def tensor2d(kx: FilterKernel, ky: FilterKernel) -> TensorKernel2D:
    return TensorKernel2D(kx, ky)
