"""Modal discontinuous Galerkin solver for linear advection.

Uniform periodic meshes in 1D and 2D (tensor product), orthonormal Legendre
basis per element (diagonal mass matrix), upwind flux, classical four-stage
Runge-Kutta in time.  The per-element semi-discrete operator reduces to two
small constant matrices: a volume+outflow block acting on the element itself
and an inflow block acting on the upwind neighbour, so the right-hand side is
a pair of matrix products plus a roll.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import legval

from .quadrature import gauss_rule


class UnstableRunError(RuntimeError):
    """Time integration produced non-finite values."""


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh; one entry per axis in bounds/elements/periodic."""

    bounds: tuple[tuple[float, float], ...]
    elements: tuple[int, ...]
    periodic: tuple[bool, ...] = ()

    def __post_init__(self):
        if not self.periodic:
            object.__setattr__(self, "periodic", (True,) * len(self.bounds))
        if len(self.bounds) != len(self.elements) or len(self.bounds) != len(self.periodic):
            raise ValueError("bounds, elements, periodic must agree per axis")
        for (a, b), n in zip(self.bounds, self.elements):
            if b <= a or n < 1:
                raise ValueError("empty axis in mesh")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple((b - a) / n for (a, b), n in zip(self.bounds, self.elements))

    def edges(self, axis: int = 0) -> np.ndarray:
        a, b = self.bounds[axis]
        return np.linspace(a, b, self.elements[axis] + 1)

    def centers(self, axis: int = 0) -> np.ndarray:
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])


def interval_mesh(a: float, b: float, n: int) -> Mesh:
    return Mesh(((a, b),), (n,))


def rectangle_mesh(bounds_x, bounds_y, nx: int, ny: int) -> Mesh:
    return Mesh((tuple(bounds_x), tuple(bounds_y)), (nx, ny))


@dataclass(frozen=True)
class AdvectionProblem:
    """u_t + a . grad(u) = 0 with periodic data and known exact solution."""

    speed: tuple[float, ...]
    initial: Callable
    final_time: float
    name: str = ""

    def __post_init__(self):
        if np.ndim(self.speed) == 0:
            object.__setattr__(self, "speed", (float(self.speed),))

    @property
    def dim(self) -> int:
        return len(self.speed)

    def exact(self, t: float) -> Callable:
        """Exact solution at time t: the initial data advected by a*t."""
        if self.dim == 1:
            a = self.speed[0]
            return lambda x: self.initial(np.asarray(x) - a * t)
        ax, ay = self.speed
        return lambda x, y: self.initial(np.asarray(x) - ax * t, np.asarray(y) - ay * t)


def sine_advection_1d(final_time: float = 1.0, speed: float = 1.0) -> AdvectionProblem:
    """u_t + u_x = 0 on [0,1], u(x,0) = sin(2 pi x)."""
    return AdvectionProblem(
        (speed,), lambda x: np.sin(2.0 * np.pi * np.asarray(x)), final_time, "sine_1d"
    )


def sine_advection_2d(final_time: float = 2.0 * math.pi) -> AdvectionProblem:
    """u_t + u_x + u_y = 0 on [0,2pi]^2, u(x,y,0) = sin(x+y)."""
    return AdvectionProblem(
        (1.0, 1.0),
        lambda x, y: np.sin(np.asarray(x) + np.asarray(y)),
        final_time,
        "sine_2d",
    )


@dataclass(frozen=True)
class DGField:
    """Modal coefficients in the orthonormal Legendre basis per element.

    1D layout: coeffs[j, m]; 2D layout: coeffs[jx, jy, mx, my].
    """

    mesh: Mesh
    degree: int
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        k = self.degree
        want = tuple(self.mesh.elements) + (k + 1,) * self.mesh.dim
        if self.coeffs.shape != want:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {want}")
        self.coeffs.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    def norm(self) -> float:
        """L2 norm of the broken polynomial itself (orthonormal modes)."""
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def mass(self) -> float:
        """Integral of the field over the domain."""
        if self.dim == 1:
            return float(np.sum(self.coeffs[:, 0]) * math.sqrt(self.mesh.h[0]))
        hx, hy = self.mesh.h
        return float(np.sum(self.coeffs[:, :, 0, 0]) * math.sqrt(hx * hy))

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "siac-dgfield",
            "version": 1,
            "mesh": {
                "bounds": [list(b) for b in self.mesh.bounds],
                "elements": list(self.mesh.elements),
                "periodic": list(self.mesh.periodic),
            },
            "degree": self.degree,
            "time": self.time,
            "coefficients": self.coeffs.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DGField":
        if d.get("format") != "siac-dgfield":
            raise ValueError("not a DG field document")
        m = d["mesh"]
        mesh = Mesh(
            tuple(tuple(b) for b in m["bounds"]),
            tuple(m["elements"]),
            tuple(bool(p) for p in m["periodic"]),
        )
        k = int(d["degree"])
        shape = tuple(mesh.elements) + (k + 1,) * mesh.dim
        coeffs = np.array(d["coefficients"], dtype=float).reshape(shape)
        return cls(mesh, k, coeffs, float(d["time"]))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, path) -> "DGField":
        with open(path) as f:
            return cls.from_dict(json.load(f))


# ---------------------------------------------------------------------------
# reference-element helpers


@lru_cache(maxsize=None)
def _legendre_table(k: int, pts: tuple) -> np.ndarray:
    """P[m, q] = P_m(r_q) for m = 0..k."""
    r = np.array(pts)
    return np.vstack([legval(r, [0.0] * m + [1.0]) for m in range(k + 1)])


def modal_scale(k: int, h: float) -> np.ndarray:
    """sqrt((2m+1)/h): converts modal coefficients to nodal contributions."""
    return np.sqrt((2.0 * np.arange(k + 1) + 1.0) / h)


@lru_cache(maxsize=None)
def _upwind_blocks(k: int, a: float, h: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Self block, neighbour block, and the roll offset of the neighbour."""
    m = np.arange(k + 1)
    s = np.sqrt((2.0 * m[:, None] + 1.0) * (2.0 * m[None, :] + 1.0))
    d = np.zeros_like(s)
    for mm in range(k + 1):
        for nn in range(k + 1):
            if mm > nn and (mm + nn) % 2 == 1:
                d[mm, nn] = 2.0 * s[mm, nn]
    sign_m = (-1.0) ** m
    if a >= 0:
        self_block = (a / h) * (d - s)
        nbr_block = (a / h) * (sign_m[:, None] * s)
        offset = 1  # inflow from the element to the left
    else:
        self_block = (a / h) * (d + sign_m[:, None] * sign_m[None, :] * s)
        nbr_block = -(a / h) * (sign_m[None, :] * s)
        offset = -1  # inflow from the element to the right
    return self_block, nbr_block, offset


def rhs(field: DGField, problem: AdvectionProblem) -> np.ndarray:
    """Semi-discrete upwind DG operator applied to the modal coefficients."""
    return _rhs_coeffs(field.coeffs, field.mesh, field.degree, problem.speed)


def _rhs_coeffs(u: np.ndarray, mesh: Mesh, k: int, speed) -> np.ndarray:
    if mesh.dim == 1:
        a_blk, b_blk, off = _upwind_blocks(k, float(speed[0]), mesh.h[0])
        return u @ a_blk.T + np.roll(u, off, axis=0) @ b_blk.T
    ax_blk, bx_blk, offx = _upwind_blocks(k, float(speed[0]), mesh.h[0])
    ay_blk, by_blk, offy = _upwind_blocks(k, float(speed[1]), mesh.h[1])
    du = np.einsum("mn,xynl->xyml", ax_blk, u)
    du += np.einsum("mn,xynl->xyml", bx_blk, np.roll(u, offx, axis=0))
    du += np.einsum("ln,xymn->xyml", ay_blk, u)
    du += np.einsum("ln,xymn->xyml", by_blk, np.roll(u, offy, axis=1))
    return du


# ---------------------------------------------------------------------------
# projection, time stepping, errors


def project_initial(problem: AdvectionProblem, mesh: Mesh, degree: int, npts: Optional[int] = None) -> DGField:
    """Element-wise L2 projection of the initial data onto the broken space."""
    return project_function(problem.initial, mesh, degree, npts=npts, time=0.0)


def project_function(fn: Callable, mesh: Mesh, degree: int, npts: Optional[int] = None, time: float = 0.0) -> DGField:
    k = degree
    q = npts or k + 3
    r, w = gauss_rule(q)
    p = _legendre_table(k, tuple(r))
    if mesh.dim == 1:
        h = mesh.h[0]
        x = mesh.centers(0)[:, None] + 0.5 * h * r[None, :]
        vals = np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape)
        scale = 0.5 * np.sqrt((2.0 * np.arange(k + 1) + 1.0) * h)
        coeffs = np.einsum("jq,q,mq->jm", vals, w, p) * scale[None, :]
        return DGField(mesh, k, coeffs, time)
    hx, hy = mesh.h
    xs = mesh.centers(0)[:, None] + 0.5 * hx * r[None, :]
    ys = mesh.centers(1)[:, None] + 0.5 * hy * r[None, :]
    vals = np.broadcast_to(
        np.asarray(fn(xs[:, None, :, None], ys[None, :, None, :]), dtype=float),
        (mesh.elements[0], mesh.elements[1], q, q),
    )  # (jx, jy, qx, qy)
    sx = 0.5 * np.sqrt((2.0 * np.arange(k + 1) + 1.0) * hx)
    sy = 0.5 * np.sqrt((2.0 * np.arange(k + 1) + 1.0) * hy)
    coeffs = np.einsum("xypq,p,q,mp,nq->xymn", vals, w, w, p, p)
    coeffs *= sx[None, None, :, None] * sy[None, None, None, :]
    return DGField(mesh, k, coeffs, time)


def stable_dt(mesh: Mesh, degree: int, speed, cfl: float, exponent: Optional[float] = None) -> float:
    """Time step cfl * h^max(1,(k+1)/4); the exponent guards high degrees."""
    expo = exponent if exponent is not None else max(1.0, (degree + 1) / 4.0)
    hmin = min(mesh.h)
    amax = max(abs(float(a)) for a in np.atleast_1d(speed))
    if amax == 0:
        raise ValueError("advection speed must be nonzero")
    return cfl * hmin**expo / max(amax, 1.0)


def solve(
    problem: AdvectionProblem,
    mesh: Mesh,
    degree: int,
    cfl: float = 0.05,
    dt_exponent: Optional[float] = None,
    check_every: int = 64,
) -> DGField:
    """March the projected initial data to the final time with classical RK4."""
    field = project_initial(problem, mesh, degree)
    t_final = problem.final_time
    if t_final == 0.0:
        return field
    if t_final < 0:
        raise ValueError("final time must be non-negative")
    dt = stable_dt(mesh, degree, problem.speed, cfl, dt_exponent)
    n_full = int(math.floor(t_final / dt + 1e-12))
    remainder = t_final - n_full * dt
    u = np.array(field.coeffs)
    mesh_, k, speed = field.mesh, degree, problem.speed

    def step(u: np.ndarray, dt: float) -> np.ndarray:
        k1 = _rhs_coeffs(u, mesh_, k, speed)
        k2 = _rhs_coeffs(u + 0.5 * dt * k1, mesh_, k, speed)
        k3 = _rhs_coeffs(u + 0.5 * dt * k2, mesh_, k, speed)
        k4 = _rhs_coeffs(u + dt * k3, mesh_, k, speed)
        return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    # stable upwind advection never grows; a factor 1e6 is unambiguous blow-up
    blowup = 1e6 * max(1.0, float(np.max(np.abs(u))))

    def check(u: np.ndarray, where: str) -> None:
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > blowup:
            raise UnstableRunError(f"coefficients blew up {where} (dt={dt:.3e}); reduce cfl")

    for i in range(n_full):
        u = step(u, dt)
        if (i + 1) % check_every == 0:
            check(u, f"after step {i + 1}")
    if remainder > 1e-13 * max(t_final, 1.0):
        u = step(u, remainder)
    check(u, "at the final time")
    return DGField(mesh, degree, u, t_final)


def domain_measure(mesh: Mesh) -> float:
    out = 1.0
    for a, b in mesh.bounds:
        out *= b - a
    return out


def l2_error(field: DGField, exact: Callable, npts: Optional[int] = None, normalized: bool = False) -> float:
    """Gauss quadrature of (u - u_h)^2 over the domain, k+3 points per axis.

    With normalized=True the result is divided by sqrt(domain measure); that
    is the convention multi-dimensional convergence tables are reported in.
    """
    k = field.degree
    q = npts or k + 3
    r, w = gauss_rule(q)
    p = _legendre_table(k, tuple(r))
    mesh = field.mesh
    scale_out = 1.0 / math.sqrt(domain_measure(mesh)) if normalized else 1.0
    if field.dim == 1:
        h = mesh.h[0]
        x = mesh.centers(0)[:, None] + 0.5 * h * r[None, :]
        scale = modal_scale(k, h)
        uh = np.einsum("jm,m,mq->jq", field.coeffs, scale, p)
        diff = (exact(x) - uh) ** 2
        return scale_out * float(np.sqrt(0.5 * h * np.sum(diff @ w)))
    hx, hy = mesh.h
    xs = mesh.centers(0)[:, None] + 0.5 * hx * r[None, :]
    ys = mesh.centers(1)[:, None] + 0.5 * hy * r[None, :]
    sx = modal_scale(k, hx)
    sy = modal_scale(k, hy)
    uh = np.einsum("xymn,m,n,mp,nq->xypq", field.coeffs, sx, sy, p, p)
    diff = (exact(xs[:, None, :, None], ys[None, :, None, :]) - uh) ** 2
    total = np.einsum("xypq,p,q->", diff, w, w)
    return scale_out * float(np.sqrt(0.25 * hx * hy * total))


def _locate(xs: np.ndarray, a: float, h: float, n: int, periodic: bool, side: str):
    """Element index and reference coordinate with edge snapping.

    Points within 1e-9 elements of an interface are treated as sitting on it
    and resolved by `side`; otherwise floating-point edge coordinates would
    land arbitrarily on either side.
    """
    rel = (xs - a) / h
    nearest = np.rint(rel)
    on_edge = np.abs(rel - nearest) < 1e-9
    j = np.floor(rel).astype(int)
    j = np.where(on_edge, nearest.astype(int), j)
    r = 2.0 * (rel - j) - 1.0
    if side == "left":
        j = np.where(on_edge, j - 1, j)
        r = np.where(on_edge, 1.0, r)
    elif side == "right":
        r = np.where(on_edge, -1.0, r)
    else:
        raise ValueError("side must be 'left' or 'right'")
    j = j % n if periodic else np.clip(j, 0, n - 1)
    return j, r


def sample(field: DGField, xs, side: str = "right") -> np.ndarray:
    """Point values of a 1D field; interfaces take the right element's trace."""
    if field.dim != 1:
        raise ValueError("sample() is one-dimensional; use sample2d")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    mesh = field.mesh
    a, _ = mesh.bounds[0]
    n = mesh.elements[0]
    h = mesh.h[0]
    j, r = _locate(xs, a, h, n, mesh.periodic[0], side)
    scale = modal_scale(field.degree, h)
    c = field.coeffs[j] * scale[None, :]
    return np.array([legval(ri, ci) for ri, ci in zip(r, c)])


def sample2d(field: DGField, x: float, y: float) -> float:
    """Point value of a 2D field (right/upper trace on interfaces)."""
    mesh = field.mesh
    out = []
    for axis, v in ((0, x), (1, y)):
        a, _ = mesh.bounds[axis]
        n = mesh.elements[axis]
        h = mesh.h[axis]
        j, r = _locate(np.array([float(v)]), a, h, n, mesh.periodic[axis], "right")
        out.append((int(j[0]), float(r[0]), h))
    (jx, rx, hx), (jy, ry, hy) = out
    k = field.degree
    px = np.array([legval(rx, [0.0] * m + [1.0]) for m in range(k + 1)])
    py = np.array([legval(ry, [0.0] * m + [1.0]) for m in range(k + 1)])
    sx, sy = modal_scale(k, hx), modal_scale(k, hy)
    return float(np.einsum("mn,m,n->", field.coeffs[jx, jy], sx * px, sy * py))


def interface_jumps(field: DGField) -> np.ndarray:
    """|u_h(x_i^+) - u_h(x_i^-)| at all interior + wrap interfaces (1D)."""
    edges = field.mesh.edges(0)[:-1] if field.mesh.periodic[0] else field.mesh.edges(0)[1:-1]
    right = sample(field, edges, side="right")
    left = sample(field, edges, side="left")
    return np.abs(right - left)
