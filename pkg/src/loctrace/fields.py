"""Normalization backends for the three archimedean division algebras.

Everything downstream hangs off three per-field conventions fixed here:
the module map m(g) = |det of left multiplication by g| on the underlying
euclidean space, the sphere constant omega for which the multiplicative
measure d*g = dg/(omega*m(g)) gives every annulus {t1 <= m <= t2} the
measure log(t2/t1), and the self-dual additive Haar measure
(measure_factor x Lebesgue).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FIELD_IDS = ("R", "C", "H")

_EUCLIDEAN_DIM = {"R": 1, "C": 2, "H": 4}
_OMEGA = {"R": 2.0, "C": 2.0 * math.pi, "H": 2.0 * math.pi**2}
_MEASURE_FACTOR = {"R": 1.0, "C": 2.0, "H": 4.0}
# lambda(x) = exp(2*pi*i * character_scale * reduced_trace(x));
# reduced trace is x itself on R and twice the real part on C, H.
_CHARACTER_SCALE = {"R": -1.0, "C": 1.0, "H": 1.0}


@dataclass(frozen=True)
class FieldBackend:
    field_id: str
    euclidean_dim: int
    omega: float
    measure_factor: float
    character_scale: float


def make_backend(field_id: str) -> FieldBackend:
    """Backend for one of the fields "R", "C", "H"."""
    if field_id not in FIELD_IDS:
        raise ValueError(f"unknown field id {field_id!r}; expected one of {FIELD_IDS}")
    return FieldBackend(
        field_id=field_id,
        euclidean_dim=_EUCLIDEAN_DIM[field_id],
        omega=_OMEGA[field_id],
        measure_factor=_MEASURE_FACTOR[field_id],
        character_scale=_CHARACTER_SCALE[field_id],
    )


def left_multiplication_matrix(field_id: str, g) -> np.ndarray:
    """Matrix of x -> g*x on the euclidean coordinates of the field."""
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if field_id == "R":
        if g.shape != (1,):
            raise ValueError("R element must be a single coordinate")
        return g.reshape(1, 1)
    if field_id == "C":
        if g.shape != (2,):
            raise ValueError("C element must have 2 coordinates")
        a, b = g
        return np.array([[a, -b], [b, a]])
    if field_id == "H":
        if g.shape != (4,):
            raise ValueError("H element must have 4 coordinates")
        a, b, c, d = g
        return np.array(
            [
                [a, -b, -c, -d],
                [b, a, -d, c],
                [c, d, a, -b],
                [d, -c, b, a],
            ]
        )
    raise ValueError(f"unknown field id {field_id!r}")


def module_of_matrix(field_id: str, g) -> float:
    """Module m(g) = |det L_g|, the additive-Haar scaling factor of x -> g*x.

    Multiplicative: m(gh) = m(g) m(h).  Raises for g = 0.
    """
    mat = left_multiplication_matrix(field_id, g)
    if not np.any(mat):
        raise ValueError("module of 0 is undefined")
    return float(abs(np.linalg.det(mat)))


def annulus_measure(t1: float, t2: float) -> float:
    """Multiplicative measure of {t1 <= m(y) <= t2}: log(t2/t1)."""
    if t1 <= 0:
        raise ValueError("annulus requires t1 > 0")
    if t2 < t1:
        raise ValueError("annulus requires t2 >= t1")
    return math.log(t2 / t1)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid in log-module, symmetric about t = 1.

    Inversion t -> 1/t is the exact index reversal i -> n-1-i.  w_mult are
    trapezoid weights for d*t in log t; w_add = omega * t * w_mult quadratures
    the additive measure on the module axis.
    """

    backend: FieldBackend
    n: int
    log_t_half_range: float
    log_t: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    step: float = 0.0
    w_mult: np.ndarray = field(repr=False, default=None)
    w_add: np.ndarray = field(repr=False, default=None)

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def reversal(self) -> np.ndarray:
        return np.arange(self.n)[::-1]

    def index_of_log(self, x: float) -> int:
        """Nearest grid index of a log-module value; must land on the lattice."""
        k = (x + self.log_t_half_range) / self.step
        ki = int(round(k))
        if abs(k - ki) > 1e-8:
            raise ValueError(f"log-module {x} is not on the grid lattice")
        if not (0 <= ki < self.n):
            raise ValueError(f"log-module {x} is outside the grid")
        return ki


def make_grid(backend: FieldBackend, log_t_half_range: float, n: int) -> RadialGrid:
    if log_t_half_range <= 0:
        raise ValueError("log_t_half_range must be positive")
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    L = float(log_t_half_range)
    h = 2.0 * L / (n - 1)
    log_t = -L + h * np.arange(n)
    t = np.exp(log_t)
    w_mult = np.full(n, h)
    w_mult[0] *= 0.5
    w_mult[-1] *= 0.5
    w_add = backend.omega * t * w_mult
    return RadialGrid(
        backend=backend,
        n=n,
        log_t_half_range=L,
        log_t=log_t,
        t=t,
        step=h,
        w_mult=w_mult,
        w_add=w_add,
    )


@dataclass
class RadialFunction:
    """Samples of a radial profile on a RadialGrid (value at module t[i])."""

    grid: RadialGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples)
        if self.samples.shape != (self.grid.n,):
            raise ValueError("sample count must match the grid")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    def norm_mult(self) -> float:
        return float(np.sqrt(np.sum(self.grid.w_mult * np.abs(self.samples) ** 2)))

    def norm_add(self) -> float:
        return float(np.sqrt(np.sum(self.grid.w_add * np.abs(self.samples) ** 2)))


def to_additive(h: RadialFunction) -> RadialFunction:
    """Multiplicative-picture profile -> additive representative h/sqrt(omega*t)."""
    g = h.grid
    return RadialFunction(g, h.samples / np.sqrt(g.backend.omega * g.t))


def to_multiplicative(h_a: RadialFunction) -> RadialFunction:
    """Inverse of to_additive; the round trip is the identity to one ulp."""
    g = h_a.grid
    return RadialFunction(g, h_a.samples * np.sqrt(g.backend.omega * g.t))
