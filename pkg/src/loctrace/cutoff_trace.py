"""Cutoff trace of the averaged-translation operator, by independent routes.

For a smooth compactly supported profile f on the multiplicative module axis,
T(lam) is the trace of (Fourier-conjugated cutoff) * (cutoff) * (U_f).  Route A
evaluates it as a two-dimensional box pairing of the two kernels; route B as a
one-dimensional integral of the transform G of the inverted profile's additive
representative against the annulus weight (2 log lam - log t); route C (real
line only) literally multiplies dense matrices on a signed grid and takes the
matrix trace.  The asymptote 2 log(lam) f(1) - H(f)(1) and the computable tail
bound complete the picture.

Products of grid points live on the half-offset "product lattice"; all route
sums run there, t = 1 included exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fields import FieldBackend, RadialFunction, RadialGrid, to_additive
from .fourier import (
    FourierOperator,
    FullLineFourier,
    SignedGrid,
    build_fourier,
    full_line_fourier,
    make_signed_grid,
)
from .kernels import kernel_values
from .operators import TestFunction

log = logging.getLogger("loctrace")


def inversion(f: RadialFunction) -> RadialFunction:
    """Multiplicative inversion t -> 1/t: the exact index reversal."""
    g = f.grid
    if not np.allclose(g.log_t + g.log_t[::-1], 0.0, atol=1e-12):
        raise ValueError("inversion needs a grid symmetric about t = 1")
    return RadialFunction(g, f.samples[::-1].copy())


def i_f_additive_tilde(
    backend: FieldBackend, grid: RadialGrid, f: TestFunction, fourier: FourierOperator | None = None
) -> RadialFunction:
    """Transform of the additive representative of the inverted profile."""
    op = fourier if fourier is not None else build_fourier(backend, grid)
    fv = RadialFunction(grid, f(grid.t))
    arep = to_additive(inversion(fv))
    return op.apply_function(arep)


class TraceComputation:
    """Shared state for one (backend, grid, profile) trace study.

    Caches the product-lattice transform G and the kernel values so a lambda
    sweep costs one FFT pipeline total.
    """

    def __init__(
        self,
        backend: FieldBackend,
        grid: RadialGrid,
        f: TestFunction,
        fourier: FourierOperator | None = None,
    ):
        f.check_support(grid)
        self.backend = backend
        self.grid = grid
        self.f = f
        self.fourier = fourier if fourier is not None else build_fourier(backend, grid)
        self._G: dict[bool, np.ndarray] = {}
        pl = self.fourier.product_lattice
        self.mu = pl.log_t
        self.t_p = pl.t
        self.h = grid.step
        self.K_p = kernel_values(backend.field_id, self.t_p)
        self.sqrt_omega = math.sqrt(backend.omega)
        self.omega = backend.omega

    def transform_of_inverted(self, invert: bool = True) -> np.ndarray:
        """G on the product lattice, from I(f) (default) or from f itself."""
        if invert not in self._G:
            fv = self.f(self.grid.t)
            samples = fv[::-1] if invert else fv
            arep = samples / np.sqrt(self.omega * self.grid.t)
            self._G[invert] = self.fourier.apply_product_lattice(arep)
        return self._G[invert]

    # -- route B and its relatives -------------------------------------------

    def lattice_moment(self, weight: np.ndarray, G: np.ndarray | None = None) -> float:
        """sqrt(omega) * sum weight * K * G * t * h over the product lattice."""
        G = self.transform_of_inverted() if G is None else G
        return float(
            self.sqrt_omega
            * self.omega
            * np.sum(weight * self.K_p * G * self.t_p * self.h)
        )

    def route_b(self, lam: float, G: np.ndarray | None = None) -> float:
        ell = math.log(lam)
        w = np.maximum(2.0 * ell - self.mu, 0.0)
        return self.lattice_moment(w, G)

    def route_b_weighted_eval(self, lam: float) -> float:
        """Same value assembled as the truncated-weight transform evaluated at 1.

        Applies (2 log lam - log t)_+ to G in the transform domain and reads
        off the inverse transform at t = 1; algebraically equal to route_b.
        """
        G = self.transform_of_inverted()
        ell = math.log(lam)
        wG = np.maximum(2.0 * ell - self.mu, 0.0) * G
        # inverse transform at t = 1: omega * sum K(1 * u) (wG)(u) du
        value_at_one = self.omega * np.sum(self.K_p * wG * self.t_p * self.h)
        return float(self.sqrt_omega * value_at_one)

    def first_moment(self) -> float:
        """sqrt(omega) * (inverse transform of G at 1); recovers f(1)."""
        return self.lattice_moment(np.ones_like(self.mu))

    def conductor_value(self, invert: bool = True) -> float:
        """log-weighted moment of G: the constant term of the asymptotics."""
        return self.lattice_moment(self.mu, self.transform_of_inverted(invert))

    def error_bound(self, lam: float) -> float:
        """Computable tail bound: sqrt(omega) * int_{t >= lam^2} |log t| |G| dx."""
        G = self.transform_of_inverted()
        mask = self.mu >= 2.0 * math.log(lam)
        return float(
            self.sqrt_omega
            * self.omega
            * np.sum(np.abs(self.mu[mask]) * np.abs(G[mask]) * self.t_p[mask] * self.h)
        )

    # -- route A ---------------------------------------------------------------

    def route_a(self, lam: float) -> float:
        """Two-dimensional box pairing over {m(x), m(y) <= lam}.

        Midpoint-cell weights clipped at log(lam), the below-grid strip
        completed analytically through the cumulative kernel integral, and the
        doubly-subgrid corner removed.
        """
        ell = math.log(lam)
        if 2.0 * ell >= self.mu[-1]:
            raise ValueError("lam^2 exceeds the grid range")
        g = self.grid
        G = self.transform_of_inverted()
        lo = g.log_t - self.h / 2.0
        hi = np.minimum(g.log_t + self.h / 2.0, ell)
        cells = np.where(hi > lo, hi - lo, 0.0)
        w_box = self.omega * np.where(hi > lo, np.exp(hi) - np.exp(lo), 0.0)
        conv = np.convolve(w_box, w_box)
        box = float(np.sum(conv * self.K_p * G) / self.sqrt_omega)
        # strip x in (0, e^{-L - h/2}]: cumulative Phi(v) = int_0^v K G du at v = x_floor * t_j
        KGu = self.K_p * G * self.t_p
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (KGu[1:] + KGu[:-1]) * self.h)])
        Phi = cum + KGu[0]
        Phi_half = np.concatenate(
            [[Phi[0] * math.exp(-0.5 * self.h)], 0.5 * (Phi[:-1] + Phi[1:])]
        )[: g.n]
        pref = self.omega**2 / self.sqrt_omega
        strip = pref * float(np.sum(cells * Phi_half))
        corner = pref * float(G[0]) * (g.t[0] * math.exp(-self.h / 2.0)) ** 2
        return box + 2.0 * strip - corner

    # -- assembled report --------------------------------------------------------

    def report(self, lam: float, route_c: Optional[float] = None) -> "TraceReport":
        b = self.route_b(lam)
        cond = self.conductor_value()
        return TraceReport(
            lam=lam,
            two_log_lambda=2.0 * math.log(lam),
            t_route_a=self.route_a(lam),
            t_route_b=b,
            t_route_c=route_c,
            asymptote=2.0 * math.log(lam) * self.f.value_at_1 - cond,
            error_bound=self.error_bound(lam),
            unitarity_defect=float(self.fourier.unitarity_defect),
        )


@dataclass(frozen=True)
class TraceReport:
    lam: float
    two_log_lambda: float
    t_route_a: float
    t_route_b: float
    t_route_c: Optional[float]
    asymptote: float
    error_bound: float
    unitarity_defect: float


@dataclass(frozen=True)
class ConductorValue:
    h_f_at_1: float
    h_if_at_1: float


def trace_route_A(backend, grid, f: TestFunction, lam: float, fourier=None) -> float:
    return TraceComputation(backend, grid, f, fourier).route_a(lam)


def trace_route_B(backend, grid, f: TestFunction, lam: float, fourier=None) -> float:
    return TraceComputation(backend, grid, f, fourier).route_b(lam)


def conductor_at_one(backend, grid, f: TestFunction, fourier=None) -> ConductorValue:
    """B(I(f))(1) evaluated from f and, independently, from I(f).

    The two agree because log(m(x)) + transform-conjugated log(m(x)) commutes
    with inversion; their computed difference is a convention check.
    """
    comp = TraceComputation(backend, grid, f, fourier)
    return ConductorValue(
        h_f_at_1=comp.conductor_value(invert=True),
        h_if_at_1=comp.conductor_value(invert=False),
    )


def error_bound(backend, grid, f: TestFunction, lam: float, fourier=None) -> float:
    return TraceComputation(backend, grid, f, fourier).error_bound(lam)


def asymptotic_fit(reports: Sequence[TraceReport]) -> tuple[float, float, float]:
    """Least squares of route-B values against (2 log lam, 1).

    Returns (slope, intercept, max residual): the slope estimates f(1), the
    intercept estimates -H(f)(1).
    """
    if len(reports) < 3:
        raise ValueError("need at least 3 reports for the asymptotic fit")
    lams = {r.lam for r in reports}
    if len(lams) < 2:
        raise ValueError("degenerate design matrix: fewer than 2 distinct lambdas")
    y = np.array([r.t_route_b for r in reports])
    if np.allclose(y, 0.0):
        raise ValueError("all trace values vanish; the fit is degenerate")
    X = np.array([[r.two_log_lambda, 1.0] for r in reports])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return float(coef[0]), float(coef[1]), float(np.abs(resid).max())


def gate_reports(reports: Sequence[TraceReport], factor: float = 0.1) -> list[TraceReport]:
    """Keep reports whose tail bound certifies the asymptotic regime."""
    min_t = min(abs(r.t_route_b) for r in reports)
    return [r for r in reports if r.error_bound < factor * min_t]


# ---------------------------------------------------------------------------
# route C: literal matrix trace on the signed real line
# ---------------------------------------------------------------------------


class SignedTraceLab:
    """Full-line machinery (field R): dense cutoffs, transform and U_f.

    The only route that literally traces an operator product over the whole
    space.  Rows of U_f with |x| < 0.5 cannot resolve the multiplicative
    kernel on a uniform grid; for those rows the product (U_f F) entries are
    integrated directly by Gauss-Legendre quadrature of U_f's kernel times
    the transform kernel.
    """

    BAD_ROW_EXTENT = 0.5
    GL_NODES = 192

    def __init__(self, f: TestFunction, n: int = 4096):
        self.f = f
        self.sgrid: SignedGrid = make_signed_grid(n)
        self.fourier: FullLineFourier = full_line_fourier(self.sgrid)
        x = self.sgrid.x
        ratio = np.abs(np.outer(x, 1.0 / x))
        self.uf_matrix = f(ratio) / (2.0 * np.sqrt(np.abs(np.outer(x, x)))) * self.sgrid.step
        self._gl = np.polynomial.legendre.leggauss(self.GL_NODES)

    @property
    def unitarity_defect(self) -> float:
        return self.fourier.unitarity_defect

    def _uf_fourier_rows(self, vs: np.ndarray, us: np.ndarray) -> np.ndarray:
        """(U_f F)(v, u) by direct quadrature: int f(v/y) (vy)^{-1/2} 2cos(2 pi y u) dy."""
        rho = self.f.support_radius
        nodes, wts = self._gl
        out = np.empty((len(vs), len(us)))
        for i, v in enumerate(np.abs(vs)):
            a, b = v * math.exp(-rho), v * math.exp(rho)
            y = 0.5 * (b - a) * nodes + 0.5 * (b + a)
            w = 0.5 * (b - a) * wts
            base = self.f(v / y) / np.sqrt(v * y) * w
            out[i] = np.cos(2.0 * np.pi * np.outer(np.abs(us), y)) @ base
        return out * self.sgrid.step

    def trace_route_c(self, lam: float) -> float:
        x = self.sgrid.x
        if lam >= self.sgrid.extent / 2.0:
            raise ValueError("lam too close to the signed-grid extent")
        bi = np.where(np.abs(x) <= lam * (1.0 + 1e-12))[0]
        Fm = self.fourier.matrix
        m1 = np.conj(Fm[np.ix_(bi, bi)])  # cutoff * inverse transform * cutoff
        m2 = self.uf_matrix[bi, :] @ Fm[:, bi]
        bad = np.abs(x[bi]) < self.BAD_ROW_EXTENT
        if bad.any():
            m2[bad, :] = self._uf_fourier_rows(x[bi][bad], x[bi])
        return float(np.sum(m1 * m2.T).real)

    def cyclicity_defect(self, lam: float) -> float:
        """Relative gap between Tr((P F^-1 P U_f) F) and Tr(F (P F^-1 P U_f))."""
        x = self.sgrid.x
        bi = np.where(np.abs(x) <= lam * (1.0 + 1e-12))[0]
        Fm = self.fourier.matrix
        pu = np.conj(Fm[np.ix_(bi, bi)]) @ self.uf_matrix[bi, :]  # block rows of P F^-1 P U_f
        t1 = np.trace(pu @ Fm[:, bi])
        t2 = np.trace(Fm[:, bi] @ pu)
        return float(abs(t1 - t2) / max(abs(t1), 1e-300))


def trace_route_C_full_line(f: TestFunction, lam: float, n: int = 4096) -> float:
    return SignedTraceLab(f, n).trace_route_c(lam)
