"""Reusable numerical kernels.

Adaptive panel quadrature (Gauss-Legendre 15 with a 7-point companion error
estimate, bisection refinement), semi-infinite quadrature with analytic tail
bounds, bracketed root finding, and winding numbers by phase tracking.

All integrands must be vectorized: f(x: ndarray) -> ndarray.  Everything here
is deterministic for fixed inputs.
"""
import heapq
from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    """Quadrature or summation failed to reach the requested tolerance."""


class BracketingError(RuntimeError):
    """A sign-change bracket could not be established."""


class PhaseTrackingError(RuntimeError):
    """Phase step underflow: the contour likely grazes a zero or pole."""


class WindingResidualError(RuntimeError):
    """Accumulated phase is not close enough to an integer multiple of 2*pi."""


@dataclass
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0 or self.evaluations < 1:
            raise ValueError("invalid quadrature result")


@dataclass(frozen=True)
class RectContour:
    """Axis-aligned rectangle in the complex plane, traversed counterclockwise."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate rectangle")

    def corners(self):
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))


_GL_CACHE: dict = {}


def gauss_legendre(n: int):
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def panel_nodes(edges, n: int):
    """Gauss-Legendre nodes and weights for every interval of an edge array."""
    x, w = gauss_legendre(n)
    e = np.asarray(edges, dtype=float)
    mid = 0.5 * (e[:-1] + e[1:])[:, None]
    half = 0.5 * (e[1:] - e[:-1])[:, None]
    return (mid + half * x[None, :]).ravel(), (half * w[None, :]).ravel()


def geom_edges(a: float, b: float, per_decade: float = 3.0):
    """Geometrically spaced edges on [a, b], 0 < a < b."""
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    n = max(2, int(np.ceil(np.log10(b / a) * per_decade)) + 1)
    return np.geomspace(a, b, n)


def adaptive_quad(f, a: float, b: float, rtol: float = 1e-9, atol: float = 1e-300,
                  init_edges=None, max_subdiv: int = 6000, _batch: int = 8):
    """Adaptive quadrature of a vectorized integrand on [a, b].

    Each interval carries a 15-point Gauss value and a 7-point companion;
    their difference is the interval error estimate.  The globally worst
    intervals are bisected (in deterministic order) until the error sum
    satisfies ``max(rtol*|I|, atol)``.

    The integrand may be complex-valued; the returned ``value`` is then
    complex and the error estimate is taken in modulus.

    Returns
    -------
    QuadratureResult
    """
    if not b > a:
        raise ValueError("need b > a")
    x15, w15 = gauss_legendre(15)
    x7, w7 = gauss_legendre(7)
    if init_edges is None:
        edges = np.array([a, b], dtype=float)
    else:
        edges = np.unique(np.clip(np.asarray(init_edges, dtype=float), a, b))
        if edges[0] > a:
            edges = np.concatenate([[a], edges])
        if edges[-1] < b:
            edges = np.concatenate([edges, [b]])
    neval = 0

    def eval_batch(los, his):
        nonlocal neval
        los = np.asarray(los, dtype=float)
        his = np.asarray(his, dtype=float)
        mid = 0.5 * (los + his)[:, None]
        half = 0.5 * (his - los)[:, None]
        pts = np.concatenate([(mid + half * x15[None, :]).ravel(),
                              (mid + half * x7[None, :]).ravel()])
        vals = np.asarray(f(pts))
        neval += pts.size
        n = los.size
        v15 = vals[: 15 * n].reshape(n, 15)
        v7 = vals[15 * n:].reshape(n, 7)
        hi = (v15 * w15[None, :]).sum(axis=1) * half[:, 0]
        lo = (v7 * w7[None, :]).sum(axis=1) * half[:, 0]
        return hi, np.abs(hi - lo)

    los, his = edges[:-1], edges[1:]
    I, E = eval_batch(los, his)
    heap = [(-E[i], float(los[i]), float(his[i]), I[i]) for i in range(los.size)]
    heapq.heapify(heap)
    total = complex(np.sum(I))
    toterr = float(np.sum(E))
    nsub = 0
    deepest = (a, b)
    while toterr > max(rtol * abs(total), atol) and heap:
        if nsub >= max_subdiv:
            raise ConvergenceError(
                f"adaptive_quad: error {toterr:.3e} > target after {nsub} subdivisions; "
                f"deepest interval around {deepest[0]:.6e}")
        work = []
        for _ in range(min(_batch, len(heap))):
            negE, lo, hi, Ii = heapq.heappop(heap)
            if hi - lo < 1e-14 * (abs(hi) + abs(lo)) + 1e-300:
                continue  # cannot refine further; its error stays in the budget
            work.append((lo, hi, Ii, -negE))
        if not work:
            break
        los2, his2 = [], []
        for lo, hi, _, _ in work:
            mid = 0.5 * (lo + hi)
            los2.extend([lo, mid])
            his2.extend([mid, hi])
        I2, E2 = eval_batch(los2, his2)
        for j, (lo, hi, Ii, Ei) in enumerate(work):
            total += complex(I2[2 * j] + I2[2 * j + 1] - Ii)
            toterr += float(E2[2 * j] + E2[2 * j + 1] - Ei)
            heapq.heappush(heap, (-E2[2 * j], los2[2 * j], his2[2 * j], I2[2 * j]))
            heapq.heappush(heap, (-E2[2 * j + 1], los2[2 * j + 1], his2[2 * j + 1], I2[2 * j + 1]))
            nsub += 1
            deepest = (lo, hi)
    value = total.real if abs(total.imag) == 0.0 else total
    return QuadratureResult(value=value, abs_error_estimate=toterr, evaluations=neval)


@dataclass(frozen=True)
class Exponential:
    """Integrand decays at least like exp(-rate*x)."""
    rate: float


@dataclass(frozen=True)
class PowerLaw:
    """Integrand decays at least like x**-p, p > 1."""
    p: float


def semi_infinite_quad(f, a: float, tol: float = 1e-9, decay=None,
                       init_scale: float = None, max_chunks: int = 60):
    """Integrate f on [a, inf) by chunked adaptive quadrature plus a tail bound.

    The declared decay supplies the analytic tail bound; chunks are extended
    until the bound drops below tol/2 of the running total.  Decay-assumption
    violations are detected by sampling the integrand at the chunk ends.
    """
    if decay is None:
        raise ValueError("decay model required")
    if isinstance(decay, Exponential):
        scale = 1.0 / decay.rate
    elif isinstance(decay, PowerLaw):
        if decay.p <= 1:
            raise ValueError("power-law decay needs p > 1")
        scale = max(abs(a), 1.0)
    else:
        raise TypeError("decay must be Exponential or PowerLaw")
    if init_scale is not None:
        scale = init_scale

    total = 0.0
    err = 0.0
    neval = 0
    lo = a
    hi = a + 5 * scale
    prev_mag = None
    for chunk in range(max_chunks):
        r = adaptive_quad(f, lo, hi, rtol=tol * 0.2, atol=1e-300,
                          init_edges=np.linspace(lo, hi, 9))
        total += r.value
        err += r.abs_error_estimate
        neval += r.evaluations
        fend = float(np.abs(f(np.array([hi]))[0]))
        neval += 1
        if isinstance(decay, Exponential):
            tail = fend / decay.rate
        else:
            tail = fend * hi / (decay.p - 1)
        if prev_mag is not None and fend > 10.0 * prev_mag and fend > 1e-300:
            raise ConvergenceError("semi_infinite_quad: integrand not decaying as declared")
        prev_mag = max(fend, 1e-300)
        if tail <= 0.5 * tol * max(abs(total), 1e-300) or tail == 0.0:
            err += tail
            return QuadratureResult(value=total, abs_error_estimate=err, evaluations=neval)
        lo = hi
        if isinstance(decay, Exponential):
            hi = lo + 5 * scale
        else:
            hi = lo * 4.0
    raise ConvergenceError("semi_infinite_quad: tail bound not met within chunk budget")


def bracket_roots(g, a: float, b: float, grid=200, refine_tol: float = 1e-12,
                  include_even: bool = False):
    """Roots of a continuous scalar function located by sign changes.

    ``grid`` is either a point count (uniform sampling) or an explicit array of
    sample points (e.g. log-spaced toward an accumulation point).  Each sign
    change is refined by bisection (with a secant polish that never leaves the
    bracket) to relative width ``refine_tol``.  With ``include_even`` a
    derivative-sign pass additionally looks for touching (even-multiplicity)
    roots.  Returns a sorted list; empty if no roots.
    """
    if np.isscalar(grid):
        xs = np.linspace(a, b, int(grid))
    else:
        xs = np.asarray(grid, dtype=float)
        xs = xs[(xs >= a) & (xs <= b)]
        xs = np.unique(np.concatenate([[a], xs, [b]]))
    vals = np.array([g(x) for x in xs], dtype=float)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(_bisect(g, xs[i], xs[i + 1], vals[i], vals[i + 1], refine_tol))
    if include_even:
        dv = np.diff(vals)
        for i in np.nonzero(np.sign(dv[:-1]) * np.sign(dv[1:]) < 0)[0]:
            xc = xs[i + 1]
            # candidate extremum; count as (double) root only if g ~ 0 there
            span = max(abs(vals[i]), abs(vals[i + 2]))
            if abs(vals[i + 1]) < 1e-6 * max(span, 1e-300):
                roots.append(xc)
    return sorted(roots)


def _bisect(g, lo, hi, flo, fhi, refine_tol):
    for _ in range(300):
        if hi - lo <= refine_tol * max(abs(lo), abs(hi)) + 1e-300:
            break
        # secant proposal, fall back to midpoint if it leaves the bracket
        denom = fhi - flo
        xm = lo - flo * (hi - lo) / denom if denom != 0 else 0.5 * (lo + hi)
        if not (lo < xm < hi):
            xm = 0.5 * (lo + hi)
        # keep strict bisection progress
        xm = min(max(xm, lo + 0.1 * (hi - lo)), hi - 0.1 * (hi - lo))
        fm = g(xm)
        if fm == 0.0:
            return xm
        if np.sign(fm) == np.sign(flo):
            lo, flo = xm, fm
        else:
            hi, fhi = xm, fm
    return 0.5 * (lo + hi)


def winding_number(h, contour: RectContour, n_init: int = 16,
                   max_steps: int = 2_000_000, residual_tol: float = 0.05) -> int:
    """Winding of h around a rectangle by adaptive phase tracking.

    Marches counterclockwise, keeping every phase increment below pi/2 by
    step halving (steps regrow after successes).  The accumulated argument
    divided by 2*pi is rounded to the nearest integer; the rounding residual
    must be below ``residual_tol``.
    """
    c1, c2, c3, c4 = contour.corners()
    path = [(c1, c2), (c2, c3), (c3, c4), (c4, c1)]
    total = 0.0
    nsteps = 0
    val0 = complex(h(c1))
    _check_value(val0, c1)
    for z0, z1 in path:
        seg = z1 - z0
        t = 0.0
        dt = 1.0 / n_init
        vprev = complex(h(z0 + t * seg))
        _check_value(vprev, z0)
        while t < 1.0:
            dt = min(dt, 1.0 - t)
            accepted = False
            while not accepted:
                if dt < 1e-13:
                    raise PhaseTrackingError(
                        f"step underflow near {z0 + t * seg:.6e}; contour grazes a zero/pole")
                znew = z0 + (t + dt) * seg
                vnew = complex(h(znew))
                _check_value(vnew, znew)
                nsteps += 1
                if nsteps > max_steps:
                    raise PhaseTrackingError("phase tracking step budget exhausted")
                dphi = np.angle(vnew / vprev)
                if abs(dphi) < 0.5 * np.pi:
                    total += dphi
                    t += dt
                    vprev = vnew
                    dt *= 1.6
                    accepted = True
                else:
                    dt *= 0.5
    n_raw = total / (2 * np.pi)
    n = int(np.rint(n_raw))
    if abs(n_raw - n) >= residual_tol:
        raise WindingResidualError(f"winding residual {abs(n_raw - n):.3f} >= {residual_tol}")
    return n


def _check_value(v, z):
    if not np.isfinite(v.real) or not np.isfinite(v.imag) or v == 0:
        raise PhaseTrackingError(f"function not finite/nonzero on contour at {z:.6e}")
