"""Star products of copulas, classical and family-generalized.

The classical star product composes the Markov kernels of two copulas:

    (A * B)(u, v) = integral over t of d2 A(u, t) * d1 B(t, v) dt.

The generalized product replaces the pointwise multiplication with a
copula family C_t applied to the two conditional values:

    (A *_C B)(u, v) = integral of C_t(d2 A(u, t), d1 B(t, v)) dt,

which coincides with the classical product when C_t = Pi for a.e. t.

Products are computed by composite Gauss-Legendre quadrature with
breakpoint-aware subdivision and a two-level adaptive error estimate,
except where a structural fast path gives the result in closed form:

* identity-M: M is a two-sided unit for both products.
* zero-Pi: Pi absorbs the classical product on either side. Pi is NOT
  absorbing for the generalized product, so this path never fires there.
* W-closed-form: (A *(_C) W)(u, v) = u - A(u, 1 - v) and symmetrically,
  for any family, because the inner copula only ever sees 0/1 in the
  W slot.
* invertible-reduction: when the left factor is left invertible (or the
  right factor right invertible) its conditional is 0/1 valued, the
  family drops out, and the generalized product equals the classical one.
* shuffle-closed-form: a shuffle factor turns the integral into a finite
  sum of increments of the other factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .copulas import (
    ConstructionError,
    Copula,
    CopulaError,
    FrechetM,
    FrechetW,
    PI,
    ProductPi,
    ShuffleOfM,
    TransposedCopula,
)

__all__ = [
    "QuadratureConfig",
    "ProductResult",
    "NonConvergenceError",
    "ComputedCopula",
    "ShuffleStarProduct",
    "WRightProduct",
    "WLeftProduct",
    "star",
    "star_c",
    "invertible_reduction",
    "shuffle_star",
    "integrate",
    "FAST_PATHS",
]

FAST_PATHS = (
    "none",
    "identity-M",
    "zero-Pi",
    "W-closed-form",
    "invertible-reduction",
    "shuffle-closed-form",
)

# memory cap for one integrand evaluation batch (elements, not bytes)
_CHUNK_ELEMENTS = 1 << 21

# points probed to attach an error estimate to a quadrature product
_PROBES = ((0.25, 0.25), (0.5, 0.5), (0.75, 0.25), (0.3, 0.7), (0.9, 0.6))


class NonConvergenceError(CopulaError, RuntimeError):
    """Adaptive quadrature failed to meet its tolerance at max depth."""

    def __init__(self, interval, err, tol):
        self.interval = interval
        self.err = err
        self.tol = tol
        super().__init__(
            f"quadrature did not converge on [{interval[0]:.9g}, "
            f"{interval[1]:.9g}]: estimate {err:.3e} > tol {tol:.3e}"
        )


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the composite Gauss-Legendre product integrator.

    The unit interval is first split at ``base_subintervals`` uniform
    points plus every known breakpoint; each piece gets a
    ``nodes_per_subinterval``-point rule. A piece whose two-level
    estimate (rule vs. bisected rule) exceeds its share of
    ``adaptive_tol`` is bisected, at most ``max_depth`` times.
    """

    base_subintervals: int = 64
    nodes_per_subinterval: int = 16
    extra_breakpoints: tuple = ()
    adaptive_tol: float = 1e-8
    max_depth: int = 12

    def __post_init__(self):
        if self.base_subintervals < 1:
            raise ConstructionError("base_subintervals must be >= 1")
        if self.nodes_per_subinterval < 2:
            raise ConstructionError("nodes_per_subinterval must be >= 2")
        if not self.adaptive_tol > 0.0:
            raise ConstructionError("adaptive_tol must be positive")
        if self.max_depth < 0:
            raise ConstructionError("max_depth must be >= 0")
        object.__setattr__(
            self, "extra_breakpoints", tuple(float(b) for b in self.extra_breakpoints)
        )


@dataclass(frozen=True)
class ProductResult:
    """A star product: its evaluator plus how it was obtained."""

    copula: Copula
    fast_path: str
    error_estimate: float
    config: QuadratureConfig


@lru_cache(maxsize=8)
def _gl(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def _initial_edges(breakpoints, q: QuadratureConfig):
    base = np.arange(q.base_subintervals + 1) / q.base_subintervals
    pts = [base]
    extra = [
        float(b)
        for b in tuple(q.extra_breakpoints) + tuple(breakpoints)
        if np.isfinite(b) and 0.0 < float(b) < 1.0
    ]
    if extra:
        pts.append(np.asarray(extra, dtype=float))
    e = np.unique(np.concatenate(pts))
    # merge nearly coincident cut points so no subinterval degenerates
    keep = np.concatenate(([True], np.diff(e) > 1e-14))
    e = e[keep]
    e[0] = 0.0
    e[-1] = 1.0
    return e


def _segment_values(fbatch, segs, nodes, weights, chunk):
    """Gauss-Legendre value of fbatch over each (a, b) segment.

    Segments are evaluated in order but batched into single fbatch
    calls of at most ``chunk`` nodes to bound memory.
    """
    out = []
    buf_ts, buf_hw, count = [], [], 0

    def flush():
        nonlocal buf_ts, buf_hw, count
        if not buf_ts:
            return
        fv = fbatch(np.concatenate(buf_ts))
        off = 0
        n = len(nodes)
        for hw in buf_hw:
            out.append(hw * (weights @ fv[off : off + n]))
            off += n
        buf_ts, buf_hw, count = [], [], 0

    for a, b in segs:
        hw = 0.5 * (b - a)
        buf_ts.append(hw * nodes + 0.5 * (a + b))
        buf_hw.append(hw)
        count += len(nodes)
        if count >= chunk:
            flush()
    flush()
    return out


def _integrate_batch(fbatch, breakpoints, q: QuadratureConfig, width: int):
    """Integrate a vector-valued function over [0, 1].

    fbatch maps a node array (k,) to values (k, width). Returns the
    (width,) integral and a scalar error estimate valid for every
    component (sum over pieces of the max-norm two-level defect).
    """
    nodes, weights = _gl(q.nodes_per_subinterval)
    edges = _initial_edges(breakpoints, q)
    tol0 = q.adaptive_tol / (len(edges) - 1)
    chunk = max(3 * len(nodes), _CHUNK_ELEMENTS // max(width, 1))
    # work items: (a, b, depth, value of the n-point rule on [a, b] if known)
    work = [(float(a), float(b), 0, None) for a, b in zip(edges[:-1], edges[1:])]
    accepted = []
    while work:
        segs = []
        for a, b, depth, pval in work:
            mid = 0.5 * (a + b)
            if pval is None:
                segs.append((a, b))
            segs.append((a, mid))
            segs.append((mid, b))
        vals = _segment_values(fbatch, segs, nodes, weights, chunk)
        pos = 0
        nxt = []
        for a, b, depth, pval in work:
            if pval is None:
                pval = vals[pos]
                pos += 1
            left, right = vals[pos], vals[pos + 1]
            pos += 2
            fine = left + right
            err = float(np.max(np.abs(pval - fine)))
            # each bisection halves the budget so the total stays bounded
            if err <= tol0 / (1 << depth):
                accepted.append((a, fine, err))
            elif depth >= q.max_depth:
                raise NonConvergenceError((a, b), err, tol0 / (1 << depth))
            else:
                mid = 0.5 * (a + b)
                nxt.append((a, mid, depth + 1, left))
                nxt.append((mid, b, depth + 1, right))
        work = nxt
    accepted.sort(key=lambda rec: rec[0])
    total = np.zeros(width)
    err_sum = 0.0
    for _, v, e in accepted:
        total += v
        err_sum += e
    return total, err_sum


def integrate(f, breakpoints=(), q: QuadratureConfig | None = None):
    """(value, error_estimate) of a scalar function on [0, 1]."""
    qq = q if q is not None else QuadratureConfig()

    def fbatch(ts):
        return np.asarray([float(f(t)) for t in ts]).reshape(-1, 1)

    total, err = _integrate_batch(fbatch, breakpoints, qq, 1)
    return float(total[0]), err


def _make_integrand(A: Copula, family, B: Copula, xs, ys):
    X = xs.reshape(1, -1)
    Y = ys.reshape(1, -1)

    def fbatch(ts):
        T = ts.reshape(-1, 1)
        s = np.clip(A._d2(X, T), 0.0, 1.0)
        r = np.clip(B._d1(T, Y), 0.0, 1.0)
        if family is None:
            return s * r
        return family.eval_grid(ts, s, r)

    return fbatch


def _product_points_eval(A, family, B, xs, ys, q):
    """Quadrature values of the (generalized) product at flat points.

    Points sharing a coordinate on the side with the richer breakpoint
    structure are integrated together so the subdivision is built once
    per group. Returns (values, worst per-point error estimate).
    """
    m = xs.size
    out = np.empty(m)
    fam_breaks = tuple(family.breakpoints()) if family is not None else ()
    kA = len(A.d2_breakpoints(0.375))
    kB = len(B.d1_breakpoints(0.375))
    worst = 0.0
    if kA == 0 and kB == 0:
        fb = _make_integrand(A, family, B, xs, ys)
        vals, worst = _integrate_batch(fb, fam_breaks, q, m)
        out[:] = vals
    else:
        keys = xs if kA >= kB else ys
        for val in np.unique(keys):
            mask = keys == val
            xs_g, ys_g = xs[mask], ys[mask]
            breaks = list(fam_breaks)
            if kA >= kB:
                breaks += list(A.d2_breakpoints(float(val)))
                if kB:
                    for yv in np.unique(ys_g):
                        breaks += list(B.d1_breakpoints(float(yv)))
            else:
                breaks += list(B.d1_breakpoints(float(val)))
                if kA:
                    for xv in np.unique(xs_g):
                        breaks += list(A.d2_breakpoints(float(xv)))
            fb = _make_integrand(A, family, B, xs_g, ys_g)
            vals, err = _integrate_batch(fb, tuple(breaks), q, int(mask.sum()))
            out[mask] = vals
            worst = max(worst, err)
    return np.clip(out, 0.0, 1.0), worst


class ComputedCopula(Copula):
    """Star product evaluated on demand by adaptive quadrature."""

    kind = "computed"

    def __init__(self, A: Copula, family, B: Copula, q: QuadratureConfig):
        self.A = A
        self.family = family
        self.B = B
        self.q = q

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        vals, _ = _product_points_eval(
            self.A, self.family, self.B, u.reshape(-1), v.reshape(-1), self.q
        )
        return vals.reshape(u.shape)

    def __repr__(self):
        inner = "" if self.family is None else f" family={self.family!r}"
        return f"<ComputedCopula A={self.A!r} B={self.B!r}{inner}>"


class ShuffleStarProduct(Copula):
    """(S * C) for a shuffle S: a finite sum of C-increments.

    The u-section of S carries slope 1 on finitely many t-intervals
    (lo_i(u), hi_i(u)), so the product integral collapses to
    sum_i C(hi_i, v) - C(lo_i, v).
    """

    kind = "computed"

    def __init__(self, S: ShuffleOfM, C: Copula):
        if not isinstance(S, ShuffleOfM):
            raise ConstructionError(f"left factor must be a shuffle, got {S!r}")
        self.S = S
        self.C = C

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros_like(u, dtype=float)
        S = self.S
        inner = self.C._cdf
        for i in range(S.n_pieces):
            c = np.clip(u - S._s0[i], 0.0, S._w[i])
            if S._flip[i]:
                lo, hi = S._t1[i] - c, np.asarray(S._t1[i])
            else:
                lo, hi = np.asarray(S._t0[i]), S._t0[i] + c
            out += inner(hi, v) - inner(lo, v)
        return np.clip(out, 0.0, 1.0)

    def __repr__(self):
        return f"<ShuffleStarProduct S={self.S!r} C={self.C!r}>"


class WRightProduct(Copula):
    """(A * W)(u, v) = u - A(u, 1 - v); W reverses the second law."""

    kind = "computed"

    def __init__(self, A: Copula):
        self.A = A

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.clip(u - self.A._cdf(u, 1.0 - v), 0.0, 1.0)

    def __repr__(self):
        return f"<WRightProduct A={self.A!r}>"


class WLeftProduct(Copula):
    """(W * B)(u, v) = v - B(1 - u, v)."""

    kind = "computed"

    def __init__(self, B: Copula):
        self.B = B

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.clip(v - self.B._cdf(1.0 - u, v), 0.0, 1.0)

    def __repr__(self):
        return f"<WLeftProduct B={self.B!r}>"


def shuffle_star(S: ShuffleOfM, C: Copula) -> Copula:
    """Closed-form star product with a shuffle on the left."""
    return ShuffleStarProduct(S, C)


def _probe_error(cop: ComputedCopula) -> float:
    xs = np.asarray([p[0] for p in _PROBES])
    ys = np.asarray([p[1] for p in _PROBES])
    _, err = _product_points_eval(cop.A, cop.family, cop.B, xs, ys, cop.q)
    return err


def _quadrature_result(A, family, B, q) -> ProductResult:
    cop = ComputedCopula(A, family, B, q)
    return ProductResult(cop, "none", _probe_error(cop), q)


def star(A: Copula, B: Copula, q: QuadratureConfig | None = None,
         *, fast_paths: bool = True) -> ProductResult:
    """Classical star product A * B.

    Fast paths, in precedence order: identity-M, zero-Pi, W closed
    form (right factor checked first), shuffle closed form. Pass
    fast_paths=False to force raw quadrature.
    """
    qq = q if q is not None else QuadratureConfig()
    if fast_paths:
        if isinstance(A, FrechetM):
            return ProductResult(B, "identity-M", 0.0, qq)
        if isinstance(B, FrechetM):
            return ProductResult(A, "identity-M", 0.0, qq)
        if isinstance(A, ProductPi) or isinstance(B, ProductPi):
            return ProductResult(PI, "zero-Pi", 0.0, qq)
        if isinstance(B, FrechetW):
            return ProductResult(WRightProduct(A), "W-closed-form", 0.0, qq)
        if isinstance(A, FrechetW):
            return ProductResult(WLeftProduct(B), "W-closed-form", 0.0, qq)
        if isinstance(A, ShuffleOfM):
            return ProductResult(ShuffleStarProduct(A, B), "shuffle-closed-form", 0.0, qq)
        if isinstance(B, ShuffleOfM):
            flipped = ShuffleStarProduct(B.transpose(), A.transpose())
            return ProductResult(
                TransposedCopula(flipped), "shuffle-closed-form", 0.0, qq
            )
    return _quadrature_result(A, None, B, qq)


def star_c(A: Copula, family, B: Copula, q: QuadratureConfig | None = None,
           *, fast_paths: bool = True) -> ProductResult:
    """Generalized star product A *_C B over a copula family.

    Precedence: identity-M, W closed form, invertible reduction (which
    subsumes shuffle factors), then quadrature. There is no zero-Pi
    path: Pi factors do not absorb the generalized product.
    """
    qq = q if q is not None else QuadratureConfig()
    if fast_paths:
        if isinstance(A, FrechetM):
            return ProductResult(B, "identity-M", 0.0, qq)
        if isinstance(B, FrechetM):
            return ProductResult(A, "identity-M", 0.0, qq)
        if isinstance(B, FrechetW):
            return ProductResult(WRightProduct(A), "W-closed-form", 0.0, qq)
        if isinstance(A, FrechetW):
            return ProductResult(WLeftProduct(B), "W-closed-form", 0.0, qq)
        if A.left_invertible or B.right_invertible:
            inner = star(A, B, qq)
            return ProductResult(
                inner.copula, "invertible-reduction", inner.error_estimate, qq
            )
    return _quadrature_result(A, family, B, qq)


def invertible_reduction(A: Copula, family, B: Copula,
                         q: QuadratureConfig | None = None) -> ProductResult:
    """Reduce A *_C B to A * B when an invertible factor is present.

    Valid because an invertible factor has a 0/1-valued conditional,
    which pins the family evaluation to its arguments' product.
    """
    if not (A.left_invertible or B.right_invertible):
        raise ConstructionError(
            "invertible reduction needs a left-invertible left factor "
            "or a right-invertible right factor"
        )
    qq = q if q is not None else QuadratureConfig()
    inner = star(A, B, qq)
    return ProductResult(inner.copula, "invertible-reduction", inner.error_estimate, qq)
