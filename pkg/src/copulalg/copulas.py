"""Bivariate copulas with exact evaluators and a.e. partial derivatives.

Provides the Frechet bounds M and W, the independence copula Pi, the
one-parameter FGM family, shuffles of M (including straight shuffles),
checkerboard/grid copulas with CSV round-trip, transposition, and the
numerical utilities built on top of pointwise evaluation: rectangle
volumes, sup-distance on a lattice, discretization to a grid copula,
and a validation report (boundary conditions plus 2-increasingness).

Derivative convention: ``partial1``/``partial2`` return the one-sided
(right-hand) a.e. derivative in the differentiated variable, switching
to the left-hand derivative at the value 1, clamped into [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CopulaError",
    "DomainError",
    "ConstructionError",
    "FormatError",
    "Copula",
    "FrechetM",
    "FrechetW",
    "ProductPi",
    "FGMCopula",
    "ShuffleOfM",
    "StraightShuffle",
    "TransposedCopula",
    "GridCopula",
    "Rectangle",
    "Segment",
    "ValidationReport",
    "M",
    "W",
    "PI",
    "straight_shuffle",
    "shuffle_from_grid",
    "grid_from_copula",
    "sup_distance",
    "sup_distance_witness",
    "validate",
    "fd_partial1",
    "fd_partial2",
    "read_grid_csv",
    "write_grid_csv",
]

# Finite-difference step for copulas without an analytic derivative.
FD_STEP = 1e-5

# Tolerances for constructor-level mass checks on grid copulas.
GRID_MARGIN_TOL = 1e-10
CSV_MARGIN_TOL = 1e-6
SINKHORN_TOL = 1e-13


class CopulaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CopulaError, ValueError):
    """An argument left the unit interval or unit square."""


class ConstructionError(CopulaError, ValueError):
    """Parameters do not define a valid copula object."""


class FormatError(CopulaError, ValueError):
    """A serialized grid copula is malformed or inconsistent."""


def _unit(x, name: str):
    """Coerce to a float array and check it lies in [0, 1]."""
    a = np.asarray(x, dtype=float)
    if a.size and (np.any(np.isnan(a)) or a.min() < 0.0 or a.max() > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return a


def _maybe_scalar(out, *inputs):
    if all(np.isscalar(x) or np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


@dataclass(frozen=True)
class Rectangle:
    """Axis-parallel rectangle [x1, x2] x [y1, y2] inside the unit square."""

    x1: float
    x2: float
    y1: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "x2", "y1", "y2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0) or math.isnan(v):
                raise DomainError(f"rectangle coordinate {name}={v!r} outside [0, 1]")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise DomainError(
                f"rectangle must satisfy x1 <= x2 and y1 <= y2, "
                f"got ({self.x1}, {self.x2}, {self.y1}, {self.y2})"
            )


@dataclass(frozen=True)
class Segment:
    """Closed line segment from (x0, y0) to (x1, y1)."""

    x0: float
    y0: float
    x1: float
    y1: float


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the numerical copula axioms check.

    max_boundary_error is the largest deviation from C(u,0)=C(0,v)=0,
    C(u,1)=u, C(1,v)=v over the lattice edge; min_volume is the most
    negative cell volume found (2-increasingness wants it >= 0 up to
    rounding); max_lipschitz_excess measures violations of the
    1-Lipschitz property along lattice rows and columns.
    """

    passed: bool
    max_boundary_error: float
    min_volume: float
    max_lipschitz_excess: float
    lattice: int
    tol: float


class Copula:
    """Abstract bivariate copula.

    Subclasses implement ``_cdf`` (vectorized, no domain checks) and may
    override ``_d1``/``_d2`` with analytic a.e. derivatives. The public
    methods validate domains and accept scalars or arrays.
    """

    kind = "abstract"
    left_invertible = False
    right_invertible = False

    def _cdf(self, u, v):
        raise NotImplementedError

    def _d1(self, u, v):
        # default: central finite differences through the evaluator
        return fd_partial1(self, u, v)

    def _d2(self, u, v):
        return fd_partial2(self, u, v)

    def eval(self, u, v):
        """C(u, v) for u, v in [0, 1]; scalars or broadcastable arrays."""
        uu = _unit(u, "u")
        vv = _unit(v, "v")
        return _maybe_scalar(self._cdf(uu, vv), u, v)

    def __call__(self, u, v):
        return self.eval(u, v)

    def volume(self, rect: Rectangle) -> float:
        """C-volume of ``rect``; nonnegative up to rounding for a copula."""
        c = self._cdf
        return float(
            c(np.float64(rect.x2), np.float64(rect.y2))
            - c(np.float64(rect.x2), np.float64(rect.y1))
            - c(np.float64(rect.x1), np.float64(rect.y2))
            + c(np.float64(rect.x1), np.float64(rect.y1))
        )

    def partial1(self, u, v):
        """a.e. derivative of C in the first argument, clamped to [0, 1]."""
        uu = _unit(u, "u")
        vv = _unit(v, "v")
        out = np.clip(self._d1(uu, vv), 0.0, 1.0)
        return _maybe_scalar(out, u, v)

    def partial2(self, u, v):
        """a.e. derivative of C in the second argument, clamped to [0, 1]."""
        uu = _unit(u, "u")
        vv = _unit(v, "v")
        out = np.clip(self._d2(uu, vv), 0.0, 1.0)
        return _maybe_scalar(out, u, v)

    def transpose(self) -> "Copula":
        """The copula (u, v) -> C(v, u)."""
        return TransposedCopula(self)

    # Quadrature hints: t-values where t -> partial2(u, t) (resp.
    # t -> partial1(t, v)) may jump or kink. Empty means smooth.
    def d2_breakpoints(self, u: float):
        return ()

    def d1_breakpoints(self, v: float):
        return ()

    def __repr__(self):
        return f"<{type(self).__name__}>"


class FrechetM(Copula):
    """Upper Frechet bound M(u, v) = min(u, v), the comonotone copula."""

    kind = "FrechetM"
    left_invertible = True
    right_invertible = True

    def _cdf(self, u, v):
        return np.minimum(u, v)

    def _d1(self, u, v):
        # right-hand slope is 1 strictly below v; left-hand at u=1 needs u <= v
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.where(u == 1.0, (u <= v) & (v >= 1.0), u < v).astype(float)

    def _d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.where(v == 1.0, (v <= u) & (u >= 1.0), v < u).astype(float)

    def transpose(self):
        return self

    def d2_breakpoints(self, u):
        return (float(u),)

    def d1_breakpoints(self, v):
        return (float(v),)


class FrechetW(Copula):
    """Lower Frechet bound W(u, v) = max(u + v - 1, 0), countermonotone."""

    kind = "FrechetW"
    left_invertible = True
    right_invertible = True

    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def _d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        # slope 1 on u > 1-v (right-hand includes equality), at u=1 needs v > 0
        return np.where(u == 1.0, v > 0.0, u + v >= 1.0).astype(float)

    def _d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.where(v == 1.0, u > 0.0, u + v >= 1.0).astype(float)

    def transpose(self):
        return self

    def d2_breakpoints(self, u):
        return (1.0 - float(u),)

    def d1_breakpoints(self, v):
        return (1.0 - float(v),)


class ProductPi(Copula):
    """Independence copula Pi(u, v) = u v."""

    kind = "ProductPi"

    def _cdf(self, u, v):
        return u * v

    def _d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return v.astype(float).copy()

    def _d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return u.astype(float).copy()

    def transpose(self):
        return self


class FGMCopula(Copula):
    """Farlie-Gumbel-Morgenstern copula.

    C(u, v) = u v + theta u v (1 - u)(1 - v) with theta in [-1, 1].
    theta = 0 gives Pi. The density 1 + theta (1 - 2u)(1 - 2v) is
    bounded, so both partials are smooth polynomials.
    """

    kind = "FGM"

    def __init__(self, theta: float):
        theta = float(theta)
        if math.isnan(theta) or not -1.0 <= theta <= 1.0:
            raise ConstructionError(f"FGM parameter must lie in [-1, 1], got {theta}")
        self.theta = theta

    def _cdf(self, u, v):
        return u * v * (1.0 + self.theta * (1.0 - u) * (1.0 - v))

    def _d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return v + self.theta * v * (1.0 - v) * (1.0 - 2.0 * u)

    def _d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return u + self.theta * u * (1.0 - u) * (1.0 - 2.0 * v)

    def transpose(self):
        return self

    def __repr__(self):
        return f"<FGMCopula theta={self.theta}>"


class ShuffleOfM(Copula):
    """Shuffle of M: the unit square is cut vertically, the strips are
    permuted, and mass is spread uniformly along the diagonal (or
    antidiagonal, per flip flag) of each relocated strip.

    Parameters
    ----------
    cuts : increasing sequence starting at 0 and ending at 1; the
        vertical cut points.
    sigma : permutation of 1..n; strip i of the source lands in slot
        sigma[i-1] of the target.
    flips : n booleans; True reverses strip i (antidiagonal support).
    """

    kind = "ShuffleOfM"
    left_invertible = True
    right_invertible = True

    # above this piece count, evaluation broadcasts over a pieces x points
    # matrix instead of looping
    _BATCH_PIECES = 32

    def __init__(self, cuts, sigma, flips=None):
        cuts = tuple(float(c) for c in cuts)
        if len(cuts) < 2 or cuts[0] != 0.0 or cuts[-1] != 1.0:
            raise ConstructionError(f"cuts must run from 0 to 1, got {cuts}")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConstructionError(f"cuts must be strictly increasing, got {cuts}")
        n = len(cuts) - 1
        sigma = tuple(int(s) for s in sigma)
        if sorted(sigma) != list(range(1, n + 1)):
            raise ConstructionError(
                f"sigma must be a permutation of 1..{n}, got {sigma}"
            )
        if flips is None:
            flips = (False,) * n
        flips = tuple(bool(f) for f in flips)
        if len(flips) != n:
            raise ConstructionError(f"need {n} flip flags, got {len(flips)}")

        self.cuts = cuts
        self.sigma = sigma
        self.flips = flips
        self.n_pieces = n

        widths = np.diff(np.asarray(cuts))
        # target cut j is the total width of strips landing in slots <= j
        inv = np.empty(n, dtype=int)
        for i, s in enumerate(sigma):
            inv[s - 1] = i
        tcuts = np.concatenate(([0.0], np.cumsum(widths[inv])))
        tcuts[-1] = 1.0

        self._s0 = np.asarray(cuts[:-1])
        self._w = widths
        self._t0 = tcuts[np.asarray(sigma) - 1]
        self._t1 = self._t0 + widths
        self._flip = np.asarray(flips, dtype=bool)
        self._tcuts = tcuts
        self._transposed = None

    def _cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros_like(u, dtype=float)
        if self.n_pieces <= self._BATCH_PIECES:
            for i in range(self.n_pieces):
                s0, w = self._s0[i], self._w[i]
                t0, t1 = self._t0[i], self._t1[i]
                a = u - s0
                if self._flip[i]:
                    out += np.maximum(
                        np.minimum(a, w) - np.maximum(t1 - v, 0.0), 0.0
                    )
                else:
                    out += np.clip(np.minimum(a, v - t0), 0.0, w)
            return out
        # many pieces (grid-unrolled shuffles): vectorize over piece
        # blocks sized to keep the pieces x points temporaries bounded
        uf = u.reshape(1, -1)
        vf = v.reshape(1, -1)
        acc = np.zeros(uf.shape[1])
        block = max(1, (1 << 22) // max(uf.shape[1], 1))
        for i0 in range(0, self.n_pieces, block):
            sl = slice(i0, min(i0 + block, self.n_pieces))
            s0 = self._s0[sl, None]
            w = self._w[sl, None]
            t0 = self._t0[sl, None]
            t1 = self._t1[sl, None]
            flip = self._flip[sl, None]
            a = uf - s0
            asc = np.clip(np.minimum(a, vf - t0), 0.0, w)
            desc = np.maximum(np.minimum(a, w) - np.maximum(t1 - vf, 0.0), 0.0)
            acc += np.where(flip, desc, asc).sum(axis=0)
        return acc.reshape(u.shape)

    def _d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.zeros_like(u, dtype=float)
        at_one = v == 1.0
        for i in range(self.n_pieces):
            s0, w = self._s0[i], self._w[i]
            t0, t1 = self._t0[i], self._t1[i]
            a = u - s0
            c = np.clip(a, 0.0, w)
            if self._flip[i]:
                d = t1 - v
                right = (d > 0.0) & (d <= c)
                left = (d >= 0.0) & (d < c)
            else:
                b = v - t0
                right = (b >= 0.0) & (b < w) & (b < a)
                left = (b > 0.0) & (b <= w) & (b <= a)
            out += np.where(at_one, left, right)
        return out

    def _d1(self, u, v):
        return self.transpose()._d2(v, u)

    def transpose(self):
        """Transpose of a shuffle is a shuffle (reflect the support)."""
        if self._transposed is None:
            n = self.n_pieces
            inv = [0] * n
            for i, s in enumerate(self.sigma):
                inv[s - 1] = i + 1
            tcuts = tuple(float(t) for t in self._tcuts)
            tflips = tuple(self.flips[inv[j] - 1] for j in range(n))
            t = ShuffleOfM(tcuts, tuple(inv), tflips)
            t._transposed = self
            self._transposed = t
        return self._transposed

    def support_segments(self):
        """Diagonal support segments, one per piece, left to right."""
        segs = []
        for i in range(self.n_pieces):
            s0, s1 = self._s0[i], self._s0[i] + self._w[i]
            t0, t1 = self._t0[i], self._t1[i]
            if self._flip[i]:
                segs.append(Segment(float(s0), float(t1), float(s1), float(t0)))
            else:
                segs.append(Segment(float(s0), float(t0), float(s1), float(t1)))
        return tuple(segs)

    def d2_breakpoints(self, u):
        u = float(u)
        pts = []
        for i in range(self.n_pieces):
            c = min(max(u - self._s0[i], 0.0), self._w[i])
            if self._flip[i]:
                pts += [self._t1[i] - c, self._t1[i]]
            else:
                pts += [self._t0[i], self._t0[i] + c]
        return tuple(pts)

    def d1_breakpoints(self, v):
        return self.transpose().d2_breakpoints(v)

    def __repr__(self):
        return (
            f"<ShuffleOfM cuts={self.cuts} sigma={self.sigma} "
            f"flips={tuple(int(f) for f in self.flips)}>"
        )


class StraightShuffle(ShuffleOfM):
    """Straight shuffle: swap the two strips [0, 1-alpha] and [1-alpha, 1]
    without reflection. alpha in {0, 1} degenerates to M.
    """

    kind = "StraightShuffle"

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if math.isnan(alpha) or not 0.0 <= alpha <= 1.0:
            raise ConstructionError(f"alpha must lie in [0, 1], got {alpha}")
        self.alpha = alpha
        if alpha in (0.0, 1.0):
            super().__init__((0.0, 1.0), (1,), (False,))
        else:
            super().__init__((0.0, 1.0 - alpha, 1.0), (2, 1), (False, False))

    def transpose(self):
        return StraightShuffle(1.0 - self.alpha)

    def __repr__(self):
        return f"<StraightShuffle alpha={self.alpha}>"


def straight_shuffle(alpha: float) -> StraightShuffle:
    """Build the straight shuffle with parameter alpha in [0, 1]."""
    return StraightShuffle(alpha)


class TransposedCopula(Copula):
    """Lazy transpose wrapper: C^T(u, v) = C(v, u)."""

    kind = "Transpose"

    def __init__(self, inner: Copula):
        self.inner = inner
        self.left_invertible = inner.right_invertible
        self.right_invertible = inner.left_invertible

    def _cdf(self, u, v):
        return self.inner._cdf(v, u)

    def _d1(self, u, v):
        return self.inner._d2(v, u)

    def _d2(self, u, v):
        return self.inner._d1(v, u)

    def transpose(self):
        return self.inner

    def d2_breakpoints(self, u):
        return self.inner.d1_breakpoints(u)

    def d1_breakpoints(self, v):
        return self.inner.d2_breakpoints(v)

    def __repr__(self):
        return f"<TransposedCopula of {self.inner!r}>"


class GridCopula(Copula):
    """Checkerboard copula from an N x N mass matrix.

    mass[i][j] is the probability of cell [i/N, (i+1)/N] x [j/N, (j+1)/N]
    spread uniformly; both marginals of each row/column band must equal
    1/N. Evaluation is the bilinear interpolant of the cumulative mass,
    which is exactly the checkerboard cdf.
    """

    kind = "GridCopula"

    def __init__(self, mass):
        m = np.array(mass, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ConstructionError(f"mass must be square, got shape {m.shape}")
        if np.any(np.isnan(m)) or m.min() < -1e-12:
            raise ConstructionError("mass entries must be nonnegative")
        m[m < 0.0] = 0.0
        n = m.shape[0]
        rows = m.sum(axis=1)
        cols = m.sum(axis=0)
        err = max(np.abs(rows - 1.0 / n).max(), np.abs(cols - 1.0 / n).max())
        if err > GRID_MARGIN_TOL:
            raise ConstructionError(
                f"marginals deviate from 1/{n} by {err:.3e} (tol {GRID_MARGIN_TOL})"
            )
        self.n = n
        self.mass = m
        # cumulative H[i, j] = C(i/n, j/n)
        h = np.zeros((n + 1, n + 1))
        h[1:, 1:] = m.cumsum(axis=0).cumsum(axis=1)
        self._h = h

    def _cdf(self, u, v):
        n = self.n
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        iu = np.clip((u * n).astype(int), 0, n - 1)
        iv = np.clip((v * n).astype(int), 0, n - 1)
        fu = u * n - iu
        fv = v * n - iv
        h = self._h
        return (
            h[iu, iv] * (1 - fu) * (1 - fv)
            + h[iu + 1, iv] * fu * (1 - fv)
            + h[iu, iv + 1] * (1 - fu) * fv
            + h[iu + 1, iv + 1] * fu * fv
        )

    def transpose(self):
        return GridCopula(self.mass.T)

    def d2_breakpoints(self, u):
        return tuple(np.arange(1, self.n) / self.n)

    def d1_breakpoints(self, v):
        return tuple(np.arange(1, self.n) / self.n)

    def __repr__(self):
        return f"<GridCopula n={self.n}>"


def fd_partial1(C: Copula, u, v, h: float = FD_STEP):
    """Finite-difference d/du of C, one-sided within h of the boundary."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    lo = np.clip(u - h, 0.0, 1.0)
    hi = np.clip(u + h, 0.0, 1.0)
    denom = hi - lo
    denom = np.where(denom == 0.0, 1.0, denom)
    return (C._cdf(hi, v) - C._cdf(lo, v)) / denom


def fd_partial2(C: Copula, u, v, h: float = FD_STEP):
    """Finite-difference d/dv of C, one-sided within h of the boundary."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    lo = np.clip(v - h, 0.0, 1.0)
    hi = np.clip(v + h, 0.0, 1.0)
    denom = hi - lo
    denom = np.where(denom == 0.0, 1.0, denom)
    return (C._cdf(u, hi) - C._cdf(u, lo)) / denom


# module-level singletons for the parameterless copulas
M = FrechetM()
W = FrechetW()
PI = ProductPi()


def shuffle_from_grid(grid: GridCopula) -> ShuffleOfM:
    """Unroll a checkerboard into a shuffle of M with the same coarse cdf.

    Each cell (i, j) with mass m becomes an ascending piece of width m
    placed so that the piece's u-interval sits inside column band i (cells
    ordered by j) and its v-interval inside row band j (cells ordered by
    i). The resulting shuffle S satisfies sup |S - C| <= 4 / n.
    """
    m = grid.mass
    n = grid.n
    cuts = [0.0]
    targets = []  # v-interval start per piece, in u order
    col_base = np.arange(n) / n
    row_off = np.vstack([np.zeros(n), m.cumsum(axis=0)[:-1]])  # offsets within row band
    for i in range(n):
        for j in range(n):
            w = m[i, j]
            if w <= 0.0:
                continue
            cuts.append(cuts[-1] + w)
            targets.append(col_base[j] + row_off[i, j])
    if not targets:
        raise ConstructionError("grid has no mass")
    cuts[-1] = 1.0
    order = sorted(range(len(targets)), key=targets.__getitem__)
    sigma = [0] * len(targets)
    for slot, piece in enumerate(order):
        sigma[piece] = slot + 1
    return ShuffleOfM(tuple(cuts), tuple(sigma))


def grid_from_copula(C: Copula, n: int) -> GridCopula:
    """Discretize C to an n x n checkerboard by exact cell volumes."""
    if not isinstance(n, int) or n < 1:
        raise ConstructionError(f"grid order must be a positive integer, got {n}")
    g = np.arange(n + 1) / n
    e = C._cdf(g[:, None], g[None, :])
    vols = e[1:, 1:] - e[1:, :-1] - e[:-1, 1:] + e[:-1, :-1]
    return GridCopula(vols)


def _lattice_values(C: Copula, n: int):
    g = np.arange(n + 1) / n
    return C._cdf(g[:, None], g[None, :])


def sup_distance(A: Copula, B: Copula, n: int = 32) -> float:
    """max |A - B| over the (n+1) x (n+1) uniform lattice."""
    return float(np.abs(_lattice_values(A, n) - _lattice_values(B, n)).max())


def sup_distance_witness(A: Copula, B: Copula, n: int = 32):
    """(deviation, (x, y)) at the first row-major maximizer of |A - B|."""
    g = np.arange(n + 1) / n
    d = np.abs(_lattice_values(A, n) - _lattice_values(B, n))
    flat = int(np.argmax(d))
    i, j = divmod(flat, n + 1)
    return float(d[i, j]), (float(g[i]), float(g[j]))


def validate(C: Copula, n: int = 64, tol: float = 1e-9) -> ValidationReport:
    """Check boundary conditions, 2-increasingness and the Lipschitz
    property of C on the (n+1) x (n+1) lattice.

    Passes iff the boundary error is <= tol, every cell volume is
    >= -tol, and no lattice increment exceeds the argument increment
    by more than tol.
    """
    g = np.arange(n + 1) / n
    e = _lattice_values(C, n)
    boundary = max(
        float(np.abs(e[:, n] - g).max()),
        float(np.abs(e[n, :] - g).max()),
        float(np.abs(e[:, 0]).max()),
        float(np.abs(e[0, :]).max()),
    )
    vols = e[1:, 1:] - e[1:, :-1] - e[:-1, 1:] + e[:-1, :-1]
    min_vol = float(vols.min())
    step = 1.0 / n
    du = np.abs(np.diff(e, axis=0))
    dv = np.abs(np.diff(e, axis=1))
    lip = float(max(du.max() - step, dv.max() - step, 0.0))
    # pass/fail gates on the axioms; the Lipschitz excess is advisory
    # (it follows from the other two for a true copula)
    passed = boundary <= tol and min_vol >= -tol
    return ValidationReport(
        passed=passed,
        max_boundary_error=boundary,
        min_volume=min_vol,
        max_lipschitz_excess=lip,
        lattice=n,
        tol=tol,
    )


def _sinkhorn(m: np.ndarray, n: int) -> np.ndarray:
    """Alternately rescale rows and columns toward marginals 1/n."""
    target = 1.0 / n
    for _ in range(200):
        rows = m.sum(axis=1, keepdims=True)
        if rows.min() <= 0.0:
            raise FormatError("a row of the grid has no mass; cannot renormalize")
        m = m * (target / rows)
        cols = m.sum(axis=0, keepdims=True)
        if cols.min() <= 0.0:
            raise FormatError("a column of the grid has no mass; cannot renormalize")
        m = m * (target / cols)
        err = max(
            np.abs(m.sum(axis=1) - target).max(),
            np.abs(m.sum(axis=0) - target).max(),
        )
        if err <= SINKHORN_TOL:
            return m
    raise FormatError(f"renormalization failed to reach {SINKHORN_TOL:.0e}")


def write_grid_csv(grid: GridCopula, path) -> None:
    """Serialize as 'N=<n>' followed by n comma-separated mass rows."""
    lines = [f"N={grid.n}"]
    for row in grid.mass:
        lines.append(",".join(repr(float(x)) for x in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> GridCopula:
    """Parse a grid file, verify marginals to 1e-6, renormalize exactly.

    Raises FormatError on malformed input, negative mass, or marginals
    off by more than 1e-6 per band.
    """
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read()
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("N="):
        raise FormatError("first line must be 'N=<order>'")
    try:
        n = int(lines[0][2:])
    except ValueError:
        raise FormatError(f"bad order {lines[0][2:]!r}") from None
    if n < 1:
        raise FormatError(f"order must be positive, got {n}")
    if len(lines) - 1 != n:
        raise FormatError(f"expected {n} mass rows, found {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:], start=1):
        parts = ln.split(",")
        if len(parts) != n:
            raise FormatError(f"row {k} has {len(parts)} entries, expected {n}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"row {k} contains a non-numeric entry") from None
        if any(math.isnan(x) or x < 0.0 for x in vals):
            raise FormatError(f"row {k} contains a negative or NaN mass")
        rows.append(vals)
    m = np.array(rows)
    target = 1.0 / n
    err = max(
        np.abs(m.sum(axis=1) - target).max(),
        np.abs(m.sum(axis=0) - target).max(),
    )
    if err > CSV_MARGIN_TOL:
        raise FormatError(
            f"marginals deviate from 1/{n} by {err:.3e} (tol {CSV_MARGIN_TOL})"
        )
    if err > SINKHORN_TOL:
        m = _sinkhorn(m, n)
    return GridCopula(m)
