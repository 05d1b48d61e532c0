"""One-parameter families t -> C_t of copulas on t in [0, 1].

A family supplies the inner copula used by the generalized star
product. Three shapes are supported:

* ``ConstantFamily``: the same copula for every t.
* ``PiecewiseConstantFamily``: finitely many members on right-closed,
  left-open pieces [t_{i-1}, t_i); t = 1 belongs to the last piece.
* ``FGMCurveFamily``: FGM copulas with a polynomial parameter curve
  theta(t), clipped into [-1, 1].

The first two are jointly measurable in the strong (piecewise /
"checkable") sense; the curve family is only known to be jointly
measurable in the wider sense, which is what ``measurability_class``
reports.
"""

from __future__ import annotations

import numpy as np

from .copulas import (
    ConstructionError,
    Copula,
    DomainError,
    FGMCopula,
    _maybe_scalar,
    _unit,
)

__all__ = [
    "CopulaFamily",
    "ConstantFamily",
    "PiecewiseConstantFamily",
    "FGMCurveFamily",
    "family_eval",
    "measurability_class",
    "ae_equal",
    "family_integral",
    "midpoint_fgm_approximation",
]

# strong class: families whose t-sections are checkable piecewise
CLASS_PIECEWISE = "Mc"
# wider class: jointly measurable families
CLASS_MEASURABLE = "Mu"

AE_EQUAL_TOL = 1e-12


class CopulaFamily:
    """Abstract measurable family of copulas indexed by t in [0, 1]."""

    kind = "abstract"
    measurability = CLASS_MEASURABLE

    def member_at(self, t: float) -> Copula:
        """The copula C_t."""
        raise NotImplementedError

    def eval_grid(self, ts, x, y):
        """C_{ts[k]}(x[k, :], y[k, :]) for a batch of rows.

        ts has shape (k,); x and y broadcast to (k, m). Used by the
        quadrature engine; no domain checks.
        """
        raise NotImplementedError

    def breakpoints(self):
        """Interior t-values where t -> C_t(x, y) may jump or kink."""
        return ()

    def eval(self, t, x, y):
        """C_t(x, y) with domain checks; scalars or arrays."""
        tt = _unit(t, "t")
        xx = _unit(x, "x")
        yy = _unit(y, "y")
        tt, xx, yy = np.broadcast_arrays(np.atleast_1d(tt), xx, yy)
        out = self.eval_grid(tt.reshape(-1), xx.reshape(-1, 1), yy.reshape(-1, 1))
        out = out.reshape(tt.shape)
        if np.ndim(t) == 0 and np.ndim(x) == 0 and np.ndim(y) == 0:
            return float(out.reshape(()))
        return _maybe_scalar(out, t, x, y)


class ConstantFamily(CopulaFamily):
    """C_t = member for all t."""

    kind = "constant"
    measurability = CLASS_PIECEWISE

    def __init__(self, member: Copula):
        if not isinstance(member, Copula):
            raise ConstructionError(f"member must be a Copula, got {member!r}")
        self.member = member

    def member_at(self, t):
        return self.member

    def eval_grid(self, ts, x, y):
        x, y = np.broadcast_arrays(x, y)
        out = self.member._cdf(x, y)
        if out.shape[0] != len(ts):
            out = np.broadcast_to(out, (len(ts),) + out.shape[1:]).copy()
        return out

    def __repr__(self):
        return f"<ConstantFamily member={self.member!r}>"


class PiecewiseConstantFamily(CopulaFamily):
    """Finitely many copulas on right-open pieces of [0, 1].

    cuts may be given with or without the 0 and 1 endpoints; members has
    one copula per piece. Member i rules [cuts[i], cuts[i+1]), the last
    piece also owns t = 1.
    """

    kind = "piecewise"
    measurability = CLASS_PIECEWISE

    def __init__(self, cuts, members):
        members = tuple(members)
        if not members:
            raise ConstructionError("need at least one member")
        for m in members:
            if not isinstance(m, Copula):
                raise ConstructionError(f"members must be Copulas, got {m!r}")
        cuts = tuple(float(c) for c in cuts)
        if cuts and not (cuts[0] == 0.0 and cuts[-1] == 1.0):
            # interior-only form
            cuts = (0.0,) + cuts + (1.0,)
        elif not cuts:
            cuts = (0.0, 1.0)
        if len(cuts) != len(members) + 1:
            raise ConstructionError(
                f"{len(members)} members need {len(members) + 1} cuts "
                f"(with endpoints), got {len(cuts)}"
            )
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConstructionError(f"cuts must increase strictly, got {cuts}")
        if cuts[0] != 0.0 or cuts[-1] != 1.0:
            raise ConstructionError(f"cuts must span [0, 1], got {cuts}")
        self.cuts = cuts
        self.members = members
        self._interior = np.asarray(cuts[1:-1])

    def _index(self, ts):
        # right-continuous selection; t = 1 falls in the last piece
        return np.searchsorted(self._interior, ts, side="right")

    def member_at(self, t):
        t = float(_unit(t, "t"))
        return self.members[int(self._index(t))]

    def eval_grid(self, ts, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = np.broadcast_shapes((len(ts), 1), x.shape)
        out = np.empty(shape)
        idx = self._index(np.asarray(ts))
        xb = np.broadcast_to(x, shape)
        yb = np.broadcast_to(y, shape)
        for k, member in enumerate(self.members):
            mask = idx == k
            if mask.any():
                out[mask] = member._cdf(xb[mask], yb[mask])
        return out

    def breakpoints(self):
        return tuple(self.cuts[1:-1])

    def __repr__(self):
        return f"<PiecewiseConstantFamily cuts={self.cuts} members={self.members!r}>"


class FGMCurveFamily(CopulaFamily):
    """FGM members with theta(t) = clip(polynomial(t), -1, 1).

    coeffs are polynomial coefficients in increasing degree order, so
    coeffs=(a, b, c) means theta(t) = a + b t + c t^2 before clipping.
    """

    kind = "fgm-curve"
    measurability = CLASS_MEASURABLE

    def __init__(self, coeffs):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ConstructionError("need at least one polynomial coefficient")
        if any(np.isnan(c) or np.isinf(c) for c in coeffs):
            raise ConstructionError(f"coefficients must be finite, got {coeffs}")
        self.coeffs = coeffs

    def theta(self, t):
        """Clipped parameter value(s) at t."""
        t = np.asarray(t, float)
        raw = np.polynomial.polynomial.polyval(t, self.coeffs)
        return np.clip(raw, -1.0, 1.0)

    def member_at(self, t):
        t = float(_unit(t, "t"))
        return FGMCopula(float(self.theta(t)))

    def eval_grid(self, ts, x, y):
        th = self.theta(np.asarray(ts)).reshape(-1, 1)
        return x * y * (1.0 + th * (1.0 - x) * (1.0 - y))

    def breakpoints(self):
        """Roots of theta(t) -/+ 1 in (0, 1): where clipping kicks in."""
        pts = set()
        for level in (-1.0, 1.0):
            shifted = np.asarray(self.coeffs, float).copy()
            shifted[0] -= level
            if np.any(shifted[1:] != 0.0):
                for r in np.polynomial.polynomial.polyroots(shifted):
                    if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0:
                        pts.add(float(r.real))
        return tuple(sorted(pts))

    def __repr__(self):
        return f"<FGMCurveFamily coeffs={self.coeffs}>"


def family_eval(F: CopulaFamily, t, x, y):
    """C_t(x, y); free-function alias for CopulaFamily.eval."""
    return F.eval(t, x, y)


def measurability_class(F: CopulaFamily) -> str:
    """'Mc' for piecewise-checkable families, 'Mu' for general ones."""
    if not isinstance(F, CopulaFamily):
        raise ConstructionError(f"not a copula family: {F!r}")
    return F.measurability


def _refined_samples(F: CopulaFamily, G: CopulaFamily):
    """One sample t inside each interval of the common cut refinement."""
    cuts = sorted(set((0.0, 1.0)) | set(F.breakpoints()) | set(G.breakpoints()))
    mids = [(a + b) / 2.0 for a, b in zip(cuts, cuts[1:])]
    return mids + [1.0]


def ae_equal(F: CopulaFamily, G: CopulaFamily, lattice: int = 32) -> bool:
    """Whether C^F_t == C^G_t off a null set of t.

    Samples one t per interval of the common breakpoint refinement
    (plus t=1) and compares members on a uniform (lattice+1)^2 grid to
    1e-12. Jumps exactly at sampled t's cannot hide: the families are
    constant or continuous between breakpoints. Two parameter curves
    are compared by their clipped theta values on a dense t grid.
    """
    if isinstance(F, FGMCurveFamily) and isinstance(G, FGMCurveFamily):
        ts = np.arange(33) / 32
        return bool(np.abs(F.theta(ts) - G.theta(ts)).max() <= AE_EQUAL_TOL)
    g = np.arange(lattice + 1) / lattice
    xg = np.tile(g, lattice + 1).reshape(1, -1)
    y = np.repeat(g, lattice + 1).reshape(1, -1)
    for t in _refined_samples(F, G):
        ts = np.asarray([t])
        a = F.eval_grid(ts, xg, y)
        b = G.eval_grid(ts, xg, y)
        if np.abs(a - b).max() > AE_EQUAL_TOL:
            return False
    return True


def family_integral(F: CopulaFamily, x, y, q=None):
    """integral over t in [0,1] of C_t(x, y) dt.

    Exact interval-weighted sums for constant and piecewise families;
    quadrature (with clip breakpoints) for parameter curves.
    """
    xx = _unit(x, "x")
    yy = _unit(y, "y")
    if isinstance(F, ConstantFamily):
        return _maybe_scalar(F.member._cdf(xx, yy), x, y)
    if isinstance(F, PiecewiseConstantFamily):
        out = 0.0
        for k, member in enumerate(F.members):
            w = F.cuts[k + 1] - F.cuts[k]
            out = out + w * member._cdf(xx, yy)
        return _maybe_scalar(out, x, y)
    if isinstance(F, FGMCurveFamily):
        from .products import QuadratureConfig, integrate

        qq = q if q is not None else QuadratureConfig()
        mean_theta, _ = integrate(
            lambda t: float(F.theta(t)), F.breakpoints(), qq
        )
        out = xx * yy * (1.0 + mean_theta * (1.0 - xx) * (1.0 - yy))
        return _maybe_scalar(out, x, y)
    raise ConstructionError(f"unsupported family kind {F.kind!r}")


def midpoint_fgm_approximation(curve: FGMCurveFamily, pieces: int) -> PiecewiseConstantFamily:
    """Piecewise-constant approximation of an FGM parameter curve.

    Splits [0, 1] into ``pieces`` equal intervals and freezes theta at
    each midpoint.
    """
    if pieces < 1:
        raise ConstructionError(f"need at least one piece, got {pieces}")
    cuts = np.arange(pieces + 1) / pieces
    mids = (cuts[:-1] + cuts[1:]) / 2.0
    members = [FGMCopula(float(curve.theta(m))) for m in mids]
    return PiecewiseConstantFamily(tuple(cuts), members)
