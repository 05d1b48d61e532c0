"""Verification experiments for the star-product algebra.

Each check returns a ``VerificationReport`` with a pass flag, the
maximum observed deviation, a witness point where that deviation was
attained, and the parameters used. Reports serialize to stable text
lines and JSON so repeated runs are byte-identical.

The experiments:

* ``check_identity``: M acts as a two-sided identity for the
  generalized product over a family, measured by raw quadrature.
* ``check_zero_necessary``: a family admitting a zero element must
  average to Pi, i.e. integral over t of C_t(x, y) dt = x y. This is
  necessary only; it does not certify that a zero exists.
* ``check_zero_candidate``: a sweep of straight shuffles eliminates
  any absorbing-element candidate other than Pi.
* ``fgm_counterexample``: an explicit FGM family that satisfies the
  necessary averaging condition while Pi still fails to be absorbing,
  so the condition is not sufficient.
* ``convergence_study``: products against piecewise-constant
  approximations of a parameter curve converge to the product against
  the curve itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .copulas import (
    ConstructionError,
    DomainError,
    FGMCopula,
    FrechetM,
    FrechetW,
    GridCopula,
    M,
    PI,
    ProductPi,
    ShuffleOfM,
    StraightShuffle,
    TransposedCopula,
    W,
    _lattice_values,
    sup_distance_witness,
)
from .families import (
    ConstantFamily,
    CopulaFamily,
    FGMCurveFamily,
    PiecewiseConstantFamily,
    family_integral,
    midpoint_fgm_approximation,
)
from .products import QuadratureConfig, star_c

__all__ = [
    "VerificationReport",
    "check_identity",
    "check_zero_necessary",
    "check_zero_candidate",
    "fgm_counterexample",
    "convergence_study",
    "copula_label",
    "family_label",
    "corpus_copulas",
    "corpus_families",
    "SUITES",
    "run_suite",
    "report_lines",
    "reports_to_text",
    "reports_to_json",
]

DEFAULT_LATTICE = 32
DEFAULT_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_COUNTEREXAMPLE_POINTS = ((0.25, 0.5), (0.5, 0.5), (0.75, 0.25))
DEFAULT_CONVERGENCE_PIECES = (4, 8, 16, 32, 64)


@dataclass(frozen=True)
class VerificationReport:
    """One experiment outcome; ``witness`` locates the worst deviation."""

    name: str
    passed: bool
    deviation: float
    witness: tuple | None
    params: dict


def _num(x) -> str:
    if isinstance(x, float):
        return f"{x:g}"
    return str(x)


def copula_label(C) -> str:
    """Short stable text for a copula, matching the expression syntax."""
    if isinstance(C, FrechetM):
        return "M"
    if isinstance(C, FrechetW):
        return "W"
    if isinstance(C, ProductPi):
        return "Pi"
    if isinstance(C, FGMCopula):
        return f"fgm({_num(C.theta)})"
    if isinstance(C, StraightShuffle):
        return f"straight({_num(C.alpha)})"
    if isinstance(C, ShuffleOfM):
        cuts = ",".join(_num(c) for c in C.cuts[1:-1])
        sigma = ",".join(str(s) for s in C.sigma)
        flips = ",".join("1" if f else "0" for f in C.flips)
        return f"shuffle({cuts}; {sigma}; {flips})"
    if isinstance(C, TransposedCopula):
        return f"t({copula_label(C.inner)})"
    if isinstance(C, GridCopula):
        return f"grid[{C.n}x{C.n}]"
    return C.kind


def family_label(F) -> str:
    """Short stable text for a family, matching the expression syntax."""
    if isinstance(F, ConstantFamily):
        return f"const({copula_label(F.member)})"
    if isinstance(F, PiecewiseConstantFamily):
        cuts = ",".join(_num(c) for c in F.cuts[1:-1])
        members = ", ".join(copula_label(m) for m in F.members)
        return f"pw({cuts}: {members})"
    if isinstance(F, FGMCurveFamily):
        return f"fgmcurve({','.join(_num(c) for c in F.coeffs)})"
    return F.kind


def corpus_copulas():
    """Default copulas exercised by identity/elimination experiments."""
    return (
        PI,
        W,
        FGMCopula(1.0),
        StraightShuffle(0.3),
        ShuffleOfM((0.0, 0.2, 0.7, 1.0), (3, 1, 2), (False, True, False)),
    )


def corpus_families():
    """Default families for the identity experiment."""
    return (
        ConstantFamily(PI),
        ConstantFamily(FGMCopula(1.0)),
        PiecewiseConstantFamily((0.5,), (FGMCopula(1.0), FGMCopula(-1.0))),
        FGMCurveFamily((-1.0, 2.0)),
    )


def check_identity(family: CopulaFamily, corpus=None, tol: float = 1e-5,
                   candidate=None, lattice: int = DEFAULT_LATTICE,
                   q: QuadratureConfig | None = None) -> VerificationReport:
    """Is ``candidate`` (default M) a two-sided unit over ``family``?

    Both product orders are computed by raw quadrature (fast paths off,
    so the law is actually exercised) against every corpus copula.
    """
    qq = q if q is not None else QuadratureConfig()
    e = candidate if candidate is not None else M
    corpus = tuple(corpus) if corpus is not None else corpus_copulas()
    worst = -1.0
    witness = None
    worst_case = ""
    for A in corpus:
        left = star_c(e, family, A, qq, fast_paths=False)
        right = star_c(A, family, e, qq, fast_paths=False)
        for side, prod in (("left", left), ("right", right)):
            dev, pt = sup_distance_witness(prod.copula, A, lattice)
            if dev > worst:
                worst = dev
                witness = pt
                worst_case = f"{side}:{copula_label(A)}"
    return VerificationReport(
        name=f"identity[{family_label(family)}]",
        passed=worst <= tol,
        deviation=worst,
        witness=witness,
        params={
            "candidate": copula_label(e),
            "corpus": ", ".join(copula_label(A) for A in corpus),
            "lattice": lattice,
            "tol": tol,
            "worst_case": worst_case,
        },
    )


def check_zero_necessary(family: CopulaFamily, tol: float = 1e-12,
                         lattice: int = DEFAULT_LATTICE,
                         q: QuadratureConfig | None = None) -> VerificationReport:
    """Does the family average to Pi: integral of C_t(x, y) dt = x y?

    A failing family cannot give its product a zero element. Passing
    proves nothing further (the condition is necessary only).
    """
    g = np.arange(lattice + 1) / lattice
    vals = family_integral(family, g[:, None], g[None, :], q=q)
    dev = np.abs(vals - g[:, None] * g[None, :])
    flat = int(np.argmax(dev))
    i, j = divmod(flat, lattice + 1)
    worst = float(dev[i, j])
    return VerificationReport(
        name=f"zero-necessary[{family_label(family)}]",
        passed=worst <= tol,
        deviation=worst,
        witness=(float(g[i]), float(g[j])),
        params={"lattice": lattice, "note": "necessary-only", "tol": tol},
    )


def check_zero_candidate(family: CopulaFamily, candidate,
                         alphas=DEFAULT_ALPHAS, tol: float = 1e-5,
                         lattice: int = DEFAULT_LATTICE,
                         q: QuadratureConfig | None = None) -> VerificationReport:
    """Can ``candidate`` absorb a sweep of straight shuffles?

    Passes iff straight(alpha) *_C candidate stays within tol of the
    candidate for every alpha. Only Pi survives the sweep; any other
    candidate is eliminated by some shuffle.
    """
    qq = q if q is not None else QuadratureConfig()
    worst = -1.0
    witness = None
    for a in alphas:
        prod = star_c(StraightShuffle(a), family, candidate, qq)
        dev, pt = sup_distance_witness(prod.copula, candidate, lattice)
        if dev > worst:
            worst = dev
            witness = (float(a), pt[0], pt[1])
    return VerificationReport(
        name=f"zero-candidate[{copula_label(candidate)}]",
        passed=worst <= tol,
        deviation=worst,
        witness=witness,
        params={
            "alphas": ",".join(_num(float(a)) for a in alphas),
            "family": family_label(family),
            "lattice": lattice,
            "tol": tol,
        },
    )


def fgm_counterexample(theta: float = 1.0, points=None, tol: float = 1e-5,
                       q: QuadratureConfig | None = None) -> VerificationReport:
    """Average-to-Pi holds, yet Pi fails to be absorbing.

    Uses the family that is fgm(theta) on [0, 1/2) and fgm(-theta) on
    [1/2, 1]: its t-average is exactly Pi, but fgm(theta) *_C Pi moves
    away from Pi by theta^2 x(1-x)(1/2-x) y(1-y). Passes iff that
    deviation is actually reproduced (> 10 tol) while the averaging
    condition holds.
    """
    theta = float(theta)
    if theta == 0.0:
        raise ConstructionError("theta=0 degenerates to Pi; no counterexample")
    if not -1.0 <= theta <= 1.0:
        raise ConstructionError(f"theta must lie in [-1, 1], got {theta}")
    pts = tuple(points) if points is not None else DEFAULT_COUNTEREXAMPLE_POINTS
    for x, y in pts:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise DomainError(f"point ({x}, {y}) outside the unit square")
    qq = q if q is not None else QuadratureConfig()
    family = PiecewiseConstantFamily((0.5,), (FGMCopula(theta), FGMCopula(-theta)))
    necessary = check_zero_necessary(family, tol=1e-9)
    prod = star_c(FGMCopula(theta), family, PI, qq)
    worst = -1.0
    witness = None
    params = {"theta": theta, "tol": tol, "necessary_dev": necessary.deviation}
    for x, y in pts:
        d = abs(prod.copula.eval(x, y) - x * y)
        params[f"dev({_num(float(x))},{_num(float(y))})"] = d
        if d > worst:
            worst = d
            witness = (float(x), float(y))
    return VerificationReport(
        name=f"fgm-counterexample[theta={_num(theta)}]",
        passed=bool(necessary.passed and worst > 10.0 * tol),
        deviation=worst,
        witness=witness,
        params=params,
    )


def convergence_study(curve: FGMCurveFamily, A, B,
                      pieces=DEFAULT_CONVERGENCE_PIECES,
                      tol_final: float = 1e-3, slack: float = 0.1,
                      lattice: int = DEFAULT_LATTICE,
                      q: QuadratureConfig | None = None) -> VerificationReport:
    """Products against midpoint discretizations approach the curve product.

    For each piece count, measures sup distance between
    A *_{approx} B and A *_{curve} B on the lattice. Passes iff the
    errors are non-increasing (up to 10 percent slack) and the last
    one is at most tol_final.
    """
    if len(pieces) < 2:
        raise ConstructionError("need at least two approximation levels")
    qq = q if q is not None else QuadratureConfig()
    target = star_c(A, curve, B, qq)
    tvals = _lattice_values(target.copula, lattice)
    g = np.arange(lattice + 1) / lattice
    errs = []
    last_witness = None
    for n in pieces:
        approx = midpoint_fgm_approximation(curve, int(n))
        avals = _lattice_values(star_c(A, approx, B, qq).copula, lattice)
        dev = np.abs(avals - tvals)
        flat = int(np.argmax(dev))
        i, j = divmod(flat, lattice + 1)
        errs.append(float(dev[i, j]))
        last_witness = (float(g[i]), float(g[j]))
    monotone = all(
        errs[k + 1] <= errs[k] * (1.0 + slack) for k in range(len(errs) - 1)
    )
    passed = monotone and errs[-1] <= tol_final
    params = {
        "A": copula_label(A),
        "B": copula_label(B),
        "curve": family_label(curve),
        "lattice": lattice,
        "slack": slack,
        "tol_final": tol_final,
    }
    for n, e in zip(pieces, errs):
        params[f"err_{int(n)}"] = e
    return VerificationReport(
        name=f"convergence[{family_label(curve)}; {copula_label(A)}, {copula_label(B)}]",
        passed=passed,
        deviation=errs[-1],
        witness=last_witness,
        params=params,
    )


# ---------------------------------------------------------------------------
# suites

SUITES = (
    "identity",
    "zero-necessary",
    "zero-candidate",
    "fgm",
    "convergence",
)


def _suite_identity(q, lattice, families=None):
    fams = tuple(families) if families is not None else corpus_families()
    return [check_identity(F, lattice=lattice, q=q) for F in fams]


def _suite_zero_necessary(q, lattice, families=None):
    reports = []
    if families is not None:
        return [check_zero_necessary(F, lattice=lattice, q=q) for F in families]
    for th in (0.1, 0.5, 1.0):
        fam = PiecewiseConstantFamily((0.5,), (FGMCopula(th), FGMCopula(-th)))
        reports.append(check_zero_necessary(fam, lattice=lattice, q=q))
    # a family that fails the averaging condition, reported as the
    # expectation that the check detects the failure
    bad = ConstantFamily(FGMCopula(1.0))
    r = check_zero_necessary(bad, lattice=lattice, q=q)
    detected = (
        not r.passed
        and abs(r.deviation - 0.0625) <= 1e-9
        and r.witness == (0.5, 0.5)
    )
    reports.append(
        VerificationReport(
            name=f"zero-necessary-violation[{family_label(bad)}]",
            passed=detected,
            deviation=r.deviation,
            witness=r.witness,
            params=dict(r.params, expected_dev=0.0625),
        )
    )
    return reports


def _suite_zero_candidate(q, lattice, family=None):
    fam = family if family is not None else PiecewiseConstantFamily(
        (0.5,), (FGMCopula(1.0), FGMCopula(-1.0))
    )
    reports = [check_zero_candidate(fam, PI, lattice=lattice, q=q)]
    for U in (M, W, FGMCopula(1.0)):
        r = check_zero_candidate(fam, U, lattice=lattice, q=q)
        reports.append(
            VerificationReport(
                name=f"zero-eliminates[{copula_label(U)}]",
                passed=bool(not r.passed and r.deviation >= 1e-2),
                deviation=r.deviation,
                witness=r.witness,
                params=dict(r.params, eliminate_threshold=1e-2),
            )
        )
    return reports


def _suite_fgm(q, thetas=None):
    ths = tuple(thetas) if thetas is not None else (0.1, 0.5, 1.0)
    return [fgm_counterexample(th, q=q) for th in ths]


def _suite_convergence(q, lattice):
    curve = FGMCurveFamily((-1.0, 2.0))
    return [
        convergence_study(curve, FGMCopula(0.5), FGMCopula(0.5),
                          lattice=lattice, q=q)
    ]


def run_suite(name: str, q: QuadratureConfig | None = None,
              lattice: int = DEFAULT_LATTICE, thetas=None, families=None):
    """Run one named suite (or 'all'); returns the report list."""
    qq = q if q is not None else QuadratureConfig()
    if name == "all":
        out = []
        for s in SUITES:
            out.extend(run_suite(s, qq, lattice, thetas=thetas, families=families))
        return out
    if name == "identity":
        return _suite_identity(qq, lattice, families=families)
    if name == "zero-necessary":
        return _suite_zero_necessary(qq, lattice, families=families)
    if name == "zero-candidate":
        fam = families[0] if families else None
        return _suite_zero_candidate(qq, lattice, family=fam)
    if name == "fgm":
        return _suite_fgm(qq, thetas=thetas)
    if name == "convergence":
        return _suite_convergence(qq, lattice)
    raise ConstructionError(f"unknown suite {name!r}; pick from {SUITES + ('all',)}")


# ---------------------------------------------------------------------------
# serialization

def _fmt_param(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_lines(reports):
    """Stable one-line-per-report text rendering."""
    lines = []
    for r in reports:
        wit = "-" if r.witness is None else \
            "(" + ", ".join(repr(float(w)) for w in r.witness) + ")"
        params = "; ".join(
            f"{k}={_fmt_param(r.params[k])}" for k in sorted(r.params)
        )
        lines.append(
            f"{r.name} | {'pass' if r.passed else 'FAIL'} | "
            f"deviation={r.deviation:.12e} | witness={wit} | {params}"
        )
    return lines


def reports_to_text(reports) -> str:
    return "\n".join(report_lines(reports)) + "\n"


def reports_to_json(reports) -> str:
    payload = {
        "reports": [
            {
                "name": r.name,
                "passed": r.passed,
                "deviation": r.deviation,
                "witness": list(r.witness) if r.witness is not None else None,
                "params": {k: r.params[k] for k in sorted(r.params)},
            }
            for r in reports
        ]
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
