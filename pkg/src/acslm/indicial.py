"""Harmonic growth exponents and weighted harmonic-function counting.

On an exact cone dr^2 + r^2 g_M over a link (M, g_M), separation of
variables turns each link eigenvalue lambda into two radial exponents
a+(lambda) >= 0 >= 2-n >= a-(lambda), the roots of a(a + n - 2) = lambda:
f r^a is harmonic for an eigenfunction f.  The weighted Laplacian on
functions is Fredholm exactly away from the induced exceptional weights
{-a+(lambda)} u {-a-(lambda)}, and the dimension of the space of harmonic
functions bounded by r^(-delta) is obtained by counting growing-branch
models end by end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError, WeightError
from .link_spectrum import LinkSpectrum

#: two weights closer than this are considered equal when deduplicating
DEDUP_TOL = 1e-10

#: a weight closer than this to an exceptional value is rejected
EXCEPTIONAL_TOL = 1e-9


@dataclass(frozen=True)
class GrowthExponents:
    """Radial exponents of the separated harmonic models r^(a+-) f."""

    lam: float
    n: int
    a_plus: float
    a_minus: float


@dataclass(frozen=True)
class WeightSource:
    """Provenance of one exceptional weight: which eigenvalue and branch produced it."""

    branch: str  # "a_plus" | "a_minus"
    lam: float
    end: int


@dataclass(frozen=True)
class ExceptionalWeight:
    value: float
    sources: tuple[WeightSource, ...]


@dataclass(frozen=True)
class ExceptionalWeights:
    """Sorted, deduplicated exceptional weights with per-weight provenance."""

    weights: tuple[ExceptionalWeight, ...]

    @property
    def values(self) -> list[float]:
        return [w.value for w in self.weights]

    def to_json(self) -> str:
        payload = [
            {
                "weight": w.value,
                "sources": [
                    {"branch": s.branch, "lambda": s.lam, "end": s.end}
                    for s in w.sources
                ],
            }
            for w in self.weights
        ]
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class EndSpectra:
    """One link spectrum per end of the manifold."""

    spectra: tuple[LinkSpectrum, ...]
    n: int

    def __post_init__(self):
        if self.n <= 2:
            raise ValidationError(f"dimension n must exceed 2, got {self.n}")
        if len(self.spectra) < 1:
            raise ValidationError("at least one end is required")
        for i, spec in enumerate(self.spectra):
            if not spec.pairs:
                raise ValidationError(f"end {i} has an empty spectrum")

    @property
    def s(self) -> int:
        return len(self.spectra)


def growth_exponents(lam: float, n: int) -> GrowthExponents:
    """Roots a+- of a(a + n - 2) = lam, with a+ >= 0 >= 2-n >= a-."""
    if lam < 0:
        raise ValidationError(f"eigenvalue must be nonnegative, got {lam}")
    if n <= 2:
        raise ValidationError(f"dimension n must exceed 2, got {n}")
    disc = math.sqrt((2.0 - n) ** 2 + 4.0 * lam)
    a_plus = ((2.0 - n) + disc) / 2.0
    a_minus = ((2.0 - n) - disc) / 2.0
    return GrowthExponents(lam=lam, n=n, a_plus=a_plus, a_minus=a_minus)


def _iter_exponents(ends: EndSpectra) -> Iterable[tuple[int, float, int, GrowthExponents]]:
    for end, spec in enumerate(ends.spectra):
        for pair in spec.pairs:
            yield end, pair.lam, pair.mult, growth_exponents(pair.lam, ends.n)


def _coverage_floor(ends: EndSpectra) -> float:
    return min(spec.truncation for spec in ends.spectra)


def _require_coverage(ends: EndSpectra, a_needed: float, what: str):
    """Check the truncated spectra actually contain every eigenvalue whose
    growing exponent could reach ``a_needed``; a(a + n - 2) is increasing in a."""
    if a_needed <= 0:
        return
    lam_needed = a_needed * (a_needed + ends.n - 2)
    floor = _coverage_floor(ends)
    if lam_needed > floor + DEDUP_TOL:
        raise ValidationError(
            f"{what} requires link eigenvalues up to {lam_needed:.6g}, but a "
            f"supplied spectrum is truncated at {floor:.6g}"
        )


def exceptional_weights(
    ends: EndSpectra, window: Sequence[float]
) -> ExceptionalWeights:
    """All weights {-a+(lam)} u {-a-(lam)} over the end spectra inside ``window``.

    ``window`` is a closed interval [lo, hi]; weights are deduplicated to
    DEDUP_TOL with merged provenance.
    """
    lo, hi = float(window[0]), float(window[1])
    if lo > hi:
        raise ValidationError(f"window must satisfy lo <= hi, got [{lo}, {hi}]")
    # coverage: the a+ branch yields weights down to -a+ <= 0, the a- branch
    # weights -a-(lam) = (n-2+sqrt((n-2)^2+4 lam))/2 >= n-2
    _require_coverage(ends, -lo, f"window lower bound {lo}")
    if hi > ends.n - 2:
        lam_needed = hi * (hi - (ends.n - 2))
        floor = _coverage_floor(ends)
        if lam_needed > floor + DEDUP_TOL:
            raise ValidationError(
                f"window upper bound {hi} requires link eigenvalues up to "
                f"{lam_needed:.6g}, but a supplied spectrum is truncated at {floor:.6g}"
            )

    found: list[tuple[float, WeightSource]] = []
    for end, lam, _mult, exps in _iter_exponents(ends):
        for branch, a in (("a_plus", exps.a_plus), ("a_minus", exps.a_minus)):
            w = -a + 0.0  # normalize -0.0
            if lo - DEDUP_TOL <= w <= hi + DEDUP_TOL:
                found.append((w, WeightSource(branch=branch, lam=lam, end=end)))

    found.sort(key=lambda t: t[0])
    merged: list[ExceptionalWeight] = []
    for w, src in found:
        if merged and abs(w - merged[-1].value) <= DEDUP_TOL:
            merged[-1] = ExceptionalWeight(
                value=merged[-1].value, sources=merged[-1].sources + (src,)
            )
        else:
            merged.append(ExceptionalWeight(value=w, sources=(src,)))
    return ExceptionalWeights(weights=tuple(merged))


def check_nonexceptional(delta: float, ends: EndSpectra, tol: float = EXCEPTIONAL_TOL):
    """Raise WeightError if ``delta`` is within ``tol`` of an exceptional weight."""
    for _end, lam, _mult, exps in _iter_exponents(ends):
        for branch, a in (("a_plus", exps.a_plus), ("a_minus", exps.a_minus)):
            if abs(delta + a) <= tol:
                raise WeightError(
                    f"weight {delta} is exceptional: equals -{branch}({lam:g}) = {-a:g}",
                    value=-a,
                )


def dim_H0(delta: float, ends: EndSpectra) -> int:
    """Dimension of the space of harmonic functions bounded by r^(-delta).

    Counts growing-branch models with a+(lam) < -delta, end by end with
    multiplicity; each admissible model extends to a unique global harmonic
    function and purely decaying asymptotics force the zero function, so for
    delta > 0 the count is 0.
    """
    check_nonexceptional(delta, ends)
    _require_coverage(ends, -delta, f"dim_H0 at weight {delta}")
    total = 0
    for _end, _lam, mult, exps in _iter_exponents(ends):
        if exps.a_plus < -delta:
            total += mult
    return total


def sublinear_growth_exists(ends: EndSpectra) -> bool:
    """True iff some end carries an eigenvalue in the open interval (0, n-1).

    Equivalent to the existence of a harmonic function of strictly sub-linear
    growth, since 0 < a+ < 1 exactly when 0 < lambda < n - 1.
    """
    n = ends.n
    for spec in ends.spectra:
        for pair in spec.pairs:
            if 0.0 < pair.lam < n - 1:
                return True
    return False


def dim_E(eta: float, ends: EndSpectra) -> int:
    """Dimension of the space of exact 1-forms d f with f harmonic of weight eta - 1.

    For eta < 1 this is dim_H0(eta - 1) - 1 (constants differentiate to zero);
    for eta in (1, n-1) only functions constant on each end survive, giving s - 1.
    """
    n = ends.n
    if eta >= n - 1:
        raise WeightError(
            f"eta must be below n - 1 = {n - 1}, got {eta}", value=eta
        )
    check_nonexceptional(eta - 1.0, ends)
    if eta < 1.0:
        return dim_H0(eta - 1.0, ends) - 1
    return ends.s - 1


def first_exceptional_above(value: float, ends: EndSpectra) -> float | None:
    """Smallest exceptional weight strictly greater than ``value`` (None if the
    truncated spectra produce none)."""
    best = None
    for _end, lam, _mult, exps in _iter_exponents(ends):
        for a in (exps.a_plus, exps.a_minus):
            w = -a
            if w > value + DEDUP_TOL and (best is None or w < best):
                best = w
    return best


def validate_epsilon(epsilon: float, ends: EndSpectra):
    """Check the small weight used for the decaying-deformation count.

    Requires 0 < epsilon < 1, both epsilon and epsilon - 1 non-exceptional,
    and -1 + epsilon still inside the first weight gap above -1 (so the
    piecewise-constant count has stabilized to its small-epsilon value).
    """
    check_nonexceptional(epsilon, ends)
    check_nonexceptional(epsilon - 1.0, ends)
    if not (0.0 < epsilon < 1.0):
        raise WeightError(
            f"epsilon must lie in (0, 1), got {epsilon}", value=epsilon
        )
    # epsilon - 1 must not cross the first exceptional weight above -1
    _require_coverage(ends, 1.0, "epsilon validation")
    w1 = first_exceptional_above(-1.0, ends)
    if w1 is not None and epsilon - 1.0 >= w1 - EXCEPTIONAL_TOL:
        raise WeightError(
            f"epsilon = {epsilon} is too large: -1 + epsilon crosses the "
            f"exceptional weight {w1:.6g}; require epsilon < {w1 + 1.0:.6g}",
            value=w1,
        )
