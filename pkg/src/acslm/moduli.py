"""Dimension formulas for the deformation spaces of an asymptotically conical
special Lagrangian submanifold.

Inputs are purely spectral (one link spectrum per end) and topological
(cohomology of the compact core).  Decaying deformations have dimension
dim H^1 + dim_H0(-1 + eps) - 1; L2 deformations, valid under fast ambient
curvature decay, have dimension dim H^1_c.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import indicial
from .errors import ValidationError, WeightError
from .indicial import EndSpectra
from .topology import CohomologyReport

DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class ModuliInput:
    n: int
    ends: EndSpectra
    cohomology: CohomologyReport
    epsilon: float = DEFAULT_EPSILON
    l2_theorem_applicable: bool = True

    def __post_init__(self):
        if self.n != self.ends.n:
            raise ValidationError(
                f"dimension mismatch: n = {self.n} but end spectra carry n = {self.ends.n}"
            )
        if self.ends.s != self.cohomology.s:
            raise ValidationError(
                f"ends mismatch: {self.ends.s} spectra supplied but the complex "
                f"has {self.cohomology.s} boundary components"
            )
        indicial.validate_epsilon(self.epsilon, self.ends)


@dataclass(frozen=True)
class ModuliReport:
    dim_K1_eps: int
    dim_def_sl: int
    dim_def_sl_l2: int
    dim_K1_table: dict[float, int]
    epsilon: float
    l2_theorem_applicable: bool
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.dim_def_sl >= self.dim_def_sl_l2 >= 0):
            raise ValidationError(
                f"dimension ordering violated: {self.dim_def_sl} >= "
                f"{self.dim_def_sl_l2} >= 0 fails"
            )
        if self.dim_def_sl != self.dim_K1_eps:
            raise ValidationError(
                "decaying-deformation dimension must equal the small-weight "
                "1-form kernel dimension"
            )

    def to_jsonable(self) -> dict:
        return {
            "dim_K1_eps": self.dim_K1_eps,
            "dim_def_sl": self.dim_def_sl,
            "dim_def_sl_l2": self.dim_def_sl_l2,
            "dim_K1_table": {f"{d:g}": v for d, v in self.dim_K1_table.items()},
            "epsilon": self.epsilon,
            "l2_theorem_applicable": self.l2_theorem_applicable,
            "inputs": self.inputs,
        }


def dim_K1(delta: float, inp: ModuliInput) -> int:
    """Dimension of the closed-and-coclosed 1-form kernel at weight delta.

    delta in (0, 1): dim H^1 + dim_H0(delta - 1) - 1 (every class has a
    bounded-ish representative, plus exact forms from sub-linear harmonics).
    delta in (1, n-1): dim H^1_c (only compactly-supported classes survive,
    plus s - 1 exact forms).
    """
    n = inp.n
    if 0.0 < delta < 1.0:
        indicial.check_nonexceptional(delta, inp.ends)
        return (
            inp.cohomology.dim_H1
            + indicial.dim_H0(delta - 1.0, inp.ends)
            - 1
        )
    if 1.0 < delta < n - 1:
        indicial.check_nonexceptional(delta, inp.ends)
        return inp.cohomology.dim_H1c
    raise WeightError(
        f"weight {delta} outside the supported windows (0, 1) and (1, {n - 1})",
        value=delta,
    )


def dim_def_sl(inp: ModuliInput) -> int:
    """Dimension of the space of decaying special Lagrangian deformations."""
    return (
        inp.cohomology.dim_H1
        + indicial.dim_H0(-1.0 + inp.epsilon, inp.ends)
        - 1
    )


def dim_def_sl_l2(inp: ModuliInput) -> int:
    """Dimension of the space of L2 deformations: dim H^1_c of the core.

    Valid only when the ambient curvature decays fast enough (flat space in
    particular); the caller asserts this via ``l2_theorem_applicable``.
    """
    if not inp.l2_theorem_applicable:
        raise ValidationError(
            "L2 dimension formula requires acknowledging the ambient "
            "curvature-decay hypothesis (set l2_theorem_applicable=True)"
        )
    return inp.cohomology.dim_H1c


def moduli_report(inp: ModuliInput, delta_list=()) -> ModuliReport:
    """Assemble all dimensions plus a dim K^1 table over the requested weights."""
    d_sl = dim_def_sl(inp)
    d_l2 = dim_def_sl_l2(inp)
    k1_eps = dim_K1(inp.epsilon, inp)
    table = {float(d): dim_K1(float(d), inp) for d in delta_list}
    h0 = indicial.dim_H0(-1.0 + inp.epsilon, inp.ends)
    inputs = {
        "n": inp.n,
        "s": inp.ends.s,
        "dim_H1": inp.cohomology.dim_H1,
        "dim_H1c": inp.cohomology.dim_H1c,
        "rank_i": inp.cohomology.rank_i,
        "dim_H0_at_minus1_plus_eps": h0,
        "spectra": [spec.to_json_pairs() for spec in inp.ends.spectra],
        "formulas": {
            "dim_def_sl": (
                f"dim H^1 + dim H^0_(-1+eps) - 1 = {inp.cohomology.dim_H1} + "
                f"{h0} - 1 = {d_sl}"
            ),
            "dim_def_sl_l2": f"dim H^1_c = {d_l2}",
        },
    }
    return ModuliReport(
        dim_K1_eps=k1_eps,
        dim_def_sl=d_sl,
        dim_def_sl_l2=d_l2,
        dim_K1_table=table,
        epsilon=inp.epsilon,
        l2_theorem_applicable=inp.l2_theorem_applicable,
        inputs=inputs,
    )
