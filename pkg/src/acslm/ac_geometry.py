"""Boundary-coordinate geometry of asymptotically conical metrics.

Charts come from a closed-form registry supplying the metric and its first
and second coordinate derivatives analytically (second derivatives feed the
curvature tensor; differentiating user metrics numerically is too noisy for
the decay fits).  On top of the charts sit the rescaled geodesic system that
extends the exponential map to the boundary, parallel transport, Jacobi
fields, the linearization remainder Q with its curvature-envelope bound, and
the Gronwall comparison ODE.

Coordinates are (x, theta, phi): x is the boundary-defining function and
(theta, phi) chart the link away from its coordinate poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    InternalConsistencyError,
    NumericError,
    ValidationError,
)

GRONWALL_CONSTANT = math.e

#: integration tolerances for all trajectory solves
RTOL = 1e-12
ATOL = 1e-13

_THETA_GRID = np.linspace(0.5, math.pi - 0.5, 9)
_PHI_SAMPLE = 0.7


# --------------------------------------------------------------------------
# charts


class MetricChart:
    """Closed-form metric with analytic derivatives in boundary coordinates."""

    name: str = "abstract"
    dim = 3
    has_boundary = True

    def metric(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dmetric(self, p: np.ndarray) -> np.ndarray:
        """dmetric[mu, a, b] = d_mu g_ab."""
        raise NotImplementedError

    def d2metric(self, p: np.ndarray) -> np.ndarray:
        """d2metric[mu, nu, a, b] = d_mu d_nu g_ab."""
        raise NotImplementedError

    def rescaled_coeffs(self, x: float, y: np.ndarray) -> dict:
        """Boundary-smooth Christoffel combinations driving the rescaled
        geodesic system; valid at x = 0.

        Keys: 'A' = Gamma^x_ij / x, 'B' = Gamma^x_xj, 'D' = x Gamma^x_xx,
        'E' = Gamma^k_ij, 'F' = x Gamma^k_xj, 'G' = x^2 Gamma^k_xx.
        """
        raise NotImplementedError

    def interior_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.has_boundary and p[0] <= 0:
            raise NumericError(
                f"{self.name}: metric is singular at x = {p[0]}; need x > 0"
            )
        return p


class FlatChart(MetricChart):
    """Euclidean R^3 in a Cartesian interior chart; no boundary structure."""

    name = "flat"
    has_boundary = False

    def metric(self, p):
        return np.eye(3)

    def dmetric(self, p):
        return np.zeros((3, 3, 3))

    def d2metric(self, p):
        return np.zeros((3, 3, 3, 3))


class ConeChart(MetricChart):
    """dx^2/x^4 + c^2 g_(S^2)/x^2: flat space for c = 1 (inverted Euclidean),
    a genuinely curved cone over a stretched sphere otherwise."""

    def __init__(self, c: float = 1.0):
        if c <= 0:
            raise ValidationError(f"cone scale must be positive, got {c}")
        self.c = float(c)
        self.name = "inverted_euclidean" if c == 1.0 else f"scaled_cone({c:g})"

    def metric(self, p):
        x, th = p[0], p[1]
        c2 = self.c * self.c
        return np.diag([x**-4.0, c2 * x**-2.0, c2 * x**-2.0 * math.sin(th) ** 2])

    def dmetric(self, p):
        x, th = p[0], p[1]
        c2 = self.c * self.c
        s2, sin2 = math.sin(th) ** 2, math.sin(2 * th)
        d = np.zeros((3, 3, 3))
        d[0, 0, 0] = -4.0 * x**-5.0
        d[0, 1, 1] = -2.0 * c2 * x**-3.0
        d[0, 2, 2] = -2.0 * c2 * x**-3.0 * s2
        d[1, 2, 2] = c2 * x**-2.0 * sin2
        return d

    def d2metric(self, p):
        x, th = p[0], p[1]
        c2 = self.c * self.c
        s2, sin2, cos2 = math.sin(th) ** 2, math.sin(2 * th), math.cos(2 * th)
        d = np.zeros((3, 3, 3, 3))
        d[0, 0, 0, 0] = 20.0 * x**-6.0
        d[0, 0, 1, 1] = 6.0 * c2 * x**-4.0
        d[0, 0, 2, 2] = 6.0 * c2 * x**-4.0 * s2
        d[0, 1, 2, 2] = d[1, 0, 2, 2] = -2.0 * c2 * x**-3.0 * sin2
        d[1, 1, 2, 2] = 2.0 * c2 * x**-2.0 * cos2
        return d

    def rescaled_coeffs(self, x, y):
        th = y[0]
        c2 = self.c * self.c
        s, co = math.sin(th), math.cos(th)
        A = np.diag([c2, c2 * s * s])
        E = np.zeros((2, 2, 2))
        E[0, 1, 1] = -s * co  # Gamma^theta_phiphi
        E[1, 0, 1] = E[1, 1, 0] = co / s  # Gamma^phi_thetaphi
        return {
            "A": A,
            "B": np.zeros(2),
            "D": -2.0,
            "E": E,
            "F": -np.eye(2),
            "G": np.zeros(2),
        }


class PerturbedConeChart(MetricChart):
    """Inverted-Euclidean base with the link metric scaled by 1 + x phi(theta):
    an asymptotically conical perturbation decaying one order faster."""

    def __init__(self, amplitude: float = 0.3):
        self.amp = float(amplitude)
        self.name = f"perturbed_cone({self.amp:g})"

    def _phi(self, th):
        return self.amp * math.cos(th)

    def _dphi(self, th):
        return -self.amp * math.sin(th)

    def _d2phi(self, th):
        return -self.amp * math.cos(th)

    def metric(self, p):
        x, th = p[0], p[1]
        u = 1.0 + x * self._phi(th)
        return np.diag([x**-4.0, x**-2.0 * u, x**-2.0 * u * math.sin(th) ** 2])

    def dmetric(self, p):
        x, th = p[0], p[1]
        phi, dphi = self._phi(th), self._dphi(th)
        u = 1.0 + x * phi
        s2, sin2 = math.sin(th) ** 2, math.sin(2 * th)
        d = np.zeros((3, 3, 3))
        d[0, 0, 0] = -4.0 * x**-5.0
        gx = -2.0 * x**-3.0 * u + x**-2.0 * phi
        d[0, 1, 1] = gx
        d[0, 2, 2] = gx * s2
        d[1, 1, 1] = x**-1.0 * dphi
        d[1, 2, 2] = x**-1.0 * dphi * s2 + x**-2.0 * u * sin2
        return d

    def d2metric(self, p):
        x, th = p[0], p[1]
        phi, dphi, d2phi = self._phi(th), self._dphi(th), self._d2phi(th)
        u = 1.0 + x * phi
        s2, sin2, cos2 = math.sin(th) ** 2, math.sin(2 * th), math.cos(2 * th)
        d = np.zeros((3, 3, 3, 3))
        d[0, 0, 0, 0] = 20.0 * x**-6.0
        gxx = 6.0 * x**-4.0 * u - 4.0 * x**-3.0 * phi
        d[0, 0, 1, 1] = gxx
        d[0, 0, 2, 2] = gxx * s2
        gxth = -x**-2.0 * dphi
        d[0, 1, 1, 1] = d[1, 0, 1, 1] = gxth
        gx = -2.0 * x**-3.0 * u + x**-2.0 * phi
        d[0, 1, 2, 2] = d[1, 0, 2, 2] = gxth * s2 + gx * sin2
        d[1, 1, 1, 1] = x**-1.0 * d2phi
        d[1, 1, 2, 2] = (
            x**-1.0 * d2phi * s2
            + 2.0 * x**-1.0 * dphi * sin2
            + 2.0 * x**-2.0 * u * cos2
        )
        return d

    def rescaled_coeffs(self, x, y):
        th = y[0]
        phi, dphi = self._phi(th), self._dphi(th)
        u = 1.0 + x * phi
        s, co = math.sin(th), math.cos(th)
        h = np.diag([1.0, s * s])
        A = (1.0 + 0.5 * x * phi) * h
        E = np.zeros((2, 2, 2))
        E[0, 1, 1] = -s * co
        E[1, 0, 1] = E[1, 1, 0] = co / s
        # conformal correction (x / 2u)(phi_b d^a_c + phi_c d^a_b - h^ad phi_d h_bc)
        k = x / (2.0 * u)
        E[0, 0, 0] += k * dphi
        E[0, 1, 1] += -k * dphi * s * s
        E[1, 0, 1] += k * dphi
        E[1, 1, 0] += k * dphi
        F = (-1.0 + x * phi / (2.0 * u)) * np.eye(2)
        return {
            "A": A,
            "B": np.zeros(2),
            "D": -2.0,
            "E": E,
            "F": F,
            "G": np.zeros(2),
        }


def get_chart(name: str, **params) -> MetricChart:
    if name == "flat":
        return FlatChart()
    if name == "inverted_euclidean":
        return ConeChart(c=1.0)
    if name == "scaled_cone":
        return ConeChart(c=params.get("c", 2.0))
    if name == "perturbed_cone":
        return PerturbedConeChart(amplitude=params.get("amplitude", 0.3))
    raise ValidationError(
        f"unknown chart {name!r}; registry has flat, inverted_euclidean, "
        "scaled_cone, perturbed_cone"
    )


# --------------------------------------------------------------------------
# curvature machinery


def christoffels(chart: MetricChart, p) -> np.ndarray:
    """Gamma[sigma, mu, nu] at an interior point, from the registry derivatives."""
    p = chart.interior_point(p)
    g = chart.metric(p)
    dg = chart.dmetric(p)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"{chart.name}: singular metric at {p}") from exc
    # Gamma^s_mn = 1/2 g^sr (d_m g_rn + d_n g_rm - d_r g_mn)
    term = np.einsum("mrn->rmn", dg) + np.einsum("nrm->rmn", dg) - dg
    return 0.5 * np.einsum("sr,rmn->smn", ginv, term)


def _dchristoffels(chart: MetricChart, p) -> np.ndarray:
    """dGamma[mu, sigma, a, b] = d_mu Gamma^sigma_ab."""
    g = chart.metric(p)
    dg = chart.dmetric(p)
    d2g = chart.d2metric(p)
    ginv = np.linalg.inv(g)
    dginv = -np.einsum("sa,mab,br->msr", ginv, dg, ginv)
    sym = np.einsum("mrn->rmn", dg) + np.einsum("nrm->rmn", dg) - dg
    dsym = (
        np.einsum("kmrn->krmn", d2g)
        + np.einsum("knrm->krmn", d2g)
        - np.einsum("krmn->krmn", d2g)
    )
    return 0.5 * (
        np.einsum("ksr,rmn->ksmn", dginv, sym)
        + np.einsum("sr,krmn->ksmn", ginv, dsym)
    )


def riemann(chart: MetricChart, p) -> np.ndarray:
    """R[sigma, rho, mu, nu] with R(d_mu, d_nu) d_rho = R^sigma_rho,mu,nu d_sigma."""
    p = chart.interior_point(p)
    gamma = christoffels(chart, p)
    dgamma = _dchristoffels(chart, p)
    r = (
        np.einsum("msnr->srmn", dgamma)
        - np.einsum("nsmr->srmn", dgamma)
        + np.einsum("sml,lnr->srmn", gamma, gamma)
        - np.einsum("snl,lmr->srmn", gamma, gamma)
    )
    return r


def riemann_norm(chart: MetricChart, p) -> float:
    """Full metric norm of the curvature tensor at an interior point."""
    p = chart.interior_point(p)
    g = chart.metric(p)
    ginv = np.linalg.inv(g)
    r_up = riemann(chart, p)
    r_low = np.einsum("as,srmn->armn", g, r_up)
    sq = np.einsum(
        "armn,bsop,ab,rs,mo,np->",
        r_low, r_low, ginv, ginv, ginv, ginv,
    )
    return float(math.sqrt(max(sq, 0.0)))


def rho_envelope(chart: MetricChart, x: float) -> float:
    """Curvature envelope rho(x) = sqrt(sup over the link of |R| at radius x)."""
    worst = 0.0
    for th in _THETA_GRID:
        worst = max(worst, riemann_norm(chart, np.array([x, th, _PHI_SAMPLE])))
    return math.sqrt(worst)


_CHRISTOFFEL_CLASSES = {
    # entry group -> (index filter, claimed order in x)
    "Gamma^k_ij": (lambda s, m, n: s > 0 and m > 0 and n > 0, 0.0),
    "Gamma^x_ij": (lambda s, m, n: s == 0 and m > 0 and n > 0, 1.0),
    "Gamma^k_ix": (lambda s, m, n: s > 0 and (m == 0) != (n == 0), -1.0),
    "Gamma^x_ix": (lambda s, m, n: s == 0 and (m == 0) != (n == 0), 1.0),
    "Gamma^k_xx": (lambda s, m, n: s > 0 and m == 0 and n == 0, -1.0),
    "Gamma^x_xx": (lambda s, m, n: s == 0 and m == 0 and n == 0, -1.0),
}

_VANISH_THRESHOLD = 1e-10


def decay_classify(
    chart: MetricChart,
    quantity: str,
    x_lo: float = 1e-4,
    x_hi: float = 1e-1,
    num: int = 25,
    y: Sequence[float] = (1.0, _PHI_SAMPLE),
) -> dict:
    """Log-log fit of |quantity| against x at fixed link point.

    ``quantity`` is 'christoffels' (one fit per symbol class) or
    'riemann_norm'.  Entries that are numerically zero across the sweep are
    reported as {'vanishes': True}; otherwise {'slope': fitted, 'claimed':
    order} with the convention that the fit should not undershoot the claimed
    order by more than 0.1.
    """
    xs = np.geomspace(x_lo, x_hi, num)
    y = np.asarray(y, dtype=float)
    out: dict[str, dict] = {}
    if quantity == "riemann_norm":
        vals = np.array([riemann_norm(chart, np.array([x, *y])) for x in xs])
        out["riemann_norm"] = _fit_entry(xs, vals, claimed=2.0)
        return out
    if quantity != "christoffels":
        raise ValidationError(
            f"unknown quantity {quantity!r}: use 'christoffels' or 'riemann_norm'"
        )
    gammas = np.array([christoffels(chart, np.array([x, *y])) for x in xs])
    for name, (pick, claimed) in _CHRISTOFFEL_CLASSES.items():
        sel = [
            (s, m, n)
            for s in range(3)
            for m in range(3)
            for n in range(3)
            if pick(s, m, n)
        ]
        vals = np.array([max(abs(g[s, m, n]) for s, m, n in sel) for g in gammas])
        out[name] = _fit_entry(xs, vals, claimed=claimed)
    return out


def _fit_entry(xs, vals, claimed):
    if np.max(vals) < _VANISH_THRESHOLD:
        return {"vanishes": True, "claimed": claimed}
    slope = float(np.polyfit(np.log(xs), np.log(np.maximum(vals, 1e-300)), 1)[0])
    return {"slope": slope, "claimed": claimed, "vanishes": False}


# --------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class VectorFieldSpec:
    """Field expressed in the boundary frames: V = V^0 x^2 d_x + V^i x d_yi for
    the sc class, V = V^0 x d_x + V^i d_yi for the b class.

    ``frame`` maps (x, y) to the three frame components; ``frame_grad`` maps
    (x, y) to their coordinate partials [mu, component].  Both must be smooth
    up to x = 0.
    """

    name: str
    clazz: str  # "b_field" | "sc_field"
    frame: Callable[[float, np.ndarray], np.ndarray]
    frame_grad: Callable[[float, np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.clazz not in ("b_field", "sc_field"):
            raise ValidationError(
                f"field class must be b_field or sc_field, got {self.clazz}"
            )

    def b_components(self, x: float, y: np.ndarray) -> np.ndarray:
        """Components against (x d_x, d_y): the rescaled system's initial data."""
        f = np.asarray(self.frame(x, y), dtype=float)
        if self.clazz == "b_field":
            return f
        return x * f

    def coord_components(self, p: np.ndarray) -> np.ndarray:
        x, y = p[0], p[1:]
        f = np.asarray(self.frame(x, y), dtype=float)
        if self.clazz == "b_field":
            return np.array([x * f[0], f[1], f[2]])
        return np.array([x * x * f[0], x * f[1], x * f[2]])

    def coord_grad(self, p: np.ndarray) -> np.ndarray:
        """dV[mu, sigma] = d_mu V^sigma of the coordinate components."""
        x, y = p[0], p[1:]
        f = np.asarray(self.frame(x, y), dtype=float)
        df = np.asarray(self.frame_grad(x, y), dtype=float)
        out = np.zeros((3, 3))
        if self.clazz == "b_field":
            scale = np.array([x, 1.0, 1.0])
            dscale_dx = np.array([1.0, 0.0, 0.0])
        else:
            scale = np.array([x * x, x, x])
            dscale_dx = np.array([2.0 * x, 1.0, 1.0])
        for mu in range(3):
            out[mu] = scale * df[mu]
        out[0] += dscale_dx * f
        return out


def constant_field(name: str, clazz: str, comps: Sequence[float]) -> VectorFieldSpec:
    comps = np.asarray(comps, dtype=float)

    def frame(x, y, _c=comps):
        return _c

    def frame_grad(x, y):
        return np.zeros((3, 3))

    return VectorFieldSpec(name=name, clazz=clazz, frame=frame, frame_grad=frame_grad)


def _swirl_field() -> VectorFieldSpec:
    def frame(x, y):
        return np.array([0.5 * math.cos(y[0]), 0.3, 0.2])

    def frame_grad(x, y):
        df = np.zeros((3, 3))
        df[1, 0] = -0.5 * math.sin(y[0])
        return df

    return VectorFieldSpec(
        name="sc_swirl", clazz="sc_field", frame=frame, frame_grad=frame_grad
    )


FIELDS = {
    "zero": constant_field("zero", "sc_field", (0.0, 0.0, 0.0)),
    "sc_radial_in": constant_field("sc_radial_in", "sc_field", (-1.0, 0.0, 0.0)),
    "sc_mixed": constant_field("sc_mixed", "sc_field", (0.6, 0.4, 0.3)),
    "sc_swirl": _swirl_field(),
    "b_tangent": constant_field("b_tangent", "b_field", (0.0, 0.4, 0.2)),
    "b_slide": constant_field("b_slide", "b_field", (0.8, 0.3, 0.0)),
}


def get_field(name: str) -> VectorFieldSpec:
    if name not in FIELDS:
        raise ValidationError(f"unknown field {name!r}; registry has {sorted(FIELDS)}")
    return FIELDS[name]


def sc_frame_vector(index: int) -> VectorFieldSpec:
    """The sc-frame basis vector x^2 d_x (index 0) or x d_yi (index 1, 2)."""
    comps = [0.0, 0.0, 0.0]
    comps[index] = 1.0
    return constant_field(f"sc_e{index}", "sc_field", comps)


def covariant_derivative(chart: MetricChart, p, Z: VectorFieldSpec, V: VectorFieldSpec):
    """(nabla_Z V)^sigma at p: Z^mu (d_mu V^sigma + Gamma^sigma_mu,nu V^nu)."""
    p = np.asarray(p, dtype=float)
    gamma = christoffels(chart, p)
    zc = Z.coord_components(p)
    vc = V.coord_components(p)
    dv = V.coord_grad(p)
    return np.einsum("m,ms->s", zc, dv) + np.einsum("smn,m,n->s", gamma, zc, vc)


def metric_norm(chart: MetricChart, p, vec) -> float:
    g = chart.metric(np.asarray(p, dtype=float))
    v = np.asarray(vec, dtype=float)
    return float(math.sqrt(max(v @ g @ v, 0.0)))


# --------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class GeodesicState:
    """Trajectory of the (possibly rescaled) geodesic system.

    For runs of the rescaled system, gamma = (x0 * c^x, y) recovers the
    geodesic; direct interior runs store gamma itself and leave c empty.
    """

    chart: MetricChart
    x0: float
    y0: np.ndarray
    s: np.ndarray
    gamma: np.ndarray  # (N, 3)
    gamma_dot: np.ndarray  # (N, 3)
    c: np.ndarray | None = None  # (N, 3): (c^x, y), rescaled runs only
    c_dot: np.ndarray | None = None

    @property
    def endpoint(self) -> np.ndarray:
        return self.gamma[-1]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("s,x,theta,phi,dx,dtheta,dphi\n")
            for i in range(len(self.s)):
                row = [self.s[i], *self.gamma[i], *self.gamma_dot[i]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _solve(fun, y0, s_span, s_eval=None, scales=None, rtol=RTOL, atol=ATOL):
    y0 = np.asarray(y0, dtype=float)
    if scales is None:
        scales = np.ones_like(y0)
    scales = np.asarray(scales, dtype=float)

    def scaled_fun(s, u):
        return fun(s, u * scales) / scales

    sol = solve_ivp(
        scaled_fun,
        s_span,
        y0 / scales,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=s_eval,
        dense_output=False,
    )
    if not sol.success:
        raise NumericError(
            "trajectory integration failed",
            diagnostics={"message": sol.message, "last_state": (sol.t[-1], (sol.y[:, -1] * scales).tolist()) if sol.t.size else None},
        )
    return sol.t, sol.y * scales[:, None]


def integrate_geodesic(
    chart: MetricChart,
    x0: float,
    y0,
    V: VectorFieldSpec,
    s_span=(0.0, 1.0),
    num: int = 101,
    check: bool = True,
) -> GeodesicState:
    """Integrate the rescaled geodesic system generated by a registry field.

    The system evolves (c^x, y) with c^x(0) = 1 and x(s) = x0 * c^x(s); its
    coefficients are boundary-smooth, so x0 = 0 is a regular parameter value.
    For x0 > 0 the recovered curve is checked against direct interior
    integration of the standard geodesic equation.
    """
    if not chart.has_boundary:
        raise ValidationError(
            f"{chart.name} has no boundary structure; use integrate_geodesic_direct"
        )
    if x0 < 0:
        raise ValidationError(f"x0 must be nonnegative, got {x0}")
    y0 = np.asarray(y0, dtype=float)
    v_b = V.b_components(x0, y0)
    state0 = np.array([1.0, y0[0], y0[1], v_b[0], v_b[1], v_b[2]])

    def rhs(s, u):
        cx, th, ph, dcx, dth, dph = u
        if cx <= 0:
            raise NumericError(
                "rescaled coordinate c^x left the positive half-line",
                diagnostics={"state": u.tolist(), "s": s},
            )
        x = x0 * cx
        co = chart.rescaled_coeffs(x, np.array([th, ph]))
        dy = np.array([dth, dph])
        acc_x = -(
            cx * (dy @ co["A"] @ dy)
            + 2.0 * dcx * (co["B"] @ dy)
            + co["D"] / cx * dcx * dcx
        )
        acc_y = -(
            np.einsum("kij,i,j->k", co["E"], dy, dy)
            + 2.0 * dcx / cx * (co["F"] @ dy)
            + co["G"] / (cx * cx) * dcx * dcx
        )
        return np.array([dcx, dth, dph, acc_x, acc_y[0], acc_y[1]])

    s_eval = np.linspace(s_span[0], s_span[1], num)
    s, states = _solve(rhs, state0, s_span, s_eval=s_eval)
    c = states[:3].T
    c_dot = states[3:].T
    gamma = np.column_stack([x0 * c[:, 0], c[:, 1], c[:, 2]])
    gamma_dot = np.column_stack([x0 * c_dot[:, 0], c_dot[:, 1], c_dot[:, 2]])
    state = GeodesicState(
        chart=chart, x0=x0, y0=y0, s=s, gamma=gamma, gamma_dot=gamma_dot,
        c=c, c_dot=c_dot,
    )
    if check and x0 > 0:
        direct = integrate_geodesic_direct(
            chart, gamma[0], gamma_dot[0], s_span=s_span, num=num
        )
        dev = np.abs(direct.gamma - gamma).max()
        if dev > 1e-6:
            raise InternalConsistencyError(
                f"rescaled and direct geodesic integrations disagree by {dev:.3e}"
            )
    return state


def integrate_geodesic_direct(
    chart: MetricChart, point, v0, s_span=(0.0, 1.0), num: int = 101
) -> GeodesicState:
    """Standard interior geodesic equation in coordinates."""
    p0 = chart.interior_point(point)
    v0 = np.asarray(v0, dtype=float)

    def rhs(s, u):
        pos, vel = u[:3], u[3:]
        gamma = christoffels(chart, pos)
        acc = -np.einsum("smn,m,n->s", gamma, vel, vel)
        return np.concatenate([vel, acc])

    scales = _state_scales(chart, p0)
    s_eval = np.linspace(s_span[0], s_span[1], num)
    s, states = _solve(
        rhs, np.concatenate([p0, v0]), s_span, s_eval=s_eval,
        scales=np.concatenate([scales, scales]),
    )
    return GeodesicState(
        chart=chart, x0=float(p0[0]), y0=p0[1:].copy(), s=s,
        gamma=states[:3].T, gamma_dot=states[3:].T,
    )


def _state_scales(chart: MetricChart, p0) -> np.ndarray:
    """Per-component magnitudes of sc-scaled quantities at the base point,
    used to keep absolute integrator tolerances meaningful at small x."""
    if not chart.has_boundary:
        return np.ones(3)
    x = max(float(p0[0]), 1e-300)
    return np.array([x * x, x, x])


def geodesic_energy(state: GeodesicState) -> np.ndarray:
    """g(gamma', gamma') along the trajectory (constant for exact geodesics)."""
    vals = []
    for p, v in zip(state.gamma, state.gamma_dot):
        g = state.chart.metric(p)
        vals.append(v @ g @ v)
    return np.array(vals)


# --------------------------------------------------------------------------
# transport, Jacobi fields, remainder


@dataclass(frozen=True)
class TransportResult:
    s: np.ndarray
    Z: np.ndarray  # (N, 3)


def parallel_transport(chart: MetricChart, trajectory: GeodesicState, Z0) -> TransportResult:
    """Solve nabla_s Z = 0 along an interior trajectory."""
    p0, v0 = trajectory.gamma[0], trajectory.gamma_dot[0]
    chart.interior_point(p0)
    scales = _state_scales(chart, p0)

    def rhs(s, u):
        pos, vel, z = u[:3], u[3:6], u[6:]
        gamma = christoffels(chart, pos)
        acc = -np.einsum("smn,m,n->s", gamma, vel, vel)
        dz = -np.einsum("smn,m,n->s", gamma, vel, z)
        return np.concatenate([vel, acc, dz])

    s_eval = trajectory.s
    s, states = _solve(
        rhs,
        np.concatenate([p0, v0, np.asarray(Z0, dtype=float)]),
        (trajectory.s[0], trajectory.s[-1]),
        s_eval=s_eval,
        scales=np.concatenate([scales, scales, scales]),
    )
    return TransportResult(s=s, Z=states[6:].T)


@dataclass(frozen=True)
class JacobiResult:
    s: np.ndarray
    J: np.ndarray  # (N, 3)
    DJ: np.ndarray  # (N, 3) covariant derivative components


def jacobi_field(chart: MetricChart, trajectory: GeodesicState, J0, J0p) -> JacobiResult:
    """Solve the Jacobi equation nabla_s nabla_s J + R(J, gamma') gamma' = 0."""
    p0, v0 = trajectory.gamma[0], trajectory.gamma_dot[0]
    chart.interior_point(p0)
    scales = _state_scales(chart, p0)

    def rhs(s, u):
        pos, vel, j, k = u[:3], u[3:6], u[6:9], u[9:]
        gamma = christoffels(chart, pos)
        r = riemann(chart, pos)
        acc = -np.einsum("smn,m,n->s", gamma, vel, vel)
        dj = k - np.einsum("smn,m,n->s", gamma, vel, j)
        rj = np.einsum("srmn,r,m,n->s", r, vel, j, vel)
        dk = -np.einsum("smn,m,n->s", gamma, vel, k) - rj
        return np.concatenate([vel, acc, dj, dk])

    y0 = np.concatenate(
        [p0, v0, np.asarray(J0, dtype=float), np.asarray(J0p, dtype=float)]
    )
    s, states = _solve(
        rhs, y0, (trajectory.s[0], trajectory.s[-1]), s_eval=trajectory.s,
        scales=np.concatenate([scales] * 4),
    )
    return JacobiResult(s=s, J=states[6:9].T, DJ=states[9:].T)


@dataclass(frozen=True)
class RemainderResult:
    s: np.ndarray
    q_norms: np.ndarray
    Q1: np.ndarray
    norm_Q1: float
    norm_Z: float
    norm_gradV: float
    rho_x: float
    x: float


def jacobi_remainder(
    chart: MetricChart,
    x: float,
    y,
    V: VectorFieldSpec,
    Z: VectorFieldSpec,
    num: int = 101,
) -> RemainderResult:
    """Deviation Q(s) = J(s) - [Z + s nabla_Z V](s) of the variation field from
    its linear model, both transported along the geodesic generated by V.

    Q solves the driven Jacobi equation with zero initial data, so it is
    integrated directly; this keeps the small remainder fully resolved even
    when J and its model agree to many digits.
    """
    if not (0.0 < x <= 0.1):
        raise ValidationError(f"remainder sweeps require x in (0, 0.1], got {x}")
    if V.clazz != "sc_field":
        raise ValidationError("the remainder estimate applies to sc fields")
    p0 = np.array([x, *np.asarray(y, dtype=float)])
    chart.interior_point(p0)
    v0 = V.coord_components(p0)
    z0 = Z.coord_components(p0)
    dzv0 = covariant_derivative(chart, p0, Z, V)
    scales = _state_scales(chart, p0)

    def rhs(s, u):
        pos, vel = u[:3], u[3:6]
        p1, p2 = u[6:9], u[9:12]
        q, k = u[12:15], u[15:]
        gamma = christoffels(chart, pos)
        r = riemann(chart, pos)
        acc = -np.einsum("smn,m,n->s", gamma, vel, vel)
        dp1 = -np.einsum("smn,m,n->s", gamma, vel, p1)
        dp2 = -np.einsum("smn,m,n->s", gamma, vel, p2)
        a = p1 + s * p2
        dq = k - np.einsum("smn,m,n->s", gamma, vel, q)
        rq = np.einsum("srmn,r,m,n->s", r, vel, q + a, vel)
        dk = -np.einsum("smn,m,n->s", gamma, vel, k) - rq
        return np.concatenate([vel, acc, dp1, dp2, dq, dk])

    y0 = np.concatenate([p0, v0, z0, dzv0, np.zeros(3), np.zeros(3)])
    s_eval = np.linspace(0.0, 1.0, num)
    s, states = _solve(rhs, y0, (0.0, 1.0), s_eval=s_eval, scales=np.concatenate([scales] * 6))
    q = states[12:15].T
    norms = np.array(
        [metric_norm(chart, states[:3, i], q[i]) for i in range(len(s))]
    )
    return RemainderResult(
        s=s,
        q_norms=norms,
        Q1=q[-1],
        norm_Q1=float(norms[-1]),
        norm_Z=metric_norm(chart, p0, z0),
        norm_gradV=metric_norm(chart, p0, dzv0),
        rho_x=rho_envelope(chart, x),
        x=x,
    )


@dataclass(frozen=True)
class RemainderSweep:
    rows: tuple[dict, ...]  # {"x", "norm_Q", "rho_x_times_x"}
    slope: float | None
    max_norm: float


def jacobi_remainder_sweep(
    chart: MetricChart, V: VectorFieldSpec, Z: VectorFieldSpec, xs, y
) -> RemainderSweep:
    """Sweep the remainder over boundary distances and fit log |Q(1)| against
    log(rho(x) x); slope near 1 reproduces the linearization bound."""
    rows = []
    for x in xs:
        res = jacobi_remainder(chart, float(x), y, V, Z)
        rows.append(
            {
                "x": float(x),
                "norm_Q": res.norm_Q1,
                "rho_x_times_x": res.rho_x * float(x),
            }
        )
    norms = np.array([r["norm_Q"] for r in rows])
    drives = np.array([r["rho_x_times_x"] for r in rows])
    if norms.max() < 1e-12 or np.any(drives <= 0):
        return RemainderSweep(rows=tuple(rows), slope=None, max_norm=float(norms.max()))
    slope = float(np.polyfit(np.log(drives), np.log(np.maximum(norms, 1e-300)), 1)[0])
    return RemainderSweep(rows=tuple(rows), slope=slope, max_norm=float(norms.max()))


# --------------------------------------------------------------------------
# comparison ODE


@dataclass(frozen=True)
class ComparisonResult:
    s: np.ndarray
    a: np.ndarray
    a1: float
    bound: float


def comparison_bound(
    rho_of_x: float,
    x: float,
    norm_Z: float,
    norm_gradV: float,
    s_max: float = 1.0,
    num: int = 101,
) -> ComparisonResult:
    """Integrate the comparison ODE a'' = rho^2 a + rho^2 (|Z| + s |grad V|),
    a(0) = a'(0) = 0, which dominates |J - A| pointwise.

    Requires the normalized setting rho(x) <= x; the closing Gronwall estimate
    gives a(1) <= e rho(x) x, asserted on the result.
    """
    if rho_of_x < 0 or x <= 0:
        raise ValidationError("need rho >= 0 and x > 0")
    if rho_of_x > x * (1.0 + 1e-12):
        raise ValidationError(
            f"comparison bound requires rho(x) <= x, got rho = {rho_of_x}, x = {x}"
        )
    rho2 = rho_of_x * rho_of_x

    def rhs(s, u):
        a, da = u
        return [da, rho2 * a + rho2 * (norm_Z + s * norm_gradV)]

    s_eval = np.linspace(0.0, s_max, num)
    sol = solve_ivp(
        rhs, (0.0, s_max), [0.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-16,
        t_eval=s_eval,
    )
    if not sol.success:
        raise NumericError("comparison ODE failed", diagnostics={"message": sol.message})
    a = sol.y[0]
    if np.any(np.diff(a) < -1e-15):
        raise InternalConsistencyError("comparison solution must be nondecreasing")
    bound = GRONWALL_CONSTANT * rho_of_x * x
    a1 = float(a[-1])
    if norm_Z <= 1.0 + 1e-12 and s_max <= 1.0 and a1 > bound * (1.0 + 1e-9):
        raise InternalConsistencyError(
            f"comparison value a(1) = {a1:.3e} exceeds the closed bound {bound:.3e}"
        )
    return ComparisonResult(s=sol.t, a=a, a1=a1, bound=bound)


# --------------------------------------------------------------------------
# pushforward diagnostics


def sc_frame_components(p, vec) -> np.ndarray:
    """Components of a coordinate vector against (x^2 d_x, x d_theta, x d_phi)."""
    x = p[0]
    return np.array([vec[0] / (x * x), vec[1] / x, vec[2] / x])


def expv_pushforward(chart: MetricChart, x: float, y, V: VectorFieldSpec) -> np.ndarray:
    """Matrix of d(exp V) at (x, y) in the sc frame, columns indexed by the
    frame vector pushed forward (via its Jacobi field)."""
    p0 = np.array([x, *np.asarray(y, dtype=float)])
    traj = integrate_geodesic_direct(chart, p0, V.coord_components(p0))
    cols = []
    for idx in range(3):
        Z = sc_frame_vector(idx)
        j0 = Z.coord_components(p0)
        j0p = covariant_derivative(chart, p0, Z, V)
        jac = jacobi_field(chart, traj, j0, j0p)
        cols.append(sc_frame_components(traj.gamma[-1], jac.J[-1]))
    return np.column_stack(cols)


def expv_min_singular(chart: MetricChart, V: VectorFieldSpec, xs, y) -> float:
    """Sampled lower bound on the pushforward's singular values near the
    boundary: a positive value indicates immersion on the sampled set."""
    worst = math.inf
    for x in xs:
        m = expv_pushforward(chart, float(x), y, V)
        worst = min(worst, float(np.linalg.svd(m, compute_uv=False)[-1]))
    return worst
