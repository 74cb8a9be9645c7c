import math

import numpy as np
import pytest

from acslm import cone_solver as cs
from acslm import indicial
from acslm.errors import ValidationError, WeightError
from acslm.link_spectrum import sphere_spectrum


@pytest.fixture(scope="module")
def s2_link():
    return sphere_spectrum(2, 1.0, 6.5)


@pytest.fixture(scope="module")
def neck(s2_link):
    return cs.smoothed_neck(3, s2_link)


@pytest.fixture(scope="module")
def cap():
    return cs.capped_cone(3, sphere_spectrum(2, 1.0, 8.0))


class TestProfiles:
    def test_registry_names(self, s2_link):
        for name in ("exact_cone", "smoothed_neck", "capped_cone"):
            p = cs.get_profile(name, 3, s2_link)
            assert p.name == name

    def test_warp_positive_and_conical(self, neck, cap):
        ts = np.linspace(0.0, 500.0, 200)
        for prof in (neck, cap):
            w = np.asarray(prof.w(ts))
            assert np.all(w > 0)
            assert abs(float(prof.w(1e4)) / 1e4 - 1.0) < 1e-4

    def test_capped_warp_matches_cone_beyond_t0(self, cap):
        t = np.array([1.0, 2.0, 10.0])
        assert np.allclose(cap.w(t), t)
        assert np.allclose(cap.dw(t), 1.0)

    def test_capped_warp_flat_at_origin(self, cap):
        assert float(cap.dw(0.0)) == pytest.approx(0.0, abs=1e-12)
        assert float(cap.w(0.0)) == pytest.approx(0.5)

    def test_unknown_profile(self, s2_link):
        with pytest.raises(ValidationError):
            cs.get_profile("bagel", 3, s2_link)


class TestRadialOperator:
    def test_exact_cone_coefficients(self, s2_link):
        p, q = cs.radial_operator(cs.exact_cone(3, s2_link), 2.0)
        for t in (1.0, 3.7, 50.0):
            assert p(t) == pytest.approx(-2.0 / t, rel=1e-14)
            assert q(t) == pytest.approx(2.0 / t**2, rel=1e-14)

    def test_smoothed_neck_first_order(self, neck):
        p, _ = cs.radial_operator(neck, 0.0)
        for t in (-2.0, 0.0, 1.5):
            assert p(t) == pytest.approx(-2.0 * t / (1.0 + t * t), abs=1e-14)

    def test_constant_in_kernel_for_mode_zero(self, neck):
        _, q = cs.radial_operator(neck, 0.0)
        assert q(3.0) == 0.0  # L(const) = q * const = 0

    def test_mode_must_be_in_spectrum(self, neck):
        with pytest.raises(ValidationError):
            cs.radial_operator(neck, 1.2345)


class TestHarmonicBasis:
    def test_newtonian_exponents(self):
        b = cs.harmonic_radial_basis(0.0, 3)
        assert (b.a_plus, b.a_minus) == (0.0, -1.0)
        assert b.u_plus(7.0) == 1.0
        assert b.u_minus(2.0) == 0.5

    def test_linear_mode(self):
        b = cs.harmonic_radial_basis(2.0, 3)
        assert (b.a_plus, b.a_minus) == (pytest.approx(1.0), pytest.approx(-2.0))

    def test_quadratic_mode(self):
        b = cs.harmonic_radial_basis(6.0, 3)
        assert (b.a_plus, b.a_minus) == (pytest.approx(2.0), pytest.approx(-3.0))


class TestShootExponent:
    @pytest.mark.parametrize("lam", [0.0, 2.0, 6.0])
    @pytest.mark.parametrize("branch", ["a_plus", "a_minus"])
    def test_exact_cone_reproduces_models(self, s2_link, lam, branch):
        prof = cs.exact_cone(3, s2_link)
        got = cs.shoot_exponent(prof, lam, branch, T=50.0)
        exps = indicial.growth_exponents(lam, 3)
        want = exps.a_plus if branch == "a_plus" else exps.a_minus
        assert got == pytest.approx(want, abs=1e-6 * max(1.0, abs(want)))


class TestBoundedHarmonicDim:
    @pytest.mark.parametrize("delta", [-1.1, -0.9, -0.5, 0.5])
    def test_neck_matches_counting(self, neck, delta):
        got = cs.bounded_harmonic_dim(neck, delta, lambda_max=6.5, T=80.0)
        want = indicial.dim_H0(delta, neck.end_spectra())
        assert got == want

    @pytest.mark.parametrize("delta", [-2.1, -1.1, -0.9, 0.5])
    def test_cap_matches_counting(self, cap, delta):
        got = cs.bounded_harmonic_dim(cap, delta, lambda_max=8.0, T=80.0)
        want = indicial.dim_H0(delta, cap.end_spectra())
        assert got == want

    def test_bounded_functions_on_neck(self, neck):
        # constants plus the arctan-like interpolating mode
        assert cs.bounded_harmonic_dim(neck, -0.9, lambda_max=1.0, T=80.0) == 2

    def test_decaying_weight_gives_zero(self, neck):
        assert cs.bounded_harmonic_dim(neck, 0.5, lambda_max=6.5, T=80.0) == 0

    def test_exceptional_delta_rejected(self, neck):
        with pytest.raises(WeightError):
            cs.bounded_harmonic_dim(neck, -1.0, lambda_max=6.5, T=80.0)

    def test_small_truncation_rejected(self, neck):
        with pytest.raises(ValidationError):
            cs.bounded_harmonic_dim(neck, -0.9, lambda_max=1.0, T=20.0)

    def test_exact_cone_rejected(self, s2_link):
        with pytest.raises(ValidationError):
            cs.bounded_harmonic_dim(cs.exact_cone(3, s2_link), -0.9, 1.0, T=80.0)


@pytest.fixture(scope="module")
def glued(neck):
    return cs.glue_harmonic(neck, (1.0, 0.0), T=50.0)


class TestGlueHarmonic:
    def test_midpoint_value(self, glued):
        assert glued.value_at_zero == pytest.approx(0.5, abs=1e-6)

    def test_matches_arctan_closed_form(self, glued):
        t = glued.solution.grid
        exact = 0.5 - np.arctan(t) / math.pi
        assert np.abs(glued.solution.values - exact).max() < 1e-4

    def test_decay_exponent(self, glued):
        for beta in glued.fitted_exponents:
            assert beta == pytest.approx(-1.0, rel=0.1)

    def test_residual(self, glued):
        assert glued.solution.residual_norm <= 1e-8

    def test_discrete_maximum_principle(self, glued):
        F = glued.solution.values
        assert F[1:-1].max() <= max(F[0], F[-1]) + 1e-12
        assert F[1:-1].min() >= min(F[0], F[-1]) - 1e-12

    def test_constants_glue_to_constants(self, neck):
        res = cs.glue_harmonic(neck, (0.7, 0.7), T=50.0)
        assert np.abs(res.solution.values - 0.7).max() < 1e-10

    def test_zero_glues_to_zero(self, neck):
        res = cs.glue_harmonic(neck, (0.0, 0.0), T=50.0)
        assert np.abs(res.solution.values).max() == 0.0

    def test_linearity(self, neck):
        ra = cs.glue_harmonic(neck, (1.0, 0.0))
        rb = cs.glue_harmonic(neck, (0.0, 1.0))
        rc = cs.glue_harmonic(neck, (2.0, -3.0))
        combo = 2.0 * ra.solution.values - 3.0 * rb.solution.values
        assert np.abs(combo - rc.solution.values).max() < 1e-8

    def test_csv_export(self, glued, tmp_path):
        path = tmp_path / "glue.csv"
        glued.solution.to_csv(path)
        header, first = path.read_text().splitlines()[:2]
        assert header == "t,f"
        assert len(first.split(",")) == 2

    def test_cap_profile_rejected(self, cap):
        with pytest.raises(ValidationError):
            cs.glue_harmonic(cap, (1.0, 0.0))


@pytest.fixture(scope="module")
def probe(cap):
    return cs.fredholm_window_probe(cap, 0.0, [1.0, -0.5], [50.0, 100.0, 200.0])


class TestFredholmProbe:
    def test_window_weight_survives_truncation(self, probe):
        assert probe.flags[1.0] == "non_degenerating"

    def test_negative_weight_degenerates(self, probe):
        assert probe.flags[-0.5] == "degenerating"

    def test_kernel_direction_is_constants(self, probe):
        assert probe.kernel_alignment[-0.5] > 0.95

    def test_seed_reproducibility(self, cap):
        flags = []
        for seed in (1, 2, 3):
            res = cs.fredholm_window_probe(
                cap, 0.0, [1.0, -0.5], [50.0, 100.0], seed=seed
            )
            flags.append(res.flags)
        assert flags[0] == flags[1] == flags[2]

    def test_exactly_exceptional_rejected(self, cap):
        with pytest.raises(WeightError):
            cs.fredholm_window_probe(cap, 0.0, [0.0], [50.0])

    def test_rows_table(self, probe):
        rows = probe.table()
        assert len(rows) == 6
        assert {r["T"] for r in rows} == {50.0, 100.0, 200.0}
