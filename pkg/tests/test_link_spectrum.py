import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from acslm import link_spectrum as ls
from acslm.errors import ResourceLimitError, ValidationError

from oracles import torus_eigenvalues_bruteforce


class TestSphereSpectrum:
    def test_unit_s2(self):
        spec = ls.sphere_spectrum(2, 1.0, 7.0)
        assert [(p.lam, p.mult) for p in spec.pairs] == [(0.0, 1), (2.0, 3), (6.0, 5)]

    def test_radius_scaling(self):
        spec = ls.sphere_spectrum(2, 2.0, 1.0)
        assert [(p.lam, p.mult) for p in spec.pairs] == [(0.0, 1), (0.5, 3)]

    def test_constants_only(self):
        spec = ls.sphere_spectrum(4, 1.0, 0.0)
        assert [(p.lam, p.mult) for p in spec.pairs] == [(0.0, 1)]

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_scaling_property(self, m):
        lam_max = m * 12.0
        unit = ls.sphere_spectrum(m, 1.0, lam_max)
        c = 1.7
        scaled = ls.sphere_spectrum(m, c, lam_max / c**2)
        assert len(scaled.pairs) == len(unit.pairs)
        for a, b in zip(unit.pairs, scaled.pairs):
            assert b.lam == pytest.approx(a.lam / c**2, rel=1e-14)
            assert b.mult == a.mult

    def test_multiplicity_closed_form(self):
        # dimension of degree-k harmonics: (2k+m-1)/(m-1) * C(k+m-2, k)
        for m in range(2, 7):
            for k in range(0, 11):
                expected = (2 * k + m - 1) * math.comb(k + m - 2, k) // (m - 1) if k else 1
                assert ls.sphere_harmonic_dim(k, m) == expected

    def test_preconditions(self):
        with pytest.raises(ValidationError):
            ls.sphere_spectrum(1, 1.0, 5.0)
        with pytest.raises(ValidationError):
            ls.sphere_spectrum(2, -1.0, 5.0)


class TestTorusSpectrum:
    def test_two_pi_lattice(self):
        spec = ls.torus_spectrum(2 * math.pi * np.eye(2), 1.5)
        assert [(round(p.lam, 12), p.mult) for p in spec.pairs] == [(0.0, 1), (1.0, 4)]

    def test_unit_lattice_first_shell(self):
        # first nonzero eigenvalue 4 pi^2 ~ 39.48; keep one shell below 8 pi^2
        spec = ls.torus_spectrum(np.eye(2), 40.0)
        assert len(spec.pairs) == 2
        assert spec.pairs[1].lam == pytest.approx(4 * math.pi**2, rel=1e-12)
        assert spec.pairs[1].mult == 4

    def test_trivial_truncation(self):
        spec = ls.torus_spectrum(np.array([[1.0, 0.3], [0.0, 0.8]]), 0.0)
        assert [(p.lam, p.mult) for p in spec.pairs] == [(0.0, 1)]

    @pytest.mark.parametrize(
        "basis",
        [
            2 * math.pi * np.eye(2),
            np.array([[6.0, 1.0], [0.0, 5.0]]),
            np.array([[7.0, 3.5], [0.0, 6.062]]),  # hexagonal-ish
        ],
    )
    def test_against_bruteforce_oracle(self, basis):
        lam_max = 3.0
        spec = ls.torus_spectrum(basis, lam_max)
        oracle = torus_eigenvalues_bruteforce(basis, lam_max)
        flat = [p.lam for p in spec.pairs for _ in range(p.mult)]
        assert len(flat) == len(oracle)
        assert np.allclose(flat, oracle, rtol=1e-10, atol=1e-12)

    def test_singular_basis_rejected(self):
        with pytest.raises(ValidationError):
            ls.torus_spectrum(np.array([[1.0, 2.0], [2.0, 4.0]]), 1.0)

    def test_enumeration_cap(self):
        with pytest.raises(ResourceLimitError):
            ls.torus_spectrum(50.0 * np.eye(2), 5000.0, enum_cap=1000)


class TestMerging:
    @given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=30))
    def test_conserves_count_and_sorts(self, lams):
        lams = sorted(lams)
        pairs = ls.merge_multiplicities(lams)
        assert sum(p.mult for p in pairs) == len(lams)
        reps = [p.lam for p in pairs]
        assert reps == sorted(reps)

    def test_idempotent_on_separated_values(self):
        lams = [0.0, 2.0, 2.0 + 1e-6, 2.0 + 2e-6, 6.01, 6.012, 11.0]
        pairs = ls.merge_multiplicities(lams)
        again = ls.merge_multiplicities([p.lam for p in pairs])
        assert [p.lam for p in again] == [p.lam for p in pairs]
        assert all(p.mult == 1 for p in again)

    def test_order_independent_through_sorting(self):
        import random

        lams = [0.0, 2.0, 2.0 + 1e-6, 5.0, 5.0 + 1e-7, 9.0]
        shuffled = lams[:]
        random.Random(7).shuffle(shuffled)
        a = ls.merge_multiplicities(sorted(lams))
        b = ls.merge_multiplicities(sorted(shuffled))
        assert a == b

    def test_merge_threshold(self):
        pairs = ls.merge_multiplicities([0.0, 2.0, 2.0 + 1e-6, 2.01])
        assert [(round(p.lam, 5), p.mult) for p in pairs] == [(0.0, 1), (2.0, 2), (2.01, 1)]


@pytest.fixture(scope="module")
def ico3():
    return ls.icosphere(3)


class TestFem:
    def test_unit_sphere_eigenvalues(self, ico3):
        spec = ls.fem_spectrum(ico3, count=4)
        assert spec.pairs[0].lam == 0.0 and spec.pairs[0].mult == 1
        assert spec.pairs[1].mult == 3
        assert spec.pairs[1].lam == pytest.approx(2.0, rel=0.02)

    def test_zero_mode_only(self, ico3):
        spec = ls.fem_spectrum(ico3, count=1)
        assert spec.pairs == (ls.EigenPair(lam=0.0, mult=1),)

    def test_flat_torus_grid(self):
        spec = ls.fem_spectrum(ls.clifford_torus_mesh(32), count=5)
        assert spec.pairs[1].mult == 4
        assert spec.pairs[1].lam == pytest.approx(1.0, rel=0.02)

    def test_refinement_improves(self):
        errs = []
        for level in (1, 2, 3):
            spec = ls.fem_spectrum(ls.icosphere(level), count=4)
            errs.append(abs(spec.pairs[1].lam - 2.0))
        assert errs[0] > errs[1] > errs[2]

    def test_source_and_stats(self, ico3):
        spec = ls.fem_spectrum(ico3, count=4)
        assert spec.source == "fem"
        assert spec.mesh_stats["vertices"] == len(ico3.vertices)


class TestMeshValidation:
    def test_open_surface_rejected(self):
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValidationError, match="not closed"):
            ls.TriangulatedSurface(verts, np.array([[0, 1, 2]]))

    def test_degenerate_triangle_rejected(self):
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]])
        tris = np.array([[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]])
        with pytest.raises(ValidationError, match="area"):
            ls.TriangulatedSurface(verts, tris)

    def test_bad_index_rejected(self):
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValidationError, match="invalid vertex"):
            ls.TriangulatedSurface(verts, np.array([[0, 1, 7]]))


class TestOffFormat:
    def test_roundtrip(self, tmp_path):
        mesh = ls.icosphere(1)
        path = tmp_path / "ico.off"
        ls.save_off(mesh, path)
        loaded = ls.load_off(path)
        assert np.allclose(loaded.vertices, mesh.vertices)
        assert np.array_equal(loaded.triangles, mesh.triangles)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "bad.off"
        p.write_text("3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        with pytest.raises(ValidationError, match="OFF"):
            ls.load_off(p)

    def test_spectrum_json_pairs(self):
        spec = ls.sphere_spectrum(2, 1.0, 7.0)
        assert spec.to_json_pairs() == [[0.0, 1], [2.0, 3], [6.0, 5]]
