import random

import numpy as np
import pytest

from acslm import topology as tp
from acslm.errors import ValidationError

from oracles import betti_snf, smith_rank


class TestRankExact:
    def test_matches_snf_on_random_integer_matrices(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            m, n = rng.integers(1, 9, size=2)
            mat = rng.integers(-4, 5, size=(m, n))
            assert tp.rank_exact(mat) == smith_rank(mat)

    def test_rank_deficient(self):
        mat = np.array([[2, 4, 6], [1, 2, 3], [3, 6, 9]])
        assert tp.rank_exact(mat) == 1

    def test_empty(self):
        assert tp.rank_exact(np.zeros((0, 5), dtype=int)) == 0


class TestBetti:
    @pytest.mark.parametrize(
        "builder,expected",
        [
            (tp.point, (1, 0, 0, 0)),
            (tp.annulus, (1, 1, 0, 0)),
            (tp.tetra_sphere, (1, 0, 1, 0)),
            (tp.torus7, (1, 2, 1, 0)),
            (tp.tetra_ball, (1, 0, 0, 0)),
        ],
    )
    def test_standard_complexes(self, builder, expected):
        cx = builder()
        assert tuple(tp.betti(cx, k) for k in range(4)) == expected

    def test_against_snf_oracle(self):
        for cx in (tp.annulus(5), tp.tetra_sphere(), tp.s2_times_i(), tp.torus7()):
            for k in range(4):
                assert tp.betti(cx, k) == betti_snf(cx, k)

    def test_euler_characteristic_consistency(self):
        for cx in (tp.annulus(4), tp.tetra_ball(), tp.t2_times_i(), tp.torus7()):
            from_betti = sum((-1) ** k * tp.betti(cx, k) for k in range(4))
            assert from_betti == cx.euler_characteristic()

    def test_subdivision_invariance(self):
        for cx in (tp.annulus(4), tp.tetra_sphere()):
            sub = tp.barycentric_subdivision(cx)
            assert [tp.betti(sub, k) for k in range(4)] == [
                tp.betti(cx, k) for k in range(4)
            ]

    def test_face_closure_validation(self):
        cx = tp.annulus(4)
        cx.simplices = (cx.simplices[0][1:], cx.simplices[1], cx.simplices[2], cx.simplices[3])
        with pytest.raises(ValidationError, match="missing face"):
            cx.validate()


class TestRelativeH1:
    def test_annulus(self):
        assert tp.relative_h1(tp.annulus(6)) == 1

    def test_ball(self):
        assert tp.relative_h1(tp.tetra_ball()) == 0

    def test_s2_times_i(self):
        assert tp.relative_h1(tp.s2_times_i()) == 1

    def test_t2_times_i(self):
        assert tp.relative_h1(tp.t2_times_i()) == 1

    def test_empty_boundary_rejected(self):
        with pytest.raises(ValidationError, match="boundary"):
            tp.relative_h1(tp.tetra_sphere())

    def test_against_snf_oracle(self):
        for cx in (tp.annulus(5), tp.tetra_ball(), tp.s2_times_i(), tp.t2_times_i()):
            rel1 = tp._relative_boundary_matrix(cx, 1)
            rel2 = tp._relative_boundary_matrix(cx, 2)
            expected = rel1.shape[1] - smith_rank(rel1) - (
                smith_rank(rel2) if rel2.size else 0
            )
            assert tp.relative_h1(cx) == expected


class TestEndsCount:
    def test_two_circles(self):
        assert tp.ends_count(tp.annulus(5)) == 2

    def test_one_sphere(self):
        assert tp.ends_count(tp.tetra_ball()) == 1

    def test_mixed_boundaries(self):
        # disjoint union of two tori and a sphere as the boundary complex
        t2 = tp.t2_times_i()
        ball = tp.tetra_ball()
        nv = t2.vertex_count
        simps = [s for dim in t2.simplices for s in dim]
        simps += [tuple(v + nv for v in s) for dim in ball.simplices for s in dim]
        # connect the pieces through an interior edge so the complex is one space
        simps.append((0, nv))
        boundary = list(t2.boundary) + [
            tuple(v + nv for v in s) for s in ball.boundary
        ]
        cx = tp.SimplicialComplex(simps, boundary=boundary)
        assert tp.ends_count(cx) == 3

    def test_empty_boundary_rejected(self):
        with pytest.raises(ValidationError):
            tp.ends_count(tp.torus7())


class TestRankI:
    def test_annulus(self):
        assert tp.rank_i(tp.annulus(6)) == 0

    def test_t2_times_i(self):
        assert tp.rank_i(tp.t2_times_i()) == 0

    def test_ball(self):
        assert tp.rank_i(tp.tetra_ball()) == 0

    def test_half_open_annulus_has_rank_one(self):
        # boundary = only one of the two circles: the circle class survives
        tris = tp.annulus(5).simplices[2]
        boundary = tp.circle(5)
        cx = tp.SimplicialComplex(tris, boundary=boundary)
        assert tp.ends_count(cx) == 1
        assert tp.rank_i(cx) == tp.relative_h1(cx)


def glued_chain_complex(rng: random.Random):
    """Random chain of compatible pieces glued end to end, with a random
    vertex relabeling on top.

    Pieces: annuli (circle boundaries), S^2 x I segments optionally capped by
    a ball (sphere boundaries), T^2 x I segments (torus boundaries).  Every
    piece has its bottom ring on vertices 0..ring-1 and its top ring on the
    last ring vertices.  The identity dim H^1_c = rank_i + s - 1 must hold on
    every output.
    """
    kind = rng.choice(["circle", "sphere", "torus"])
    length = rng.randint(1, 3)
    ring_n = rng.randint(3, 6)

    def piece():
        if kind == "circle":
            return tp.annulus(ring_n), ring_n
        if kind == "sphere":
            return tp.s2_times_i(), 4
        return tp.t2_times_i(), 7

    simplices: list[tuple] = []
    left_boundary: list[tuple] = []
    last_top: list[tuple] = []
    right_map: dict[int, int] = {}
    total = 0
    for seg in range(length):
        cx, ring = piece()
        nv = cx.vertex_count
        if seg == 0:
            shift = {v: v for v in range(nv)}
            total = nv
        else:
            shift = {v: right_map[v] for v in range(ring)}
            for v in range(ring, nv):
                shift[v] = total + v - ring
            total += nv - ring
        simplices += [
            tuple(sorted(shift[v] for v in s)) for dim in cx.simplices for s in dim
        ]
        if seg == 0:
            left_boundary = [
                tuple(sorted(shift[v] for v in s)) for s in cx.boundary if max(s) < ring
            ]
        last_top = [
            tuple(sorted(shift[v] for v in s))
            for s in cx.boundary
            if min(s) >= nv - ring
        ]
        right_map = {v: shift[nv - ring + v] for v in range(ring)}
    boundary = left_boundary + last_top

    # optionally cap a sphere chain on the right with a ball
    if kind == "sphere" and rng.random() < 0.4:
        ball = tp.tetra_ball()
        shift = {v: right_map[v] for v in range(4)}
        simplices += [
            tuple(sorted(shift[v] for v in s)) for dim in ball.simplices for s in dim
        ]
        boundary = left_boundary

    perm = list(range(total))
    rng.shuffle(perm)
    simplices = [tuple(sorted(perm[v] for v in s)) for s in simplices]
    boundary = [tuple(sorted(perm[v] for v in s)) for s in boundary]
    return tp.SimplicialComplex(simplices, boundary=boundary)


class TestExactSequenceIdentity:
    def test_standard_pieces(self):
        for cx in (tp.annulus(6), tp.tetra_ball(), tp.s2_times_i(), tp.t2_times_i()):
            rep = tp.cohomology_report(cx)
            assert rep.dim_H1c == rep.rank_i + rep.s - 1

    def test_fifty_random_glued_complexes(self):
        rng = random.Random(2024)
        for trial in range(50):
            cx = glued_chain_complex(rng)
            rep = tp.cohomology_report(cx)  # raises on identity violation
            assert rep.dim_H1c == rep.rank_i + rep.s - 1
            assert rep.s >= 1


class TestFileFormat:
    def test_roundtrip(self, tmp_path):
        cx = tp.annulus(4)
        path = tmp_path / "annulus.cplx"
        tp.save_complex(cx, path)
        loaded = tp.load_complex(path)
        assert loaded.simplices == cx.simplices
        assert loaded.boundary == cx.boundary

    def test_bad_line(self, tmp_path):
        p = tmp_path / "bad.cplx"
        p.write_text("0 1\n1 x\n")
        with pytest.raises(ValidationError, match="bad simplex"):
            tp.load_complex(p)

    def test_boundary_outside_complex(self):
        with pytest.raises(ValidationError, match="not part of the complex"):
            tp.SimplicialComplex([(0, 1, 2)], boundary=[(4, 5)])
