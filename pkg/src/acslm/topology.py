"""Simplicial cohomology of the compact core: dim H^1, dim H^1_c, the rank of
the natural map between them, and the number of ends.

All ranks are computed over the rationals by fraction-free (Bareiss) integer
elimination: float ranks are unreliable and no torsion information is needed.
Complex dimension is capped at 3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, ValidationError

Simplex = tuple[int, ...]

_INT64_GUARD = 1 << 40


@dataclass(frozen=True)
class CohomologyReport:
    dim_H1: int
    dim_H1c: int
    rank_i: int
    s: int
    betti: tuple[int, ...]

    def __post_init__(self):
        if self.s < 1:
            raise ValidationError("a manifold with ends has at least one end")
        if self.dim_H1c != self.rank_i + self.s - 1:
            raise InternalConsistencyError(
                f"exact-sequence identity violated: dim H^1_c = {self.dim_H1c} "
                f"but rank_i + s - 1 = {self.rank_i + self.s - 1}"
            )


class SimplicialComplex:
    """Finite simplicial complex of dimension <= 3 with a distinguished
    boundary subcomplex.

    Simplices are sorted vertex tuples, stored per dimension, closed under
    faces and deduplicated.  The boundary subcomplex must itself be closed
    under faces and contained in the complex.
    """

    def __init__(self, simplices, boundary=()):
        by_dim: list[set[Simplex]] = [set(), set(), set(), set()]
        for s in simplices:
            t = tuple(sorted(int(v) for v in s))
            if len(set(t)) != len(t):
                raise ValidationError(f"simplex {s} repeats a vertex")
            if len(t) - 1 > 3:
                raise ValidationError(f"simplex {s} has dimension > 3")
            by_dim[len(t) - 1].add(t)
        # close under faces
        for k in (3, 2, 1):
            for s in list(by_dim[k]):
                for face in itertools.combinations(s, k):
                    by_dim[k - 1].add(face)
        self.simplices: tuple[tuple[Simplex, ...], ...] = tuple(
            tuple(sorted(by_dim[k])) for k in range(4)
        )
        self._index = [
            {s: i for i, s in enumerate(self.simplices[k])} for k in range(4)
        ]

        bset: set[Simplex] = set()
        for s in boundary:
            t = tuple(sorted(int(v) for v in s))
            bset.add(t)
            for k in range(1, len(t)):
                for face in itertools.combinations(t, k):
                    bset.add(face)
        for t in bset:
            k = len(t) - 1
            if k > 3 or t not in self._index[k]:
                raise ValidationError(
                    f"boundary simplex {t} is not part of the complex"
                )
        self.boundary: tuple[Simplex, ...] = tuple(sorted(bset, key=lambda t: (len(t), t)))
        self._boundary_set = bset

    # -- basic queries ------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.simplices[0])

    def counts(self) -> tuple[int, int, int, int]:
        return tuple(len(self.simplices[k]) for k in range(4))

    def euler_characteristic(self) -> int:
        c = self.counts()
        return c[0] - c[1] + c[2] - c[3]

    def validate(self):
        """Face closure is enforced at construction; re-check and report the
        first missing face if a caller mutated internals."""
        for k in (1, 2, 3):
            present = set(self.simplices[k - 1])
            for s in self.simplices[k]:
                for face in itertools.combinations(s, k):
                    if face not in present:
                        raise ValidationError(f"missing face {face} of simplex {s}")

    def boundary_matrix(self, k: int) -> np.ndarray:
        """Matrix of the boundary map C_k -> C_(k-1) in the sorted bases."""
        if not 1 <= k <= 3:
            raise ValidationError(f"boundary map defined for 1 <= k <= 3, got {k}")
        rows = len(self.simplices[k - 1])
        cols = len(self.simplices[k])
        mat = np.zeros((rows, cols), dtype=np.int64)
        for j, s in enumerate(self.simplices[k]):
            for drop in range(k + 1):
                face = s[:drop] + s[drop + 1 :]
                mat[self._index[k - 1][face], j] = (-1) ** drop
        return mat

    def is_boundary_simplex(self, s: Simplex) -> bool:
        return s in self._boundary_set

    def is_connected(self) -> bool:
        return _component_count(self.simplices[0], self.simplices[1]) == 1


# --------------------------------------------------------------------------
# exact linear algebra


def rank_exact(mat: np.ndarray) -> int:
    """Rank over Q of an integer matrix by Bareiss fraction-free elimination."""
    if mat.size == 0:
        return 0
    a = [[int(x) for x in row] for row in np.asarray(mat)]
    m, n = len(a), len(a[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pivot = a[r][c]
        for i in range(r + 1, m):
            aic = a[i][c]
            if aic == 0 and pivot == prev:
                continue
            row_i, row_r = a[i], a[r]
            for j in range(c + 1, n):
                row_i[j] = (row_i[j] * pivot - aic * row_r[j]) // prev
            row_i[c] = 0
        prev = pivot
        r += 1
        rank += 1
        if r == m:
            break
    return rank


# --------------------------------------------------------------------------
# operations


def betti(complex_: SimplicialComplex, k: int) -> int:
    """dim H_k(complex; Q) = nullity(d_k) - rank(d_(k+1)).  By universal
    coefficients this equals dim H^k over Q."""
    if not 0 <= k <= 3:
        raise ValidationError(f"degree must satisfy 0 <= k <= 3, got {k}")
    n_k = len(complex_.simplices[k])
    rank_dk = rank_exact(complex_.boundary_matrix(k)) if k >= 1 else 0
    rank_dk1 = (
        rank_exact(complex_.boundary_matrix(k + 1))
        if k + 1 <= 3 and complex_.simplices[k + 1]
        else 0
    )
    return n_k - rank_dk - rank_dk1


def ends_count(complex_: SimplicialComplex) -> int:
    """Number of connected components of the boundary subcomplex."""
    bverts = tuple(s for s in complex_.boundary if len(s) == 1)
    bedges = tuple(s for s in complex_.boundary if len(s) == 2)
    if not bverts:
        raise ValidationError(
            "boundary subcomplex is empty: an asymptotically conical core has "
            "nonempty boundary"
        )
    return _component_count(bverts, bedges)


def _component_count(vertices, edges) -> int:
    parent = {v[0]: v[0] for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v[0]) for v in vertices})


def _relative_boundary_matrix(complex_: SimplicialComplex, k: int) -> np.ndarray:
    """Boundary map of the relative chain complex C_k(X)/C_k(A): rows and
    columns restricted to simplices outside the boundary subcomplex."""
    mat = complex_.boundary_matrix(k)
    keep_rows = [
        i
        for i, s in enumerate(complex_.simplices[k - 1])
        if not complex_.is_boundary_simplex(s)
    ]
    keep_cols = [
        j
        for j, s in enumerate(complex_.simplices[k])
        if not complex_.is_boundary_simplex(s)
    ]
    return mat[np.ix_(keep_rows, keep_cols)]


def relative_h1(complex_: SimplicialComplex) -> int:
    """dim H^1(X, boundary; Q), the compactly-supported dim H^1_c of the
    manifold with ends modeled by the complex."""
    if not complex_.boundary:
        raise ValidationError(
            "boundary subcomplex is empty: relative cohomology needs a "
            "nonempty boundary"
        )
    rel1 = _relative_boundary_matrix(complex_, 1)
    n1 = rel1.shape[1]
    rank_d1 = rank_exact(rel1)
    rank_d2 = 0
    if complex_.simplices[2]:
        rel2 = _relative_boundary_matrix(complex_, 2)
        if rel2.size:
            rank_d2 = rank_exact(rel2)
    return n1 - rank_d1 - rank_d2


def rank_i(complex_: SimplicialComplex) -> int:
    """Rank of the natural map H^1(X, boundary; Q) -> H^1(X; Q).

    Computed at cochain level: relative cocycles are 1-cochains vanishing on
    boundary edges with zero coboundary; their image in H^1(X) has dimension
    dim Z^1_rel - dim(Z^1_rel intersect B^1(X)).
    """
    if not complex_.boundary:
        raise ValidationError("boundary subcomplex is empty")
    d1 = complex_.boundary_matrix(1)  # edges x vertices after transpose
    nonA_edges = [
        j
        for j, s in enumerate(complex_.simplices[1])
        if not complex_.is_boundary_simplex(s)
    ]
    A_edges = [
        j
        for j, s in enumerate(complex_.simplices[1])
        if complex_.is_boundary_simplex(s)
    ]

    # coboundary C^1 -> C^2 is the transpose of the boundary map C_2 -> C_1
    if complex_.simplices[2]:
        d2 = complex_.boundary_matrix(2)
        delta1_rel = d2[nonA_edges, :].T  # triangles x nonA-edges
        dim_z1_rel = len(nonA_edges) - rank_exact(delta1_rel)
    else:
        dim_z1_rel = len(nonA_edges)

    # delta0 f = f(head) - f(tail) on each edge; rows of d1^T
    delta0 = d1.T  # edges x vertices
    nv = complex_.vertex_count
    dim_ker_delta0 = nv - rank_exact(delta0)
    if A_edges:
        dim_S = nv - rank_exact(delta0[A_edges, :])
    else:
        dim_S = nv
    dim_intersection = dim_S - dim_ker_delta0

    rank = dim_z1_rel - dim_intersection
    # postcondition from the long exact sequence of the pair
    expected = relative_h1(complex_)
    s = ends_count(complex_)
    if expected != rank + s - 1:
        raise InternalConsistencyError(
            f"exact-sequence identity violated: dim H^1_c = {expected}, "
            f"rank_i = {rank}, s = {s}"
        )
    return rank


def cohomology_report(complex_: SimplicialComplex) -> CohomologyReport:
    """Assemble all paper-facing topological dimensions of the core."""
    if not complex_.is_connected():
        raise ValidationError("complex must be connected (one manifold with ends)")
    b = tuple(betti(complex_, k) for k in range(4))
    return CohomologyReport(
        dim_H1=b[1],
        dim_H1c=relative_h1(complex_),
        rank_i=rank_i(complex_),
        s=ends_count(complex_),
        betti=b,
    )


# --------------------------------------------------------------------------
# generators for tests and fixtures


def tetra_ball() -> SimplicialComplex:
    """Solid tetrahedron: a 3-ball whose boundary is the 2-sphere."""
    tet = (0, 1, 2, 3)
    boundary = list(itertools.combinations(tet, 3))
    return SimplicialComplex([tet], boundary=boundary)


def tetra_sphere() -> SimplicialComplex:
    """Boundary of the tetrahedron: minimal triangulated S^2 (no boundary)."""
    return SimplicialComplex(list(itertools.combinations((0, 1, 2, 3), 3)))


def point() -> SimplicialComplex:
    return SimplicialComplex([(0,)])


def circle(n: int = 3) -> list[Simplex]:
    """Edge loop on vertices 0..n-1 (helper: list of simplices, not a complex)."""
    if n < 3:
        raise ValidationError("a simplicial circle needs at least 3 vertices")
    return [tuple(sorted((i, (i + 1) % n))) for i in range(n)]


def annulus(n: int = 6) -> SimplicialComplex:
    """Triangulated S^1 x [0, 1]: two n-gon rings joined by a triangle strip."""
    if n < 3:
        raise ValidationError("annulus needs at least 3 vertices per ring")
    tris = []
    for i in range(n):
        j = (i + 1) % n
        tris.append((i, j, n + i))
        tris.append((j, n + i, n + j))
    boundary = circle(n) + [tuple(sorted((n + a, n + b))) for a, b in circle(n)]
    return SimplicialComplex(tris, boundary=boundary)


def torus7() -> SimplicialComplex:
    """Seven-vertex triangulated torus (no boundary)."""
    faces = []
    for i in range(7):
        faces.append(tuple(sorted((i, (i + 1) % 7, (i + 3) % 7))))
        faces.append(tuple(sorted((i, (i + 2) % 7, (i + 3) % 7))))
    return SimplicialComplex(faces)


def surface_times_interval(surface: SimplicialComplex) -> SimplicialComplex:
    """Prism M x [0, 1] over a triangulated closed surface M, split into
    tetrahedra by the vertex-order staircase rule; boundary = both copies of M."""
    tris = surface.simplices[2]
    if not tris:
        raise ValidationError("surface must be 2-dimensional")
    nv = surface.vertex_count
    vmap = {v[0]: i for i, v in enumerate(surface.simplices[0])}
    tets = []
    for tri in tris:
        a, b, c = (vmap[v] for v in tri)  # a < b < c in relabeled order
        a1, b1, c1 = a + nv, b + nv, c + nv
        tets.append((a, b, c, c1))
        tets.append((a, b, b1, c1))
        tets.append((a, a1, b1, c1))
    boundary = [tuple(vmap[v] for v in t) for t in tris] + [
        tuple(vmap[v] + nv for v in t) for t in tris
    ]
    return SimplicialComplex(tets, boundary=boundary)


def s2_times_i() -> SimplicialComplex:
    return surface_times_interval(tetra_sphere())


def t2_times_i() -> SimplicialComplex:
    return surface_times_interval(torus7())


def barycentric_subdivision(complex_: SimplicialComplex) -> SimplicialComplex:
    """One barycentric subdivision; the boundary subcomplex subdivides along."""
    label = {}
    for k in range(4):
        for s in complex_.simplices[k]:
            label[s] = len(label)
    top = []
    for k in range(3, -1, -1):
        for s in complex_.simplices[k]:
            if not _has_coface(complex_, s):
                top.append(s)
    new_simplices = []
    new_boundary = []
    for s in top:
        for chain in _flags(s):
            new_simplices.append(tuple(sorted(label[f] for f in chain)))
    bset = set(complex_.boundary)
    btop = [s for s in bset if not any(s != t and set(s) <= set(t) for t in bset)]
    for s in btop:
        for chain in _flags(s):
            new_boundary.append(tuple(sorted(label[f] for f in chain)))
    return SimplicialComplex(new_simplices, boundary=new_boundary)


def _has_coface(complex_: SimplicialComplex, s: Simplex) -> bool:
    k = len(s) - 1
    if k == 3:
        return False
    return any(set(s) < set(t) for t in complex_.simplices[k + 1])


def _flags(s: Simplex):
    """Maximal chains of faces of s, each a flag f_0 < f_1 < ... < s."""
    if len(s) == 1:
        yield (s,)
        return
    for drop in range(len(s)):
        face = s[:drop] + s[drop + 1 :]
        for chain in _flags(face):
            yield chain + (s,)


# --------------------------------------------------------------------------
# file format: one simplex per line, '%boundary' separates the boundary list


def load_complex(path) -> SimplicialComplex:
    simplices, boundary = [], []
    target = simplices
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line == "%boundary":
                target = boundary
                continue
            try:
                target.append(tuple(int(t) for t in line.split()))
            except ValueError as exc:
                raise ValidationError(f"{path}:{ln}: bad simplex line {line!r}") from exc
    return SimplicialComplex(simplices, boundary=boundary)


def save_complex(complex_: SimplicialComplex, path):
    with open(path, "w") as fh:
        for k in range(4):
            for s in complex_.simplices[k]:
                if k == 0 or not _is_face_of_listed(complex_, s):
                    fh.write(" ".join(map(str, s)) + "\n")
        if complex_.boundary:
            fh.write("%boundary\n")
            for s in complex_.boundary:
                fh.write(" ".join(map(str, s)) + "\n")


def _is_face_of_listed(complex_: SimplicialComplex, s: Simplex) -> bool:
    return _has_coface(complex_, s)
