"""Laplace-Beltrami spectra of compact link components.

Three producers: closed forms for round spheres and flat tori, and a
piecewise-linear finite-element solve (cotangent stiffness, lumped mass)
for triangulated closed surfaces.  Every spectrum is an ascending list of
(eigenvalue, multiplicity) pairs starting at (0, 1), truncated at a stated
lambda_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericError, ResourceLimitError, ValidationError

#: relative eigenvalue gap below which FEM eigenvalues merge into one multiplicity
FEM_MERGE_TOL = 1e-3

#: numerically-zero threshold for the constant eigenvalue of a closed surface
ZERO_MODE_TOL = 1e-8

#: cap on dual-lattice points enumerated by torus_spectrum
TORUS_ENUM_CAP = 2_000_000


@dataclass(frozen=True)
class EigenPair:
    lam: float
    mult: int


@dataclass(frozen=True)
class LinkSpectrum:
    """Ascending eigenvalue/multiplicity list of one link component."""

    pairs: tuple[EigenPair, ...]
    truncation: float
    source: str  # "closed_form" or "fem"
    mesh_stats: dict | None = None

    def __post_init__(self):
        if not self.pairs:
            raise ValidationError("spectrum must contain at least the zero mode")
        p0 = self.pairs[0]
        if p0.lam != 0.0 or p0.mult != 1:
            raise ValidationError(
                f"spectrum must start with (0, 1), got ({p0.lam}, {p0.mult})"
            )
        lams = [p.lam for p in self.pairs]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("eigenvalues must be strictly increasing")
        if any(p.mult < 1 for p in self.pairs):
            raise ValidationError("multiplicities must be positive")
        if lams[-1] > self.truncation + 1e-12 * max(1.0, abs(self.truncation)):
            raise ValidationError(
                f"eigenvalue {lams[-1]} exceeds stated truncation {self.truncation}"
            )

    def to_json_pairs(self) -> list[list[float]]:
        return [[p.lam, p.mult] for p in self.pairs]


# --------------------------------------------------------------------------
# link component descriptions


@dataclass(frozen=True)
class RoundSphere:
    dim: int
    radius: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValidationError(f"sphere dimension must be >= 2, got {self.dim}")
        if self.radius <= 0:
            raise ValidationError(f"sphere radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class FlatTorus:
    basis: np.ndarray  # d x d lattice basis, columns generate the lattice

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 2:
            raise ValidationError("torus basis must be a d x d matrix with d >= 2")
        scale = np.abs(b).max()
        if scale == 0 or abs(np.linalg.det(b)) <= 1e-12 * scale ** b.shape[0]:
            raise ValidationError("torus lattice basis is singular")
        object.__setattr__(self, "basis", b)


@dataclass(frozen=True)
class TriangulatedSurface:
    """Closed surface embedded in R^3 (or R^4, for flat tori) with triangle faces."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=int)
        if v.ndim != 2 or v.shape[1] not in (3, 4):
            raise ValidationError("vertices must be an (nv, 3) or (nv, 4) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValidationError("triangles must be an (nt, 3) index array")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        validate_mesh(self)


LinkComponent = RoundSphere | FlatTorus | TriangulatedSurface


def validate_mesh(mesh: TriangulatedSurface):
    v, t = mesh.vertices, mesh.triangles
    nv = len(v)
    if t.min(initial=0) < 0 or t.max(initial=-1) >= nv:
        raise ValidationError("triangle references an invalid vertex index")
    if any(len(set(tri)) != 3 for tri in t):
        raise ValidationError("degenerate triangle: repeated vertex index")
    scale = float(np.ptp(v, axis=0).max())
    areas = _triangle_areas(v, t)
    if np.any(areas <= 1e-12 * scale * scale):
        bad = int(np.argmin(areas))
        raise ValidationError(f"degenerate triangle {bad}: area {areas[bad]:.3e}")
    edge_count: dict[tuple[int, int], int] = {}
    for tri in t:
        a, b, c = sorted(int(i) for i in tri)
        for e in ((a, b), (a, c), (b, c)):
            edge_count[e] = edge_count.get(e, 0) + 1
    bad_edges = [e for e, cnt in edge_count.items() if cnt != 2]
    if bad_edges:
        raise ValidationError(
            f"surface is not closed: edge {bad_edges[0]} lies on "
            f"{edge_count[bad_edges[0]]} triangle(s), expected 2"
        )


def _triangle_areas(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    e1 = v[t[:, 1]] - v[t[:, 0]]
    e2 = v[t[:, 2]] - v[t[:, 0]]
    # Gram determinant works in any ambient dimension
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    return 0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))


# --------------------------------------------------------------------------
# closed forms


def sphere_harmonic_dim(k: int, m: int) -> int:
    """Dimension of degree-k spherical harmonics on S^m."""
    if k == 0:
        return 1
    return math.comb(k + m, m) - math.comb(k + m - 2, m)


def sphere_spectrum(m: int, c: float, lambda_max: float) -> LinkSpectrum:
    """Spectrum of the round sphere S^m of radius c: k(k+m-1)/c^2 with the
    spherical-harmonic multiplicities."""
    RoundSphere(dim=m, radius=c)  # validates
    if lambda_max < 0:
        raise ValidationError(f"lambda_max must be nonnegative, got {lambda_max}")
    pairs = []
    k = 0
    while True:
        lam = k * (k + m - 1) / (c * c)
        if lam > lambda_max:
            break
        pairs.append(EigenPair(lam=lam, mult=sphere_harmonic_dim(k, m)))
        k += 1
    return LinkSpectrum(pairs=tuple(pairs), truncation=lambda_max, source="closed_form")


def torus_spectrum(
    basis: np.ndarray, lambda_max: float, enum_cap: int = TORUS_ENUM_CAP
) -> LinkSpectrum:
    """Spectrum of the flat torus R^d / (basis Z^d): 4 pi^2 |mu|^2 over the
    dual lattice, multiplicity the number of dual vectors at each value."""
    torus = FlatTorus(basis=basis)
    if lambda_max < 0:
        raise ValidationError(f"lambda_max must be nonnegative, got {lambda_max}")
    b = torus.basis
    d = b.shape[0]
    dual = np.linalg.inv(b).T  # columns generate the dual lattice
    # |dual m| >= |m| / sigma_max(basis), so a box of radius R suffices
    sigma_max = np.linalg.norm(b, 2)
    radius = int(math.ceil(sigma_max * math.sqrt(lambda_max) / (2 * math.pi))) + 1
    if (2 * radius + 1) ** d > enum_cap:
        raise ResourceLimitError(
            f"torus enumeration needs {(2 * radius + 1) ** d} lattice points, "
            f"cap is {enum_cap}; lower lambda_max"
        )
    axes = np.arange(-radius, radius + 1)
    grid = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mu = grid @ dual.T
    lams = 4.0 * math.pi**2 * np.einsum("ij,ij->i", mu, mu)
    lams = np.sort(lams[lams <= lambda_max * (1 + 1e-12)])
    pairs = _merge_exact(lams)
    return LinkSpectrum(pairs=tuple(pairs), truncation=lambda_max, source="closed_form")


def _merge_exact(lams: np.ndarray, rel_tol: float = 1e-9) -> list[EigenPair]:
    """Merge a sorted eigenvalue array into (value, multiplicity) pairs.

    Closed-form values of one multiplet agree to roundoff, so a tight
    relative tolerance suffices.
    """
    pairs: list[EigenPair] = []
    for lam in lams:
        if pairs and abs(lam - pairs[-1].lam) <= rel_tol * max(1.0, abs(lam)):
            pairs[-1] = EigenPair(lam=pairs[-1].lam, mult=pairs[-1].mult + 1)
        else:
            pairs.append(EigenPair(lam=float(lam), mult=1))
    if pairs and abs(pairs[0].lam) <= ZERO_MODE_TOL:
        pairs[0] = EigenPair(lam=0.0, mult=pairs[0].mult)
    return pairs


def merge_multiplicities(
    lams: Sequence[float], rel_gap: float = FEM_MERGE_TOL
) -> list[EigenPair]:
    """Cluster an ascending eigenvalue list: successive values with relative
    gap below ``rel_gap`` join one multiplet represented by their mean."""
    clusters: list[list[float]] = []
    for lam in lams:
        if clusters:
            prev = clusters[-1][-1]
            scale = max(abs(prev), abs(lam))
            if scale > 0 and (lam - prev) < rel_gap * scale:
                clusters[-1].append(float(lam))
                continue
            if scale == 0:
                clusters[-1].append(float(lam))
                continue
        clusters.append([float(lam)])
    return [
        EigenPair(lam=float(np.mean(cl)), mult=len(cl)) for cl in clusters
    ]


# --------------------------------------------------------------------------
# finite elements


def cotangent_stiffness_mass(mesh: TriangulatedSurface) -> tuple[sp.csr_matrix, np.ndarray]:
    """Piecewise-linear stiffness (cotangent weights) and lumped mass vector."""
    v, t = mesh.vertices, mesh.triangles
    nv = len(v)
    areas = _triangle_areas(v, t)

    # squared edge lengths opposite each local vertex
    l2 = np.empty((len(t), 3))
    for k, (i, j) in enumerate(((1, 2), (2, 0), (0, 1))):
        e = v[t[:, i]] - v[t[:, j]]
        l2[:, k] = np.einsum("ij,ij->i", e, e)
    # cot(angle at local vertex k) = (l_i^2 + l_j^2 - l_k^2) / (4 area)
    cots = np.empty_like(l2)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        cots[:, k] = (l2[:, i] + l2[:, j] - l2[:, k]) / (4.0 * areas)

    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        w = 0.5 * cots[:, k]
        rows.extend([t[:, i], t[:, j], t[:, i], t[:, j]])
        cols.extend([t[:, j], t[:, i], t[:, i], t[:, j]])
        vals.extend([-w, -w, w, w])
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nv, nv),
    )
    mass = np.zeros(nv)
    for k in range(3):
        np.add.at(mass, t[:, k], areas / 3.0)
    return K, mass


def fem_spectrum(mesh: TriangulatedSurface, count: int) -> LinkSpectrum:
    """Smallest ``count`` eigenvalues of (stiffness, lumped mass), merged into
    multiplicities at relative gap FEM_MERGE_TOL."""
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    K, mass = cotangent_stiffness_mass(mesh)
    nv = K.shape[0]
    if count >= nv - 1:
        raise ValidationError(f"count {count} too large for a mesh with {nv} vertices")
    d = 1.0 / np.sqrt(mass)
    A = sp.diags(d) @ K @ sp.diags(d)
    A = sp.csc_matrix(0.5 * (A + A.T))
    v0 = np.random.default_rng(0).standard_normal(nv)  # fixed seed: deterministic runs
    try:
        # shift-invert around a small negative sigma keeps A - sigma I positive
        # definite even though the constant mode sits exactly at zero
        lams = spla.eigsh(
            A, k=count, sigma=-1e-2, which="LM", v0=v0, return_eigenvectors=False
        )
    except spla.ArpackNoConvergence as exc:
        raise NumericError(
            "eigenvalue iteration did not converge",
            diagnostics={
                "converged": len(exc.eigenvalues),
                "requested": count,
                "mesh_vertices": nv,
            },
        ) from exc
    lams = np.sort(lams)
    if abs(lams[0]) > ZERO_MODE_TOL:
        raise NumericError(
            f"constant mode resolved to {lams[0]:.3e}, expected |lam0| <= {ZERO_MODE_TOL}",
            diagnostics={"eigenvalues": lams.tolist()},
        )
    lams[0] = 0.0
    lams = np.maximum(lams, 0.0)
    pairs = merge_multiplicities(lams)
    stats = {
        "vertices": int(nv),
        "triangles": int(len(mesh.triangles)),
        "mean_edge": float(np.sqrt(np.mean(_triangle_areas(mesh.vertices, mesh.triangles)))),
    }
    return LinkSpectrum(
        pairs=tuple(pairs),
        truncation=float(lams[-1]),
        source="fem",
        mesh_stats=stats,
    )


def spectrum_of(link: LinkComponent, lambda_max: float | None = None,
                count: int | None = None) -> LinkSpectrum:
    """Dispatch a link description to the right producer."""
    if isinstance(link, RoundSphere):
        if lambda_max is None:
            raise ValidationError("sphere links require lambda_max")
        return sphere_spectrum(link.dim, link.radius, lambda_max)
    if isinstance(link, FlatTorus):
        if lambda_max is None:
            raise ValidationError("torus links require lambda_max")
        return torus_spectrum(link.basis, lambda_max)
    if isinstance(link, TriangulatedSurface):
        if count is None:
            raise ValidationError("mesh links require an eigenvalue count")
        return fem_spectrum(link, count)
    raise ValidationError(f"unknown link component {link!r}")


# --------------------------------------------------------------------------
# mesh generators and OFF files


def icosphere(subdivisions: int) -> TriangulatedSurface:
    """Unit sphere mesh: icosahedron with each triangle split 4-ways per level,
    vertices projected back to the sphere."""
    if subdivisions < 0:
        raise ValidationError("subdivisions must be nonnegative")
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(p) for p in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = np.array(verts[i]) + np.array(verts[j])
                p /= np.linalg.norm(p)
                verts.append(tuple(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangulatedSurface(
        vertices=np.array(verts), triangles=np.array(faces, dtype=int)
    )


def clifford_torus_mesh(n: int, period: float = 2.0 * math.pi) -> TriangulatedSurface:
    """Flat torus [0, period)^2 as an n x n periodic grid embedded isometrically
    in R^4 via (cos u, sin u, cos v, sin v) scaled to unit flat metric."""
    if n < 3:
        raise ValidationError("grid must be at least 3 x 3")
    scale = period / (2.0 * math.pi)
    us = np.arange(n) * (period / n)
    uu, vv = np.meshgrid(us, us, indexing="ij")
    ang_u, ang_v = uu / scale, vv / scale
    verts = np.stack(
        [
            scale * np.cos(ang_u), scale * np.sin(ang_u),
            scale * np.cos(ang_v), scale * np.sin(ang_v),
        ],
        axis=-1,
    ).reshape(-1, 4)
    faces = []
    for i in range(n):
        for j in range(n):
            a = i * n + j
            b = ((i + 1) % n) * n + j
            c = ((i + 1) % n) * n + (j + 1) % n
            d = i * n + (j + 1) % n
            faces.append((a, b, c))
            faces.append((a, c, d))
    return TriangulatedSurface(vertices=verts, triangles=np.array(faces, dtype=int))


def load_off(path) -> TriangulatedSurface:
    """Read an ASCII OFF file: header, counts, vertex lines, face lines '3 i j k'."""
    with open(path) as fh:
        tokens: list[str] = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValidationError(f"{path}: missing OFF header")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4  # skip edge count
        verts = np.array(
            [float(x) for x in tokens[pos : pos + 3 * nv]], dtype=float
        ).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise ValidationError(f"{path}: only triangle faces supported, got {k}-gon")
            faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
            pos += 4
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed OFF file: {exc}") from exc
    return TriangulatedSurface(vertices=verts, triangles=np.array(faces, dtype=int))


def save_off(mesh: TriangulatedSurface, path):
    if mesh.vertices.shape[1] != 3:
        raise ValidationError("OFF export requires vertices in R^3")
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.triangles)} 0\n")
        for p in mesh.vertices:
            fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for tri in mesh.triangles:
            fh.write(f"3 {tri[0]} {tri[1]} {tri[2]}\n")
