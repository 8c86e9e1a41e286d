"""Simplicial meshes of [0,1]^d (d = 1, 2), node perturbations, mesh pairing.

Meshes are immutable after construction: the coordinate and connectivity
arrays are write-protected, and every operation returns a new mesh.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeshError, GeometryError, InvalidArgumentError

COORD_TOL = 1e-14          # per-coordinate tolerance for "identical element"
MEASURE_TOL = 1e-12
SHAPE_REGULARITY_BOUND = 10.0


class Mesh:
    """A 1-D interval mesh or 2-D triangle mesh with boundary flags.

    Attributes
    ----------
    dimension : int, 1 or 2
    nodes : (n_nodes, dimension) array
    elements : (n_elements, dimension+1) int array, counterclockwise in 2-D
    boundary_nodes : frozenset of node indices on the domain boundary
    h : float, maximum element diameter
    """

    def __init__(self, dimension, nodes, elements, boundary_nodes):
        if dimension not in (1, 2):
            raise InvalidArgumentError(f"dimension must be 1 or 2, got {dimension}")
        nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        elements = np.ascontiguousarray(np.asarray(elements, dtype=np.int64))
        if nodes.shape[1] != dimension or elements.shape[1] != dimension + 1:
            raise InvalidArgumentError("node/element array shapes do not match dimension")
        self.dimension = dimension
        self.nodes = nodes
        self.elements = elements
        self.boundary_nodes = frozenset(int(i) for i in boundary_nodes)

        verts = nodes[elements]                       # (m, d+1, d)
        jac = np.swapaxes(verts[:, 1:, :] - verts[:, :1, :], 1, 2)   # (m, d, d)
        det = np.linalg.det(jac) if dimension == 2 else jac[:, 0, 0]
        if np.any(det <= 0.0):
            raise DegenerateMeshError("element with nonpositive measure")
        self.element_vertices = verts
        self.jacobians = jac
        self.jacobian_dets = det
        self.inverse_jacobians = np.linalg.inv(jac)
        self.element_measures = det / (1.0 if dimension == 1 else 2.0)
        self.element_diameters = self._diameters(verts)
        self.h = float(self.element_diameters.max())
        for arr in (self.nodes, self.elements, self.element_vertices, self.jacobians,
                    self.jacobian_dets, self.inverse_jacobians, self.element_measures,
                    self.element_diameters):
            arr.setflags(write=False)

    @staticmethod
    def _diameters(verts):
        m, nv, _ = verts.shape
        diam = np.zeros(m)
        for i in range(nv):
            for j in range(i + 1, nv):
                diam = np.maximum(diam, np.linalg.norm(verts[:, i] - verts[:, j], axis=1))
        return diam

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def domain_measure(self):
        return float(self.element_measures.sum())

    def inradii(self):
        """Element inradii (2-D: area / semiperimeter; 1-D: half length)."""
        if self.dimension == 1:
            return 0.5 * self.element_measures
        v = self.element_vertices
        a = np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        b = np.linalg.norm(v[:, 2] - v[:, 1], axis=1)
        c = np.linalg.norm(v[:, 0] - v[:, 2], axis=1)
        return 2.0 * self.element_measures / (a + b + c)

    def to_text(self):
        """Plain-text export: header, node lines, element lines, boundary indices."""
        lines = [f"{self.dimension} {self.n_nodes} {self.n_elements}"]
        for p in self.nodes:
            lines.append(" ".join(f"{x:.17g}" for x in p))
        for el in self.elements:
            lines.append(" ".join(str(int(i)) for i in el))
        lines.append(" ".join(str(i) for i in sorted(self.boundary_nodes)))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        lines = [ln for ln in text.strip().splitlines()]
        dim, nn, ne = (int(t) for t in lines[0].split())
        nodes = [[float(t) for t in lines[1 + k].split()] for k in range(nn)]
        elems = [[int(t) for t in lines[1 + nn + k].split()] for k in range(ne)]
        bnd = [int(t) for t in lines[1 + nn + ne].split()] if len(lines) > 1 + nn + ne else []
        return Mesh(dim, np.array(nodes), np.array(elems), bnd)


def build_uniform_interval(n):
    """Uniform mesh of [0,1] with n elements and nodes at i/n."""
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    nodes = np.linspace(0.0, 1.0, n + 1)
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(1, nodes, elements, {0, n})


def build_uniform_square(n):
    """Structured mesh of [0,1]^2: each lattice square split along the same diagonal.

    All diagonals run bottom-left to top-right; triangles are counterclockwise.
    """
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)               # row j = constant y
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (n + 1) + i

    elements = []
    for j in range(n):
        for i in range(n):
            v00, v10 = nid(i, j), nid(i + 1, j)
            v01, v11 = nid(i, j + 1), nid(i + 1, j + 1)
            elements.append([v00, v10, v11])
            elements.append([v00, v11, v01])
    boundary = set()
    for k in range(n + 1):
        boundary |= {nid(k, 0), nid(k, n), nid(0, k), nid(n, k)}
    return Mesh(2, nodes, np.array(elements), boundary)


def _as_displacement(mesh, displacement):
    d = np.atleast_1d(np.asarray(displacement, dtype=float))
    if d.shape != (mesh.dimension,):
        raise InvalidArgumentError(
            f"displacement must have {mesh.dimension} component(s), got shape {d.shape}")
    return d


def perturb_node_nearest(mesh, point, displacement):
    """Translate the single node nearest to `point` (ties: lowest index).

    The nearest node must be interior, and the displacement must keep every
    incident element at positive measure.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    disp = _as_displacement(mesh, displacement)
    dist2 = np.sum((mesh.nodes - point[None, :]) ** 2, axis=1)
    k = int(np.argmin(dist2))
    if k in mesh.boundary_nodes:
        raise InvalidArgumentError(f"nearest node {k} lies on the boundary")
    nodes = mesh.nodes.copy()
    nodes[k] += disp
    try:
        return Mesh(mesh.dimension, nodes, mesh.elements, mesh.boundary_nodes)
    except DegenerateMeshError as exc:
        raise DegenerateMeshError(
            f"displacement of node {k} inverts an incident element") from exc


def _boundary_distance(nodes):
    """Euclidean distance to the boundary of the unit box (meshes live in [0,1]^d)."""
    return np.min(np.concatenate([nodes, 1.0 - nodes], axis=1), axis=1)


def perturb_boundary_band(mesh, band_distance, displacement):
    """Translate every interior node whose distance to the boundary is band_distance."""
    if mesh.dimension != 2:
        raise InvalidArgumentError("boundary-band perturbation requires a 2-D mesh")
    disp = _as_displacement(mesh, displacement)
    dist = _boundary_distance(mesh.nodes)
    sel = np.where(np.abs(dist - band_distance) <= 1e-12)[0]
    sel = [k for k in sel if k not in mesh.boundary_nodes]
    nodes = mesh.nodes.copy()
    nodes[sel] += disp[None, :]
    try:
        return Mesh(mesh.dimension, nodes, mesh.elements, mesh.boundary_nodes)
    except DegenerateMeshError as exc:
        raise DegenerateMeshError("band displacement inverts an element") from exc


@dataclass(frozen=True)
class MeshPair:
    """Two meshes of the same domain with their shared/differing classification."""

    mesh_a: Mesh
    mesh_b: Mesh
    shared_elements: frozenset          # of (index_in_a, index_in_b)
    differing_region_measure: float
    gamma_nominal: float
    shared_mask_a: np.ndarray = field(repr=False, compare=False, default=None)
    shared_mask_b: np.ndarray = field(repr=False, compare=False, default=None)

    def differing_elements_a(self):
        return np.where(~self.shared_mask_a)[0]

    def differing_elements_b(self):
        return np.where(~self.shared_mask_b)[0]


def _canonical_vertices(mesh, idx):
    """Element vertex coordinates sorted lexicographically (orientation-free)."""
    v = mesh.element_vertices[idx]
    order = np.lexsort(v.T[::-1])
    return v[order]


def classify_pair(a, b, gamma_nominal):
    """Match geometrically identical elements of two meshes of the same domain.

    Elements are identical when their vertex coordinates agree to within
    1e-14 per coordinate.  The differing-region measure is the domain measure
    minus the measure of the shared elements.
    """
    if a.dimension != b.dimension:
        raise InvalidArgumentError("meshes have different dimensions")
    # bin elements of b by quantized centroid; probe neighbor bins for a's centroids
    scale = 1e9
    cent_b = b.element_vertices.mean(axis=1)
    bins = {}
    for j, c in enumerate(np.round(cent_b * scale).astype(np.int64)):
        bins.setdefault(tuple(c), []).append(j)

    cent_a = a.element_vertices.mean(axis=1)
    keys_a = np.round(cent_a * scale).astype(np.int64)
    if a.dimension == 1:
        neighbor_offsets = [(-1,), (0,), (1,)]
    else:
        neighbor_offsets = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]

    shared = set()
    mask_a = np.zeros(a.n_elements, dtype=bool)
    mask_b = np.zeros(b.n_elements, dtype=bool)
    for i in range(a.n_elements):
        va = _canonical_vertices(a, i)
        key = tuple(keys_a[i])
        for off in neighbor_offsets:
            for j in bins.get(tuple(k + o for k, o in zip(key, off)), ()):
                if mask_b[j]:
                    continue
                vb = _canonical_vertices(b, j)
                if np.all(np.abs(va - vb) <= COORD_TOL):
                    shared.add((i, j))
                    mask_a[i] = True
                    mask_b[j] = True
                    break
            if mask_a[i]:
                break

    shared_measure_a = float(a.element_measures[mask_a].sum())
    shared_measure_b = float(b.element_measures[mask_b].sum())
    diff_a = a.domain_measure - shared_measure_a
    diff_b = b.domain_measure - shared_measure_b
    if abs(diff_a - diff_b) > MEASURE_TOL:
        raise GeometryError(
            f"differing-region measure disagrees between meshes: {diff_a} vs {diff_b}")
    mask_a.setflags(write=False)
    mask_b.setflags(write=False)
    return MeshPair(a, b, frozenset(shared), diff_a, float(gamma_nominal),
                    mask_a, mask_b)
