"""Lagrange finite element spaces of degree 1 and 2 with Dirichlet masks.

Local degree-of-freedom order per element:
    1-D P1: [v0, v1]                     2-D P1: [v0, v1, v2]
    1-D P2: [v0, v1, midpoint]           2-D P2: [v0, v1, v2, e01, e12, e20]

Shape functions are expressed in barycentric coordinates; all element maps
are affine, so physical gradients are reference gradients times J^{-1}.
"""

import numpy as np

from .errors import InvalidArgumentError, OutOfDomainError
from .mesh import COORD_TOL

BARY_TOL = 1e-12


def _bary(dim, pts):
    """Barycentric coordinates of reference points, shape (nq, dim+1)."""
    pts = np.asarray(pts, dtype=float)
    if dim == 1:
        t = pts[:, 0]
        return np.column_stack([1.0 - t, t])
    x, y = pts[:, 0], pts[:, 1]
    return np.column_stack([1.0 - x - y, x, y])


def _bary_grads(dim):
    """Reference-coordinate gradients of the barycentric coordinates, (dim+1, dim)."""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    return np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


_EDGES = {1: [(0, 1)], 2: [(0, 1), (1, 2), (2, 0)]}


def shape_values(dim, degree, pts):
    """Values of the local shape functions at reference points, (nq, n_loc)."""
    lam = _bary(dim, pts)
    if degree == 1:
        return lam
    vals = [lam[:, i] * (2.0 * lam[:, i] - 1.0) for i in range(dim + 1)]
    vals += [4.0 * lam[:, i] * lam[:, j] for i, j in _EDGES[dim]]
    return np.column_stack(vals)


def shape_grads(dim, degree, pts):
    """Reference gradients of the local shape functions, (nq, n_loc, dim)."""
    lam = _bary(dim, pts)
    g = _bary_grads(dim)
    nq = lam.shape[0]
    if degree == 1:
        return np.broadcast_to(g, (nq, dim + 1, dim)).copy()
    out = []
    for i in range(dim + 1):
        out.append((4.0 * lam[:, i] - 1.0)[:, None] * g[i])
    for i, j in _EDGES[dim]:
        out.append(4.0 * (lam[:, i][:, None] * g[j] + lam[:, j][:, None] * g[i]))
    return np.stack(out, axis=1)


def n_local_dofs(dim, degree):
    return dim + 1 + (len(_EDGES[dim]) if degree == 2 else 0)


class FeSpace:
    """Lagrange space of degree r-1 in {1,2} over a mesh, with Dirichlet mask."""

    def __init__(self, mesh, degree, dirichlet):
        if degree not in (1, 2):
            raise InvalidArgumentError(f"degree must be 1 or 2, got {degree}")
        self.mesh = mesh
        self.degree = degree
        self.dirichlet = bool(dirichlet)

        nn = mesh.n_nodes
        if degree == 1:
            self.element_dofs = mesh.elements.copy()
            self.dof_coords = mesh.nodes.copy()
            boundary_dofs = set(mesh.boundary_nodes)
        else:
            edge_ids = {}
            coords = [mesh.nodes]
            conn = np.zeros((mesh.n_elements, n_local_dofs(mesh.dimension, 2)),
                            dtype=np.int64)
            conn[:, :mesh.dimension + 1] = mesh.elements
            boundary_edge_dofs = set()
            for e, el in enumerate(mesh.elements):
                for k, (i, j) in enumerate(_EDGES[mesh.dimension]):
                    key = (min(el[i], el[j]), max(el[i], el[j]))
                    if key not in edge_ids:
                        edge_ids[key] = nn + len(edge_ids)
                        coords.append(0.5 * (mesh.nodes[key[0]] + mesh.nodes[key[1]])[None, :])
                        if key[0] in mesh.boundary_nodes and key[1] in mesh.boundary_nodes:
                            # midpoint is constrained only if the edge itself lies on
                            # the boundary; for unit-box meshes both endpoints on the
                            # same face implies that, which a midpoint check confirms
                            mid = 0.5 * (mesh.nodes[key[0]] + mesh.nodes[key[1]])
                            if np.min(np.concatenate([mid, 1.0 - mid])) <= 1e-12:
                                boundary_edge_dofs.add(edge_ids[key])
                    conn[e, mesh.dimension + 1 + k] = edge_ids[key]
            self.element_dofs = conn
            self.dof_coords = np.concatenate(coords, axis=0)
            boundary_dofs = set(mesh.boundary_nodes) | boundary_edge_dofs

        self.n_dofs = self.dof_coords.shape[0]
        mask = np.zeros(self.n_dofs, dtype=bool)
        if self.dirichlet:
            mask[sorted(boundary_dofs)] = True
        self.dirichlet_mask = mask
        self.free_dofs = np.where(~mask)[0]
        self.n_free = int(self.free_dofs.size)
        self.free_index = np.full(self.n_dofs, -1, dtype=np.int64)
        self.free_index[self.free_dofs] = np.arange(self.n_free)

        # dof -> incident elements (list of arrays), used by the intersection projector
        order = np.argsort(self.element_dofs.ravel(), kind="stable")
        flat = self.element_dofs.ravel()[order]
        elems = np.repeat(np.arange(mesh.n_elements), self.element_dofs.shape[1])[order]
        starts = np.searchsorted(flat, np.arange(self.n_dofs))
        ends = np.searchsorted(flat, np.arange(self.n_dofs), side="right")
        self.dof_elements = [elems[s:e] for s, e in zip(starts, ends)]
        for arr in (self.element_dofs, self.dof_coords, self.dirichlet_mask,
                    self.free_dofs, self.free_index):
            arr.setflags(write=False)

    @property
    def n_local(self):
        return n_local_dofs(self.mesh.dimension, self.degree)


def build_space(mesh, degree, dirichlet):
    return FeSpace(mesh, degree, dirichlet)


class FeFunction:
    """A coefficient vector over the DOFs of an FeSpace (zero at constrained DOFs)."""

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=float).copy()
        if coeffs.shape != (space.n_dofs,):
            raise InvalidArgumentError(
                f"coefficient vector must have length {space.n_dofs}")
        coeffs[space.dirichlet_mask] = 0.0
        coeffs.setflags(write=False)
        self.space = space
        self.coeffs = coeffs

    def to_text(self):
        lines = [str(self.space.n_dofs)]
        lines += [f"{c:.17g}" for c in self.coeffs]
        return "\n".join(lines) + "\n"


def interpolate_nodal(space, u):
    """Nodal interpolant: coefficients are u at the DOF coordinates (free DOFs)."""
    vals = u.value(space.dof_coords)
    coeffs = np.where(space.dirichlet_mask, 0.0, vals)
    return FeFunction(space, coeffs)


def locate_element(mesh, x, tol=BARY_TOL):
    """Index of the element containing x (lowest index on ties), or raise."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rel = x[None, :] - mesh.element_vertices[:, 0, :]
    ref = np.einsum("mdk,mk->md", mesh.inverse_jacobians, rel)
    lam_last = 1.0 - ref.sum(axis=1)
    inside = np.all(ref >= -tol, axis=1) & (lam_last >= -tol)
    idx = np.where(inside)[0]
    if idx.size == 0:
        raise OutOfDomainError(f"point {x} is outside the mesh domain")
    return int(idx[0]), ref[idx[0]]


def evaluate(f, x):
    """Value and gradient of an FeFunction at a single point."""
    space = f.space
    e, ref = locate_element(space.mesh, x)
    V = shape_values(space.mesh.dimension, space.degree, ref[None, :])
    G = shape_grads(space.mesh.dimension, space.degree, ref[None, :])
    dofs = space.element_dofs[e]
    value = float(V[0] @ f.coeffs[dofs])
    grad = f.coeffs[dofs] @ (G[0] @ space.mesh.inverse_jacobians[e])
    return value, grad


def eval_on_elements(space, coeffs, elem_idx, ref_pts, gradients=False):
    """Evaluate at the same reference points on a batch of elements.

    Returns values (K, nq) and, if requested, physical gradients (K, nq, d).
    """
    V = shape_values(space.mesh.dimension, space.degree, ref_pts)
    c = coeffs[space.element_dofs[elem_idx]]              # (K, n_loc)
    vals = c @ V.T                                        # (K, nq)
    if not gradients:
        return vals, None
    G = shape_grads(space.mesh.dimension, space.degree, ref_pts)   # (nq, n_loc, d)
    Jinv = space.mesh.inverse_jacobians[elem_idx]                  # (K, d, d)
    phys = np.einsum("qld,kde->kqle", G, Jinv)
    grads = np.einsum("kl,kqle->kqe", c, phys)
    return vals, grads


def eval_at_physical(space, coeffs, elem_idx, phys_pts, gradients=False):
    """Evaluate on known elements at per-element physical points (K, nq, d)."""
    v0 = space.mesh.element_vertices[elem_idx, 0, :]               # (K, d)
    Jinv = space.mesh.inverse_jacobians[elem_idx]                  # (K, d, d)
    ref = np.einsum("kde,kqe->kqd", Jinv, phys_pts - v0[:, None, :])
    K, nq, d = ref.shape
    V = shape_values(space.mesh.dimension, space.degree, ref.reshape(-1, d))
    V = V.reshape(K, nq, -1)
    c = coeffs[space.element_dofs[elem_idx]]
    vals = np.einsum("kl,kql->kq", c, V)
    if not gradients:
        return vals, None
    G = shape_grads(space.mesh.dimension, space.degree, ref.reshape(-1, d))
    G = G.reshape(K, nq, -1, d)
    phys = np.einsum("kqld,kde->kqle", G, Jinv)
    grads = np.einsum("kl,kqle->kqe", c, phys)
    return vals, grads


def _match_dof_coords(space_from, space_to):
    """Map DOF index in space_from -> DOF index in space_to at the identical
    coordinate (within 1e-14 per coordinate), or -1."""
    scale = 1e9
    bins = {}
    for j, c in enumerate(np.round(space_to.dof_coords * scale).astype(np.int64)):
        bins.setdefault(tuple(c), []).append(j)
    dim = space_from.mesh.dimension
    offsets = ([(-1,), (0,), (1,)] if dim == 1
               else [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)])
    out = np.full(space_from.n_dofs, -1, dtype=np.int64)
    keys = np.round(space_from.dof_coords * scale).astype(np.int64)
    for i in range(space_from.n_dofs):
        key = tuple(keys[i])
        for off in offsets:
            for j in bins.get(tuple(k + o for k, o in zip(key, off)), ()):
                if np.all(np.abs(space_from.dof_coords[i] - space_to.dof_coords[j])
                          <= COORD_TOL):
                    out[i] = j
                    break
            if out[i] >= 0:
                break
    return out


def shared_dof_mask(pair, space, other):
    """DOFs of `space` whose shape function is common to both spaces.

    A DOF is shared iff a DOF at the identical coordinate exists in the other
    space and every element in its support (on both sides) is a shared element.
    """
    on_a = space.mesh is pair.mesh_a
    mask_own = pair.shared_mask_a if on_a else pair.shared_mask_b
    mask_other = pair.shared_mask_b if on_a else pair.shared_mask_a
    match = _match_dof_coords(space, other)
    out = np.zeros(space.n_dofs, dtype=bool)
    for i in range(space.n_dofs):
        j = match[i]
        if j < 0:
            continue
        if mask_own[space.dof_elements[i]].all() and mask_other[other.dof_elements[j]].all():
            out[i] = True
    return out


def intersection_project(pair, f, other_space=None):
    """Keep exactly the coefficients of shape functions shared by both spaces.

    `f` must live on a space over pair.mesh_a or pair.mesh_b; the result is
    representable in both spaces and is returned on f's own space.
    """
    space = f.space
    if space.mesh is pair.mesh_a:
        other_mesh = pair.mesh_b
    elif space.mesh is pair.mesh_b:
        other_mesh = pair.mesh_a
    else:
        raise InvalidArgumentError("function does not live on either mesh of the pair")
    if other_space is None:
        other_space = FeSpace(other_mesh, space.degree, space.dirichlet)
    elif other_space.degree != space.degree:
        raise InvalidArgumentError("spaces of a pair must share the polynomial degree")
    keep = shared_dof_mask(pair, space, other_space)
    return FeFunction(space, np.where(keep, f.coeffs, 0.0))
