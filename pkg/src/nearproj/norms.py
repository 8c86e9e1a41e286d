"""Sobolev norms of exact functions, FE functions, and cross-mesh differences.

Finite-integrability norms combine derivative components as
(sum_k sum_{|alpha|<=s} integral |d^alpha v|^eta)^(1/eta).  The eta=inf norm
is a sampled supremum over fixed per-element grids (25 points per interval,
45 per triangle) and is used only in diagnostics.

Differences of FE functions on a mesh pair are integrated exactly: shared
elements carry a single polynomial difference; over the differing region,
element pairs are intersected by convex polygon clipping and the difference
is integrated on each fragment.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, InvalidArgumentError
from .forms import FunctionSpec
from .quadrature import quadrature_rule
from .space import eval_at_physical, eval_on_elements

CLIP_VERTEX_TOL = 1e-12
CONSERVATION_TOL = 1e-10

_GRID_1D = np.linspace(0.0, 1.0, 25)[:, None]
_GRID_2D = np.array([[i / 8.0, j / 8.0]
                     for i in range(9) for j in range(9 - i)])


@dataclass(frozen=True)
class NormSpec:
    s: int = 0
    eta: float = 2.0
    region: frozenset = None     # optional element subset of the first mesh

    def __post_init__(self):
        if self.s not in (0, 1):
            raise InvalidArgumentError("norm order s must be 0 or 1")
        if not self.eta >= 2:
            raise InvalidArgumentError("integrability eta must be >= 2")


@dataclass(frozen=True)
class CrossMeshDiff:
    f_a: "FeFunction"
    f_b: "FeFunction"
    pair: "MeshPair"

    def __post_init__(self):
        if self.f_a.space.degree != self.f_b.space.degree:
            raise InvalidArgumentError("cross-mesh difference requires equal degrees")
        if self.f_a.space.mesh is not self.pair.mesh_a or \
                self.f_b.space.mesh is not self.pair.mesh_b:
            raise InvalidArgumentError("functions do not match the meshes of the pair")


def _physical_points(mesh, elem_idx, ref_pts):
    v0 = mesh.element_vertices[elem_idx, 0, :]
    JT = np.swapaxes(mesh.jacobians[elem_idx], 1, 2)
    return v0[:, None, :] + np.einsum("qd,kde->kqe", ref_pts, JT)


def sobolev_norm_exact_diff(f, u, spec):
    """W^{s,eta} norm of (f - u) for an FeFunction f and exact u."""
    space = f.space
    mesh = space.mesh
    if spec.s == 1 and u.gradient is None:
        raise InvalidArgumentError("s=1 norm requires a gradient for u")
    elems = (np.arange(mesh.n_elements) if spec.region is None
             else np.array(sorted(spec.region), dtype=np.int64))

    if math.isinf(spec.eta):
        grid = _GRID_1D if mesh.dimension == 1 else _GRID_2D
        vals, grads = eval_on_elements(space, f.coeffs, elems, grid,
                                       gradients=spec.s == 1)
        pts = _physical_points(mesh, elems, grid).reshape(-1, mesh.dimension)
        uvals = np.asarray(u.value(pts)).reshape(vals.shape)
        sup = np.abs(vals - uvals).max()
        if spec.s == 1:
            ugrads = np.asarray(u.gradient(pts)).reshape(grads.shape)
            sup = max(sup, np.abs(grads - ugrads).max())
        return float(sup)

    rule = quadrature_rule(mesh.dimension, 2 * space.degree + 6)
    vals, grads = eval_on_elements(space, f.coeffs, elems, rule.points,
                                   gradients=spec.s == 1)
    pts = _physical_points(mesh, elems, rule.points)
    flat = pts.reshape(-1, mesh.dimension)
    uvals = np.asarray(u.value(flat)).reshape(vals.shape)
    det = mesh.jacobian_dets[elems]
    total = np.einsum("kq,q,k->", np.abs(vals - uvals) ** spec.eta, rule.weights, det)
    if spec.s == 1:
        ugrads = np.asarray(u.gradient(flat)).reshape(grads.shape)
        diff = np.abs(grads - ugrads) ** spec.eta
        total += np.einsum("kqd,q,k->", diff, rule.weights, det)
    return float(total ** (1.0 / spec.eta))


def fe_norm(f, spec):
    """Norm of an FE function itself (difference against zero)."""
    zero = _ZERO_1D if f.space.mesh.dimension == 1 else _ZERO_2D
    return sobolev_norm_exact_diff(f, zero, spec)


def fe_component_norms(f, k, eta):
    """Per-derivative-component L^eta norms (|f|, |df/dx1|, ...), orders <= k.

    Used to check support/Holder inequalities in the norm convention that sums
    component norms.
    """
    space = f.space
    mesh = space.mesh
    elems = np.arange(mesh.n_elements)
    if math.isinf(eta):
        grid = _GRID_1D if mesh.dimension == 1 else _GRID_2D
        vals, grads = eval_on_elements(space, f.coeffs, elems, grid, gradients=k == 1)
        out = [float(np.abs(vals).max())]
        if k == 1:
            out += [float(np.abs(grads[:, :, d]).max()) for d in range(mesh.dimension)]
        return out
    rule = quadrature_rule(mesh.dimension, 2 * space.degree + 6)
    vals, grads = eval_on_elements(space, f.coeffs, elems, rule.points, gradients=k == 1)
    det = mesh.jacobian_dets
    out = [float(np.einsum("kq,q,k->", np.abs(vals) ** eta, rule.weights, det)
                 ** (1.0 / eta))]
    if k == 1:
        for d in range(mesh.dimension):
            out.append(float(np.einsum("kq,q,k->", np.abs(grads[:, :, d]) ** eta,
                                       rule.weights, det) ** (1.0 / eta)))
    return out


# -- convex clipping ---------------------------------------------------------

def _clip_convex(subject, clipper):
    """Sutherland-Hodgman: clip ccw convex polygon `subject` by ccw `clipper`."""
    out = subject
    m = len(clipper)
    for k in range(m):
        ax, ay = clipper[k]
        bx, by = clipper[(k + 1) % m]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        if not inp:
            return []
        sx, sy = inp[-1]
        s_in = ex * (sy - ay) - ey * (sx - ax) >= -CLIP_VERTEX_TOL
        for px, py in inp:
            p_in = ex * (py - ay) - ey * (px - ax) >= -CLIP_VERTEX_TOL
            if p_in != s_in:
                dx, dy = px - sx, py - sy
                t = (ex * (ay - sy) - ey * (ax - sx)) / (ex * dy - ey * dx)
                out.append((sx + t * dx, sy + t * dy))
            if p_in:
                out.append((px, py))
            sx, sy, s_in = px, py, p_in
    return out


def _dedupe_polygon(poly):
    out = []
    for p in poly:
        if not out or (abs(p[0] - out[-1][0]) > CLIP_VERTEX_TOL
                       or abs(p[1] - out[-1][1]) > CLIP_VERTEX_TOL):
            out.append(p)
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) <= CLIP_VERTEX_TOL \
            and abs(out[0][1] - out[-1][1]) <= CLIP_VERTEX_TOL:
        out.pop()
    return out


def _polygon_area(poly):
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _fan_triangles(poly):
    for k in range(1, len(poly) - 1):
        yield np.array([poly[0], poly[k], poly[k + 1]])


def _overlap_pairs_2d(mesh_a, ia, mesh_b, ib):
    """Candidate element pairs with overlapping bounding boxes."""
    va = mesh_a.element_vertices[ia]
    vb = mesh_b.element_vertices[ib]
    lo_a, hi_a = va.min(axis=1), va.max(axis=1)
    lo_b, hi_b = vb.min(axis=1), vb.max(axis=1)
    tol = 1e-13
    ok = ((lo_a[:, None, 0] <= hi_b[None, :, 0] + tol)
          & (lo_b[None, :, 0] <= hi_a[:, None, 0] + tol)
          & (lo_a[:, None, 1] <= hi_b[None, :, 1] + tol)
          & (lo_b[None, :, 1] <= hi_a[:, None, 1] + tol))
    return np.argwhere(ok)


def cross_mesh_norm(diff, spec):
    """Exact W^{s,2} norm of f_a - f_b across the meshes of a pair."""
    if spec.eta != 2:
        raise InvalidArgumentError("cross-mesh norms are measured with eta = 2")
    f_a, f_b, pair = diff.f_a, diff.f_b, diff.pair
    sa, sb = f_a.space, f_b.space
    mesh_a, mesh_b = pair.mesh_a, pair.mesh_b
    degree = sa.degree
    need_grad = spec.s == 1
    rule = quadrature_rule(mesh_a.dimension, 2 * degree)

    total = 0.0
    shared = sorted(pair.shared_elements)
    if shared:
        ia = np.array([p[0] for p in shared], dtype=np.int64)
        ib = np.array([p[1] for p in shared], dtype=np.int64)
        if spec.region is not None:
            keep = np.isin(ia, np.fromiter(spec.region, dtype=np.int64))
            ia, ib = ia[keep], ib[keep]
        pts = _physical_points(mesh_a, ia, rule.points)
        va, ga = eval_on_elements(sa, f_a.coeffs, ia, rule.points, gradients=need_grad)
        vb, gb = eval_at_physical(sb, f_b.coeffs, ib, pts, gradients=need_grad)
        det = mesh_a.jacobian_dets[ia]
        total += np.einsum("kq,q,k->", (va - vb) ** 2, rule.weights, det)
        if need_grad:
            total += np.einsum("kqd,q,k->", (ga - gb) ** 2, rule.weights, det)

    dia = pair.differing_elements_a()
    dib = pair.differing_elements_b()
    if spec.region is not None:
        dia = dia[np.isin(dia, np.fromiter(spec.region, dtype=np.int64))]
    frag_measure = 0.0
    if dia.size and dib.size:
        if mesh_a.dimension == 1:
            frag_total, frag_measure = _integrate_fragments_1d(
                f_a, f_b, dia, dib, rule, need_grad)
        else:
            frag_total, frag_measure = _integrate_fragments_2d(
                f_a, f_b, dia, dib, rule, need_grad)
        total += frag_total
    if spec.region is None and \
            abs(frag_measure - pair.differing_region_measure) > CONSERVATION_TOL:
        raise GeometryError(
            f"clipped fragments cover {frag_measure:.17g} of a differing region "
            f"of measure {pair.differing_region_measure:.17g}")
    return float(np.sqrt(total))


def _integrate_fragments_1d(f_a, f_b, dia, dib, rule, need_grad):
    mesh_a, mesh_b = f_a.space.mesh, f_b.space.mesh
    xa = np.sort(mesh_a.element_vertices[dia, :, 0], axis=1)
    xb = np.sort(mesh_b.element_vertices[dib, :, 0], axis=1)
    total = 0.0
    covered = 0.0
    t = rule.points[:, 0]
    for i, (a0, a1) in zip(dia, xa):
        for j, (b0, b1) in zip(dib, xb):
            lo, hi = max(a0, b0), min(a1, b1)
            if hi - lo <= CLIP_VERTEX_TOL:
                continue
            covered += hi - lo
            pts = (lo + (hi - lo) * t)[None, :, None]
            va, ga = eval_at_physical(f_a.space, f_a.coeffs, np.array([i]), pts,
                                      gradients=need_grad)
            vb, gb = eval_at_physical(f_b.space, f_b.coeffs, np.array([j]), pts,
                                      gradients=need_grad)
            total += (hi - lo) * np.sum(rule.weights * (va[0] - vb[0]) ** 2)
            if need_grad:
                total += (hi - lo) * np.sum(rule.weights
                                            * (ga[0, :, 0] - gb[0, :, 0]) ** 2)
    return total, covered


def _integrate_fragments_2d(f_a, f_b, dia, dib, rule, need_grad):
    mesh_a, mesh_b = f_a.space.mesh, f_b.space.mesh
    total = 0.0
    covered = 0.0
    pairs = _overlap_pairs_2d(mesh_a, dia, mesh_b, dib)
    for ka, kb in pairs:
        i, j = int(dia[ka]), int(dib[kb])
        tri_a = [tuple(p) for p in mesh_a.element_vertices[i]]
        tri_b = [tuple(p) for p in mesh_b.element_vertices[j]]
        poly = _dedupe_polygon(_clip_convex(tri_a, tri_b))
        if len(poly) < 3:
            continue
        area = _polygon_area(poly)
        if area <= CLIP_VERTEX_TOL:
            continue
        covered += area
        for tri in _fan_triangles(poly):
            J = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
            det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            if abs(det) < CLIP_VERTEX_TOL ** 2:
                continue
            pts = (tri[0][None, :] + rule.points @ J.T)[None, :, :]
            va, ga = eval_at_physical(f_a.space, f_a.coeffs, np.array([i]), pts,
                                      gradients=need_grad)
            vb, gb = eval_at_physical(f_b.space, f_b.coeffs, np.array([j]), pts,
                                      gradients=need_grad)
            total += abs(det) * np.sum(rule.weights * (va[0] - vb[0]) ** 2)
            if need_grad:
                total += abs(det) * np.sum(rule.weights
                                           * np.sum((ga[0] - gb[0]) ** 2, axis=1))
    return total, covered


def seminorm_exact(u, k, eta, approximate_ok=False):
    """Seminorm |u|_{k,eta}: the analytic value when known, else a sampled
    approximation (only with approximate_ok=True; sampling covers the unit
    interval, so the fallback applies to 1-D functions)."""
    for key, val in u.seminorms.items():
        if key[0] == k and (key[1] == eta or (math.isinf(key[1]) and math.isinf(eta))):
            return float(val)
    if not approximate_ok:
        raise InvalidArgumentError(
            f"no analytic seminorm ({k}, {eta}) for {u.name or 'function'}")
    if k == 0:
        f = u.value
    elif k == 1 and u.gradient is not None:
        f = lambda x: np.linalg.norm(np.asarray(u.gradient(x)), axis=-1)
    else:
        raise InvalidArgumentError(f"derivative order {k} unavailable")
    xs = np.linspace(0.0, 1.0, 200001)[:, None]
    vals = np.abs(np.asarray(f(xs)))
    if math.isinf(eta):
        return float(vals.max())
    return float((np.trapezoid(vals.ravel() ** eta, xs.ravel())) ** (1.0 / eta))


def support_measure(f, threshold=1e-13):
    """Total measure of elements where f is not identically below threshold."""
    if threshold < 0:
        raise InvalidArgumentError("threshold must be nonnegative")
    space = f.space
    mesh = space.mesh
    rule = quadrature_rule(mesh.dimension, 2 * space.degree)
    elems = np.arange(mesh.n_elements)
    vals, _ = eval_on_elements(space, f.coeffs, elems, rule.points)
    active = np.abs(vals).max(axis=1) > threshold
    active |= np.abs(f.coeffs[space.element_dofs]).max(axis=1) > threshold
    return float(mesh.element_measures[active].sum())


_ZERO_1D = FunctionSpec(value=lambda x: np.zeros(x.shape[0]),
                        gradient=lambda x: np.zeros((x.shape[0], 1)), name="zero")
_ZERO_2D = FunctionSpec(value=lambda x: np.zeros(x.shape[0]),
                        gradient=lambda x: np.zeros((x.shape[0], 2)), name="zero")
