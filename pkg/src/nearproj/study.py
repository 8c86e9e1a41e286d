"""Refinement studies: build mesh pairs per level, project, measure, rate.

Perturbation displacements are re-derived at every level as fraction * h, so
the differing-region scaling gamma is well defined across a family.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .forms import MASS, STIFFNESS, BilinearFormSpec, FunctionSpec, perturbed_form
from .mesh import (build_uniform_interval, build_uniform_square, classify_pair,
                   perturb_boundary_band, perturb_node_nearest)
from .norms import CrossMeshDiff, NormSpec, cross_mesh_norm, sobolev_norm_exact_diff
from .projection import SolverConfig, project
from .space import build_space
from .theory import RateInputs, observed_orders, predicted_sigma, predicted_sigma_prime

SQRT2 = math.sqrt(2.0)


def _sin_pi():
    pi = np.pi
    return FunctionSpec(
        value=lambda x: np.sin(pi * x[:, 0]),
        gradient=lambda x: pi * np.cos(pi * x[:, 0])[:, None],
        seminorms={(0, 2): 1 / SQRT2, (1, 2): pi / SQRT2, (2, 2): pi ** 2 / SQRT2,
                   (2, math.inf): pi ** 2, (3, math.inf): pi ** 3},
        name="sin_pi")


def _sin_pi_2d():
    pi = np.pi

    def grad(x):
        sx, cx = np.sin(pi * x[:, 0]), np.cos(pi * x[:, 0])
        sy, cy = np.sin(pi * x[:, 1]), np.cos(pi * x[:, 1])
        return pi * np.column_stack([cx * sy, sx * cy])

    return FunctionSpec(
        value=lambda x: np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1]),
        gradient=grad,
        seminorms={(0, 2): 0.5, (2, math.inf): pi ** 2},
        name="sin_pi_2d")


def power_regularity(p):
    """u(x) = x^(2-1/p) - x on [0,1]; in W^{2,q} only for q < p."""
    if p <= 2:
        raise InvalidArgumentError("regularity exponent p must exceed 2")
    a = 2.0 - 1.0 / p
    return FunctionSpec(
        value=lambda x: x[:, 0] ** a - x[:, 0],
        gradient=lambda x: (a * x[:, 0] ** (a - 1.0) - 1.0)[:, None],
        seminorms={(1, math.inf): 1.0},   # sup of |a x^(a-1) - 1| is 1, at x = 0
        name=f"power_p{p:g}")


FUNCTIONS = {
    "sin_pi": _sin_pi(),
    "sin_pi_2d": _sin_pi_2d(),
    "bump_quadratic": FunctionSpec(
        value=lambda x: x[:, 0] * (1.0 - x[:, 0]),
        gradient=lambda x: (1.0 - 2.0 * x[:, 0])[:, None],
        seminorms={(1, math.inf): 1.0, (2, 2): 2.0, (2, math.inf): 2.0},
        name="bump_quadratic"),
    "zero": FunctionSpec(value=lambda x: np.zeros(x.shape[0]),
                         gradient=lambda x: np.zeros_like(x), name="zero"),
}


def named_function(name):
    if name in FUNCTIONS:
        return FUNCTIONS[name]
    if name.startswith("power_p"):
        return power_regularity(float(name[len("power_p"):]))
    raise InvalidArgumentError(f"unknown function {name!r}")


@dataclass(frozen=True)
class PerturbationSpec:
    """Node-displacement recipe applied at every level with displacement fraction*h."""

    kind: str                     # single-node | boundary-band | shifted-second-node
    point: tuple = None
    fraction: float = 0.25

    def __post_init__(self):
        if self.kind not in ("single-node", "boundary-band", "shifted-second-node"):
            raise InvalidArgumentError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "single-node" and self.point is None:
            raise InvalidArgumentError("single-node perturbation requires a point")

    def apply(self, mesh):
        h = mesh.h
        if self.kind == "single-node":
            disp = np.zeros(mesh.dimension)
            disp[0] = self.fraction * h
            return perturb_node_nearest(mesh, self.point, disp)
        if self.kind == "boundary-band":
            return perturb_boundary_band(mesh, h / SQRT2,
                                         np.array([self.fraction * h, 0.0]))
        # shifted-second-node: node nearest x = h moves by fraction*h
        return perturb_node_nearest(mesh, (h,), (self.fraction * h,))

    def gamma(self, dimension):
        if self.kind == "boundary-band":
            return 1.0
        return float(dimension) if self.kind == "single-node" else 1.0


@dataclass(frozen=True)
class StudyConfig:
    dimension: int
    degree: int
    form: BilinearFormSpec
    perturbation: PerturbationSpec
    u: str
    levels: int
    n0: int = None
    norms: tuple = (NormSpec(0, 2),)
    rate_inputs: RateInputs = None
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.levels < 2:
            raise InvalidArgumentError("levels must be >= 2")
        n0 = self.n0 if self.n0 is not None else (8 if self.dimension == 1 else 4)
        object.__setattr__(self, "n0", n0)
        if n0 < 2:
            raise InvalidArgumentError("n0 must be >= 2")
        if self.rate_inputs is None:
            ri = RateInputs(gamma=self.perturbation.gamma(self.dimension),
                            eta=math.inf, delta=math.inf,
                            s=self.form.s, r=self.degree + 1)
            object.__setattr__(self, "rate_inputs", ri)


@dataclass(frozen=True)
class StudyRow:
    level: int
    h: float
    h_ratio: float
    norm_values: dict
    orders: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    rows: tuple
    predicted_orders: dict
    flags: tuple = ()


def predicted_order_for_norm(spec, rate_inputs):
    """Expected convergence order of the cross-mesh norm for one NormSpec."""
    s_form, r = rate_inputs.s, rate_inputs.r
    if spec.s == s_form:
        return r - s_form + predicted_sigma(rate_inputs)
    if spec.s == 0 and s_form == 1:
        return r + predicted_sigma_prime(rate_inputs)
    return None


def _forms_for_pair(form):
    """Forms used on mesh_a and mesh_b: a perturbed spec means a_h vs a_h^+."""
    if form.kind == "perturbed":
        return form.base, form
    return form, form


def build_level(cfg, level):
    """Mesh pair, spaces, and the two projections at one refinement level."""
    n = cfg.n0 * 2 ** level
    build = build_uniform_interval if cfg.dimension == 1 else build_uniform_square
    mesh_a = build(n)
    mesh_b = cfg.perturbation.apply(mesh_a)
    pair = classify_pair(mesh_a, mesh_b, cfg.perturbation.gamma(cfg.dimension))
    space_a = build_space(mesh_a, cfg.degree, dirichlet=True)
    space_b = build_space(mesh_b, cfg.degree, dirichlet=True)
    u = named_function(cfg.u)
    form_a, form_b = _forms_for_pair(cfg.form)
    f_a = project(space_a, form_a, u, cfg.solver)
    f_b = project(space_b, form_b, u, cfg.solver)
    return pair, f_a, f_b


def run_projection_study(cfg):
    """Rows of (h, cross-mesh norms, observed orders) plus theory predictions."""
    rows = []
    values = {spec: [] for spec in cfg.norms}
    hs = []
    for level in range(cfg.levels):
        pair, f_a, f_b = build_level(cfg, level)
        diff = CrossMeshDiff(f_a, f_b, pair)
        norm_values = {spec: cross_mesh_norm(diff, spec) for spec in cfg.norms}
        for spec in cfg.norms:
            values[spec].append(norm_values[spec])
        hs.append(pair.mesh_a.h)
        orders = {}
        if level > 0:
            for spec in cfg.norms:
                prev, cur = values[spec][-2], values[spec][-1]
                if prev > 0 and cur > 0:
                    orders[spec] = math.log(prev / cur) / math.log(hs[-2] / hs[-1])
        rows.append(StudyRow(level, hs[-1], float(2 ** level), norm_values, orders))
    flags = []
    for spec in cfg.norms:
        vals = values[spec]
        if any(b >= a for a, b in zip(vals, vals[1:])):
            flags.append(f"non-monotone norm values for {spec}")
    predicted = {spec: predicted_order_for_norm(spec, cfg.rate_inputs)
                 for spec in cfg.norms}
    return StudyResult(cfg, tuple(rows), predicted, tuple(flags))


REGULARITY_L2_RATE = lambda p: 2.5 - 1.0 / p
REGULARITY_H1_RATE = lambda p: 1.5 - 1.0 / p


def run_regularity_study(p, levels, n0=8):
    """Interpolant supercloseness for u of limited regularity (grid with the
    second node shifted to 3h/2); reports L2/H1 orders against the reference
    rates 5/2 - 1/p and 3/2 - 1/p."""
    if p <= 2:
        raise InvalidArgumentError("p must exceed 2")
    cfg = StudyConfig(
        dimension=1, degree=1, form=STIFFNESS,
        perturbation=PerturbationSpec("shifted-second-node", fraction=0.5),
        u=f"power_p{p:g}", levels=levels, n0=n0,
        norms=(NormSpec(0, 2), NormSpec(1, 2)))
    result = run_projection_study(cfg)
    reference = {NormSpec(0, 2): REGULARITY_L2_RATE(p),
                 NormSpec(1, 2): REGULARITY_H1_RATE(p)}
    return result, reference


def run_perturbed_form_study(delta, levels, degree=1, n0=8, gamma_pair=False):
    """Supercloseness driven by a_h^+ = stiffness + h^delta * mass.

    With gamma_pair=False the meshes are identical, isolating the form
    difference; with True the single-node gamma=1 pair is used as well.
    """
    if delta < 0:
        raise InvalidArgumentError("delta must be >= 0")
    form = perturbed_form(STIFFNESS, delta, MASS, mu=0, nu=0, q=2.0)
    pert = (PerturbationSpec("single-node", point=(0.25,), fraction=0.25)
            if gamma_pair else
            PerturbationSpec("single-node", point=(0.25,), fraction=0.0))
    # identical meshes admit an arbitrarily large gamma; 1e9 keeps the gamma
    # term out of the minimum without introducing float infinities
    gamma = 1.0 if gamma_pair else 1e9
    ri = RateInputs(gamma=gamma, eta=math.inf, delta=delta, mu=0, nu=0, s=1,
                    r=degree + 1)
    cfg = StudyConfig(
        dimension=1, degree=degree, form=form, perturbation=pert, u="sin_pi",
        levels=levels, n0=n0, norms=(NormSpec(1, 2), NormSpec(0, 2)),
        rate_inputs=ri)
    return run_projection_study(cfg)


def naive_bound_check(cfg, level):
    """Triangle-inequality sanity: cross norm <= ||f_a - u|| + ||u - f_b||."""
    pair, f_a, f_b = build_level(cfg, level)
    u = named_function(cfg.u)
    out = {}
    for spec in cfg.norms:
        cross = cross_mesh_norm(CrossMeshDiff(f_a, f_b, pair), spec)
        bound = (sobolev_norm_exact_diff(f_a, u, spec)
                 + sobolev_norm_exact_diff(f_b, u, spec))
        out[spec] = (cross, bound)
    return out
