"""Finite-volume states of the model and their charge decompositions.

States are convex mixtures of normalized sparse vectors, so every
expectation value is evaluated exactly on the configurations that
actually carry amplitude.  The frustration-free vector is the commuting
projector product applied to the identity configuration; the uniform
ground mixture enumerates one representative per gauge orbit of flat
configurations through the potential parametrization.  Excited states
attach a ribbon operator routed to the boundary.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    Region,
    Site,
    direct_ribbon,
    dual_ribbon,
    face_direct_loop,
    ribbon_to_boundary,
)
from .operators import Operator, QuantumDouble, Term, TermOp
from .sparse import SparseState, sparse_apply

__all__ = [
    "StateFunctional",
    "SectorWeights",
    "mix",
    "probe_family",
    "frustration_free_state",
    "single_excitation_state",
    "sector_weights",
    "conditional_sector_state",
    "one_sided_sector_expectation",
    "charge_transport",
    "detector_energy_check",
    "detector_energy_residual",
    "eventual_constancy_check",
    "indistinguishability_check",
    "spanning_matrix",
]

WEIGHT_TOL = 1e-10
MIX_SUPPORT_CAP = 1 << 22


@dataclass
class StateFunctional:
    """A convex mixture of normalized sparse vectors on one model."""

    model: QuantumDouble
    parts: tuple
    info: dict = field(default_factory=dict)

    @classmethod
    def pure(cls, model: QuantumDouble, state: SparseState, info=None) -> "StateFunctional":
        return cls(model, ((1.0, state.normalized()),), info or {})

    @classmethod
    def mixture(cls, model: QuantumDouble, pairs, info=None) -> "StateFunctional":
        pairs = tuple((float(w), s) for w, s in pairs if w > 0)
        total = sum(w for w, _ in pairs)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixture weights add to {total}, not 1")
        return cls(model, pairs, info or {})

    def expect(self, op: Operator) -> complex:
        return sum(w * s.expect(op) for w, s in self.parts)

    def expect_real(self, op: Operator, tol: float = 1e-9) -> float:
        val = self.expect(op)
        if abs(val.imag) > tol:
            raise ValueError(f"expectation {val} has a non-negligible imaginary part")
        return val.real

    def is_pure(self) -> bool:
        return len(self.parts) == 1

    @property
    def vector(self) -> SparseState:
        if not self.is_pure():
            raise ValueError("mixture has no single state vector")
        return self.parts[0][1]


def mix(functionals_and_weights) -> StateFunctional:
    """Convex combination of StateFunctionals on the same model."""
    items = list(functionals_and_weights)
    model = items[0][0].model
    parts = []
    for func, w in items:
        if func.model is not model:
            raise ValueError("cannot mix states of different models")
        parts.extend((w * pw, ps) for pw, ps in func.parts)
    return StateFunctional.mixture(model, parts, {"kind": "mixture"})


# ---------------------------------------------------------------------------
# ground states


def _seed_vector(model: QuantumDouble) -> SparseState:
    state = SparseState.basis_state(model.group, model.region.num_edges)
    for p in model.ground_projector_factors():
        state = sparse_apply(p, state)
    assert state.norm() > 0, "projector product annihilated the identity configuration"
    return state.normalized()


def _gradient_config(region: Region, group, potential: dict) -> np.ndarray:
    """Edge digits of the discrete gradient of a vertex potential."""
    mul, inv = group.mul_table(), group.inv_table()
    digits = np.zeros(region.num_edges, dtype=np.uint8)
    for e in region.edges():
        tail, head = region.edge_endpoints(e)
        digits[region.edge_id(e)] = mul[potential[head], inv[potential[tail]]]
    return digits


def _flat_orbit_representatives(model: QuantumDouble) -> list[np.ndarray]:
    """One flat configuration per gauge orbit.

    Free patch: gradients of potentials that vanish on the interior
    vertices and at the anchor (0,0).  Torus: one winding pair per flux
    sector, the potential gauge-fixed away entirely.
    """
    region, group = model.region, model.group
    q = group.size
    if region.is_torus:
        reps = []
        for a in range(q):
            for b in range(q):
                digits = np.zeros(region.num_edges, dtype=np.uint8)
                for j in range(region.n):
                    digits[region.edge_id(("h", 0, j))] = a
                for i in range(region.m):
                    digits[region.edge_id(("v", i, 0))] = b
                reps.append(digits)
        return reps
    interior = set(region.interior_vertices())
    anchor = (0, 0)
    free_verts = [v for v in region.vertices() if v not in interior and v != anchor]
    reps = []
    for assignment in itertools.product(range(q), repeat=len(free_verts)):
        potential = {v: 0 for v in region.vertices()}
        potential.update(zip(free_verts, assignment))
        reps.append(_gradient_config(region, group, potential))
    return reps


def frustration_free_state(model: QuantumDouble, choice: str = "vector-seed") -> StateFunctional:
    """Zero-energy state of the plain Hamiltonian.

    'vector-seed' is the projector product applied to the identity
    configuration; 'uniform-mixture' averages one normalized vector per
    gauge orbit of flat configurations (the fully mixed ground functional).
    """
    if choice == "vector-seed":
        return StateFunctional.pure(model, _seed_vector(model), {"kind": "vector-seed"})
    if choice != "uniform-mixture":
        raise ValueError(f"unknown ground state choice {choice!r}")
    reps = _flat_orbit_representatives(model)
    orbit = model.group.size ** len(model.region.interior_vertices())
    if len(reps) * orbit > MIX_SUPPORT_CAP:
        raise MemoryError(
            f"uniform mixture needs {len(reps)} x {orbit} configurations; "
            "use the vector seed on regions this large"
        )
    factors = model.ground_projector_factors()
    parts = []
    for digits in reps:
        s = SparseState.basis_state(model.group, model.region.num_edges, digits)
        for p in factors:
            s = sparse_apply(p, s)
        parts.append((1.0 / len(reps), s.normalized()))
    return StateFunctional.mixture(model, parts, {"kind": "uniform-mixture"})


# ---------------------------------------------------------------------------
# excitations


def single_excitation_state(
    model: QuantumDouble, site: Site, chi, c, direction=None
) -> StateFunctional:
    """Normalized F^{chi,c} Omega for the default ribbon from `site` out of
    the region; carries charge (chi, c) at the site and nothing else inside."""
    region = model.region
    if region.is_torus:
        raise ValueError("single-excitation states need a boundary to route to")
    if site.vertex not in region.interior_vertices():
        raise ValueError(f"site vertex {site.vertex} is not interior")
    ribbon = ribbon_to_boundary(region, site, direction)
    omega = _seed_vector(model)
    excited = sparse_apply(model.ribbon_char(ribbon, chi, c), omega)
    info = {
        "kind": "single-excitation",
        "site": site,
        "chi": model.group.character_from_index(chi).index if isinstance(chi, int) else chi.index,
        "c": model.group.element_from_index(c).index if isinstance(c, int) else c.index,
        "ribbon": ribbon,
    }
    return StateFunctional.pure(model, excited, info)


def charge_transport(model: QuantumDouble, ribbon, chi, c, op: Operator) -> Operator:
    """Conjugation by the ribbon unitary: A -> F* A F."""
    f = model.ribbon_char(ribbon, chi, c)
    return f.adjoint() @ (op @ f)


# ---------------------------------------------------------------------------
# sector weights and conditional states


@dataclass(frozen=True)
class SectorWeights:
    """Convex weights of the global (charge, flux) sectors of a state."""

    group_spec: str
    region_spec: str
    entries: tuple  # ((chi_index, c_index, value), ...) in packed order

    def __getitem__(self, key) -> float:
        chi, c = key
        for ci, gi, v in self.entries:
            if (ci, gi) == (chi, c):
                return v
        raise KeyError(key)

    def as_dict(self) -> dict:
        return {(ci, gi): v for ci, gi, v in self.entries}

    def to_json_dict(self, group) -> dict:
        weights = []
        for ci, gi, v in self.entries:
            weights.append(
                {
                    "chi": list(group.character_from_index(ci).digits),
                    "c": list(group.element_from_index(gi).digits),
                    "lambda": v,
                }
            )
        return {"group": self.group_spec, "region": self.region_spec, "weights": weights}

    def to_json(self, group) -> str:
        return json.dumps(self.to_json_dict(group), indent=2, sort_keys=True)


def sector_weights(state: StateFunctional) -> SectorWeights:
    """lambda_{chi,c} = omega(global sector projector); sums to one."""
    model = state.model
    q = model.group.size
    entries = []
    total = 0.0
    for chi in range(q):
        for c in range(q):
            lam = state.expect_real(model.sector_projector(chi, c))
            if lam < -1e-12:
                raise ValueError(f"negative sector weight {lam} at {(chi, c)}")
            entries.append((chi, c, lam))
            total += lam
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValueError(f"sector weights add to {total}, not 1")
    return SectorWeights(model.group.spec, model.region.spec, tuple(entries))


def conditional_sector_state(state: StateFunctional, chi, c) -> StateFunctional:
    """The state conditioned on global sector (chi, c): omega(D . D)/omega(D)."""
    model = state.model
    d = model.sector_projector(chi, c)
    parts = []
    lam = 0.0
    for w, s in state.parts:
        proj = sparse_apply(d, s)
        n2 = proj.norm() ** 2
        if n2 > 0:
            parts.append((w * n2, proj.scaled(1.0 / np.sqrt(n2))))
            lam += w * n2
    if lam <= 1e-10:
        raise ValueError(f"sector {(chi, c)} has vanishing weight {lam}")
    parts = [(w / lam, s) for w, s in parts]
    return StateFunctional.mixture(
        model, parts, {"kind": "conditional", "sector": (chi, c), "weight": lam}
    )


def one_sided_sector_expectation(state: StateFunctional, chi, c, op: Operator) -> complex:
    """omega(A D)/omega(D); agrees with the conditional state on interior
    observables since those cannot change the global charge."""
    model = state.model
    d = model.sector_projector(chi, c)
    lam = state.expect_real(d)
    if lam <= 1e-10:
        raise ValueError(f"sector {(chi, c)} has vanishing weight {lam}")
    num = sum(w * s.dot(sparse_apply(op @ d, s)) for w, s in state.parts)
    return num / lam


# ---------------------------------------------------------------------------
# ground-state identities


def detector_energy_check(model: QuantumDouble, basis: np.ndarray) -> float:
    """max_k |<psi_k, (H - D^eps - D^mu) psi_k>| over dense basis columns."""
    h = model.hamiltonian()
    de = model.detector_eps()
    dm = model.detector_mu()
    gap = h.apply(basis) - de.apply(basis) - dm.apply(basis)
    vals = np.einsum("ik,ik->k", basis.conj(), gap)
    return float(np.max(np.abs(vals)))


def detector_energy_residual(state: StateFunctional) -> float:
    """|omega(H) - omega(D^eps) - omega(D^mu)| for a sparse state."""
    model = state.model
    val = (
        state.expect(model.hamiltonian())
        - state.expect(model.detector_eps())
        - state.expect(model.detector_mu())
    )
    return abs(val)


# ---------------------------------------------------------------------------
# probe families and stability checks


def probe_family(model: QuantumDouble, site: Site, far_vertex) -> list:
    """Named local observables around an excitation site plus distant ones."""
    region, group = model.region, model.group
    q = group.size
    probes = [("star-average", model.star(site.vertex))]
    for g in range(1, q):
        probes.append((f"star-shift-{g}", model.star_shift(site.vertex, g)))
    for h in range(q):
        probes.append((f"flux-indicator-{h}", model.plaquette_indicator(site.face, h)))
    loop = face_direct_loop(region, site.face)
    for s in range(1, q):
        probes.append((f"encircling-loop-{s}", model.ribbon_char(loop, s, 0)))
    far_face = far_vertex
    probes.append(("far-star", model.star(far_vertex)))
    probes.append(("far-flux", model.plaquette_indicator(far_face, 0)))
    far_edge = ("h", far_vertex[0], far_vertex[1])
    probes.append(
        ("far-edge-character", model.ribbon_char(direct_ribbon(region, far_edge), 1 % q, 0))
    )
    probes.append(
        ("far-edge-shift", model.ribbon_char(dual_ribbon(region, far_edge), 0, 1 % q))
    )
    return probes


def eventual_constancy_check(
    group,
    region_small: Region,
    region_large: Region,
    site_coords,
    chi,
    c,
    far_vertex=None,
) -> float:
    """Max deviation of a fixed probe family between the same excitation
    built in a small free region and in a larger one containing it."""
    if region_small.is_torus or region_large.is_torus:
        raise ValueError("embedding mismatch: constancy check needs free regions")
    if region_small.m > region_large.m or region_small.n > region_large.n:
        raise ValueError("embedding mismatch: small region does not fit in large")
    (vx, vy) = site_coords
    if far_vertex is None:
        far_vertex = (region_small.m - 2, region_small.n - 2)
    worst = 0.0
    values = {}
    routes = []
    for region in (region_small, region_large):
        model = QuantumDouble(group, region)
        if (vx, vy) not in region.interior_vertices():
            raise ValueError(f"embedding mismatch: {site_coords} not interior in {region.spec}")
        if far_vertex not in region.interior_vertices():
            raise ValueError(f"embedding mismatch: {far_vertex} not interior in {region.spec}")
        site = region.site((vx, vy), (vx, vy))
        state = single_excitation_state(model, site, chi, c)
        rib = state.info["ribbon"]
        routes.append(
            [(t.kind, region.edge_tuple(t.edge), t.sign, t.s0, t.s1) for t in rib.triangles]
        )
        for name, op in probe_family(model, site, far_vertex):
            values.setdefault(name, []).append(state.expect(op))
    if routes[0] != routes[1]:
        raise ValueError("embedding mismatch: boundary ribbons differ on the overlap")
    for name, (small_val, large_val) in values.items():
        worst = max(worst, abs(small_val - large_val))
    return worst


def indistinguishability_check(model: QuantumDouble, inner_vertex=None) -> float:
    """Max deviation between the vector seed and the uniform ground mixture
    on observables supported on interior-interior edges only."""
    region, group = model.region, model.group
    q = group.size
    if inner_vertex is None:
        inner_vertex = (1, 1)
    vec = frustration_free_state(model, "vector-seed")
    mixd = frustration_free_state(model, "uniform-mixture")
    face = inner_vertex
    probes = [("star", model.star(inner_vertex)), ("plaquette", model.plaquette(face))]
    for s in range(1, q):
        probes.append((f"loop-{s}", model.ribbon_char(face_direct_loop(region, face), s, 0)))
    for e, sgn in region.face_boundary(face):
        eid = region.edge_id(e)
        for g in range(q):
            probes.append(
                (f"edge-{eid}-{g}", TermOp(model.space, [Term(1.0, (), (), ((((eid, 1),), g),))]))
            )
        for g in range(1, q):
            # off-diagonal probe: a bare single-edge shift, expectation 0
            probes.append(
                (f"shift-{eid}-{g}", TermOp(model.space, [Term(1.0, ((eid, g),))]))
            )
    worst = 0.0
    for _, op in probes:
        worst = max(worst, abs(vec.expect(op) - mixd.expect(op)))
    return worst


# ---------------------------------------------------------------------------
# spanning family


def spanning_matrix(model: QuantumDouble) -> np.ndarray:
    """Columns: products of single-edge ribbon operators applied to the
    ground seed vector, one per basis dimension; full numerical rank means
    ribbon operators generate everything from the ground space.

    Shifting along a transversal of the gauge orbits reaches every orbit
    coset, and the character ribbons on one out-edge per interior vertex
    separate the configurations inside each orbit.
    """
    from .lattice import direct_ribbon, dual_ribbon

    region, group = model.region, model.group
    if region.is_torus:
        raise ValueError("the spanning family is built for free regions")
    model.space.require_dense("spanning matrix")
    q = group.size
    interior = region.interior_vertices()
    gauge_edges = [region.edge_id(("h", v[0], v[1])) for v in interior]
    other_edges = [region.edge_id(e) for e in region.edges() if region.edge_id(e) not in gauge_edges]
    omega = _seed_vector(model)

    shift_ops = {}
    for eid in other_edges:
        e = region.edge_tuple(eid)
        for g in range(1, q):
            shift_ops[(eid, g)] = model.ribbon_char(dual_ribbon(region, e), 0, g)
    char_ops = {}
    for k, eid in enumerate(gauge_edges):
        e = region.edge_tuple(eid)
        for s in range(1, q):
            char_ops[(k, s)] = model.ribbon_char(direct_ribbon(region, e), s, 0)

    cols = np.zeros((model.space.dim, model.space.dim), dtype=np.complex128)
    j = 0
    for zs in itertools.product(range(q), repeat=len(other_edges)):
        base = omega
        for eid, g in zip(other_edges, zs):
            if g:
                base = sparse_apply(shift_ops[(eid, g)], base)
        for sigmas in itertools.product(range(q), repeat=len(gauge_edges)):
            vec = base
            for k, s in enumerate(sigmas):
                if s:
                    vec = sparse_apply(char_ops[(k, s)], vec)
            cols[:, j] = vec.to_dense(model.space)
            j += 1
    return cols
