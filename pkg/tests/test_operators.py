import numpy as np
import pytest

from qdouble.groups import make_group
from qdouble.lattice import (
    Region,
    concat_ribbons,
    crossing_pair,
    direct_ribbon,
    dual_ribbon,
    face_direct_loop,
    ribbon_between,
    ribbon_to_boundary,
    vertex_dual_loop,
)
from qdouble.operators import DimensionCapError, QuantumDouble, TermOp

import reference as ref


def probe_residual(op_a, op_b, rng, k=4, sparse=None):
    """Max relative residual of (A - B) on random probes."""
    space = op_a.space
    if sparse is None:
        psi = space.random_vectors(rng, k)
    else:
        psi = np.zeros((space.dim, k), dtype=complex)
        idx = rng.choice(space.dim, size=(sparse, k))
        psi[idx, np.arange(k)] = rng.standard_normal((sparse, k)) + 1j * rng.standard_normal(
            (sparse, k)
        )
        psi /= np.linalg.norm(psi, axis=0, keepdims=True)
    a, b = op_a.apply(psi), op_b.apply(psi)
    num = np.linalg.norm(a - b, axis=0)
    den = np.maximum(np.maximum(np.linalg.norm(a, axis=0), np.linalg.norm(b, axis=0)), 1.0)
    return float(np.max(num / den))


def oracle_residual(op, colfn, rng, k=2, sparse=64):
    """Compare the engine against a column-function oracle on sparse probes."""
    space = op.space
    out = 0.0
    for _ in range(k):
        psi = np.zeros(space.dim, dtype=complex)
        idx = rng.choice(space.dim, size=min(sparse, space.dim), replace=False)
        psi[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
        psi /= np.linalg.norm(psi)
        a = op.apply(psi)
        b = ref.apply_column_op(colfn, space.dim, psi)
        out = max(out, np.linalg.norm(a - b) / max(np.linalg.norm(a), 1.0))
    return out


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(7)


def test_star_shift_matches_reference(rng):
    for orders, region in [
        ((3,), Region.free(2, 2)),
        ((2,), Region.torus(2, 2)),
        ((2, 2), Region.free(2, 2)),
    ]:
        group = make_group(orders)
        model = QuantumDouble(group, region)
        for v in [(0, 0), (1, 1)]:
            for g in group.elements():
                col = ref.star_column(orders, region, v, g.digits)
                assert oracle_residual(model.star_shift(v, g), col, rng) < 1e-13


def test_star_average_matches_reference_and_projects(rng):
    orders, region = (3,), Region.free(2, 2)
    group = make_group(orders)
    model = QuantumDouble(group, region)
    a = model.star((0, 0))
    col = ref.star_average_column(orders, region, (0, 0))
    assert oracle_residual(a, col, rng) < 1e-13
    assert probe_residual(a.compose(a), a, rng) < 1e-13
    assert probe_residual(a.adjoint(), a, rng) < 1e-13


def test_star_shifts_compose_as_the_group(rng):
    group = make_group([2, 2])
    model = QuantumDouble(group, Region.torus(2, 2))
    v = (1, 0)
    for g in group.elements():
        for h in group.elements():
            lhs = model.star_shift(v, g).compose(model.star_shift(v, h))
            rhs = model.star_shift(v, g * h)
            assert probe_residual(lhs, rhs, rng, k=1) < 1e-13


def test_star_shift_adjoint_is_inverse(rng):
    group = make_group([4])
    model = QuantumDouble(group, Region.free(3, 3))
    v = (1, 1)
    g = group.element((3,))
    assert probe_residual(model.star_shift(v, g).adjoint(), model.star_shift(v, g.inverse()), rng) < 1e-13


def test_plaquette_matches_reference(rng):
    orders, region = (3,), Region.free(2, 2)
    group = make_group(orders)
    model = QuantumDouble(group, region)
    for h in group.elements():
        col = ref.plaquette_column(orders, region, (0, 0), h.digits)
        assert oracle_residual(model.plaquette_indicator((0, 0), h), col, rng) < 1e-13


def test_plaquette_family_is_orthogonal_resolution(rng):
    group = make_group([2, 2])
    model = QuantumDouble(group, Region.torus(2, 2))
    f = (1, 1)
    total = None
    for h in group.elements():
        b = model.plaquette_indicator(f, h)
        total = b if total is None else total + b
        for h2 in group.elements():
            prod = b.compose(model.plaquette_indicator(f, h2))
            target = b if h == h2 else TermOp(model.space, [])
            assert probe_residual(prod, target, rng, k=1) < 1e-13
    assert probe_residual(total, model.identity(), rng) < 1e-13


def test_stars_commute_with_plaquettes_everywhere(rng):
    group = make_group([3])
    region = Region.torus(2, 2)
    model = QuantumDouble(group, region)
    g = group.element((1,))
    for v in region.vertices():
        for f in region.faces():
            for h in group.elements():
                a, b = model.star_shift(v, g), model.plaquette_indicator(f, h)
                assert probe_residual(a.compose(b), b.compose(a), rng, k=1) < 1e-13


def test_stars_at_different_vertices_commute(rng):
    group = make_group([4])
    model = QuantumDouble(group, Region.free(3, 3))
    a = model.star_shift((1, 1), group.element((1,)))
    b = model.star_shift((2, 1), group.element((3,)))
    assert probe_residual(a.compose(b), b.compose(a), rng, k=1) < 1e-13


def test_ribbon_char_matches_reference_small(rng):
    orders = (3,)
    group = make_group(orders)
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    ribbons = [
        direct_ribbon(region, ("h", 1, 1)),
        dual_ribbon(region, ("v", 1, 1)),
        ribbon_to_boundary(region, region.site((1, 1), (1, 1))),
        ribbon_between(region, region.site((0, 1), (0, 1)), region.site((2, 1), (1, 1))),
    ]
    for rib in ribbons:
        for chi in group.characters():
            for c in group.elements():
                op = model.ribbon_char(rib, chi, c)
                col = ref.ribbon_char_column(orders, region, rib, chi.digits, c.digits)
                assert oracle_residual(op, col, rng, k=1) < 1e-13


def test_ribbon_char_matches_reference_z2xz2(rng):
    orders = (2, 2)
    group = make_group(orders)
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    rib = ribbon_to_boundary(region, region.site((1, 1), (0, 0)))
    chi = group.character((1, 0))
    c = group.element((1, 1))
    op = model.ribbon_char(rib, chi, c)
    col = ref.ribbon_char_column(orders, region, rib, chi.digits, c.digits)
    assert oracle_residual(op, col, rng, k=1) < 1e-13


def test_ribbon_element_transform(rng):
    # indicator flavor = |G|^-1 sum_chi chi(g) F^{chi,c}
    group = make_group([3])
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    rib = ribbon_to_boundary(region, region.site((1, 1), (1, 1)))
    c = group.element((2,))
    for g in group.elements():
        terms = []
        for chi in group.characters():
            w = chi(g).to_complex() / group.size
            terms.extend(model.ribbon_char(rib, chi, c).scaled(w).terms)
        assert probe_residual(
            TermOp(model.space, terms).simplify(), model.ribbon_element(rib, g, c), rng, k=1
        ) < 1e-13


def test_ribbon_fusion_on_same_path(rng):
    group = make_group([2, 2])
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    rib = ribbon_to_boundary(region, region.site((1, 1), (1, 1)))
    chi1, chi2 = group.character((1, 0)), group.character((0, 1))
    c1, c2 = group.element((0, 1)), group.element((1, 1))
    lhs = model.ribbon_char(rib, chi1, c1).compose(model.ribbon_char(rib, chi2, c2))
    rhs = model.ribbon_char(rib, chi1 * chi2, c1 * c2)
    assert probe_residual(lhs, rhs, rng) < 1e-13


def test_ribbon_adjoint_equals_reversed(rng):
    group = make_group([4])
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    rib = ribbon_between(region, region.site((0, 1), (0, 1)), region.site((2, 1), (1, 1)))
    chi = group.character((1,))
    c = group.element((3,))
    adj = model.ribbon_char(rib, chi, c).adjoint()
    rev = model.ribbon_char(rib.reversed(), chi, c)
    assert probe_residual(adj, rev, rng) < 1e-13
    # and both equal F^{conj chi, inverse c} on the original strip
    flipped = model.ribbon_char(rib, chi.inverse(), c.inverse())
    assert probe_residual(adj, flipped, rng) < 1e-13


def test_ribbon_unitary(rng):
    group = make_group([3])
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    rib = ribbon_to_boundary(region, region.site((1, 1), (0, 1)))
    op = model.ribbon_char(rib, group.character((2,)), group.element((1,)))
    assert probe_residual(op.compose(op.adjoint()), model.identity(), rng) < 1e-13


def test_ribbon_concatenation(rng):
    group = make_group([2])
    region = Region.free(4, 4)
    model = QuantumDouble(group, region)
    mid = region.site((2, 2), (2, 2))
    r1 = ribbon_between(region, region.site((1, 1), (0, 0)), mid)
    r2 = ribbon_between(region, mid, region.site((2, 3), (2, 2)))
    whole = concat_ribbons(r1, r2)
    chi, c = group.character((1,)), group.element((1,))
    lhs = model.ribbon_char(whole, chi, c)
    rhs = model.ribbon_char(r1, chi, c).compose(model.ribbon_char(r2, chi, c))
    assert probe_residual(lhs, rhs, rng, k=2) < 1e-13


def test_closed_dual_loop_is_a_star_shift(rng):
    group = make_group([4])
    region = Region.free(3, 3)
    model = QuantumDouble(group, region)
    loop = vertex_dual_loop(region, (1, 1))
    c = group.element((1,))
    for chi in group.characters():
        op = model.ribbon_char(loop, chi, c)
        assert probe_residual(op, model.star_shift((1, 1), c.inverse()), rng, k=1) < 1e-13


def test_closed_direct_loop_is_a_flux_phase(rng):
    group = make_group([3])
    region = Region.torus(2, 2)
    model = QuantumDouble(group, region)
    loop = face_direct_loop(region, (0, 0))
    chi = group.character((1,))
    for c in group.elements():
        op = model.ribbon_char(loop, chi, c)
        assert probe_residual(op, model.face_flux_phase((0, 0), chi), rng, k=1) < 1e-13


def test_crossing_scalar_is_chi_d_xi_c(rng):
    region = Region.free(3, 3)
    for orders in [(2,), (3,), (2, 2)]:
        group = make_group(orders)
        model = QuantumDouble(group, region)
        rho, sigma = crossing_pair(region)
        for chi in group.characters():
            for xi in group.characters():
                for c in group.elements():
                    for d in group.elements():
                        scalar = model.crossing_phase(rho, chi, c, sigma, xi, d)
                        expect = chi(d) * xi(c)
                        assert scalar.exponent == expect.exponent
        # numerically, on one nontrivial pick
        chi, xi = group.characters()[1], group.characters()[-1]
        c, d = group.elements()[1], group.elements()[-1]
        f1 = model.ribbon_char(rho, chi, c)
        f2 = model.ribbon_char(sigma, xi, d)
        scalar = model.crossing_phase(rho, chi, c, sigma, xi, d).to_complex()
        assert probe_residual(f1.compose(f2), f2.compose(f1).scaled(scalar), rng, k=1) < 1e-13


def test_crossing_scalar_z2_charge_vs_flux_is_minus_one():
    # a pure charge strip crossing a pure flux strip anticommutes
    group = make_group([2])
    model = QuantumDouble(group, Region.free(3, 3))
    rho, sigma = crossing_pair(Region.free(3, 3))
    assert model.crossing_phase(rho, 1, 0, sigma, 0, 1).to_complex() == pytest.approx(-1.0)
    assert model.crossing_phase(rho, 0, 1, sigma, 1, 0).to_complex() == pytest.approx(-1.0)
    # two identical dyon strips pick up (-1)^2 = +1
    assert model.crossing_phase(rho, 1, 1, sigma, 1, 1).to_complex() == pytest.approx(1.0)


def test_hamiltonian_matches_reference(rng):
    for orders, region in [
        ((3,), Region.free(2, 2)),
        ((2,), Region.torus(2, 2)),
        ((2,), Region.free(3, 3)),
    ]:
        group = make_group(orders)
        model = QuantumDouble(group, region)
        h = model.hamiltonian()
        col = ref.hamiltonian_column(orders, region)
        assert oracle_residual(h, col, rng, k=1) < 1e-13
        assert probe_residual(h.adjoint(), h, rng, k=1) < 1e-13


def test_hamiltonian_projector_terms_commute(rng):
    group = make_group([2])
    region = Region.torus(2, 2)
    model = QuantumDouble(group, region)
    ops = model.ground_projector_factors()
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            assert probe_residual(ops[i].compose(ops[j]), ops[j].compose(ops[i]), rng, k=1) < 1e-13


def test_boundary_charge_equals_global_detector(rng):
    group = make_group([2])
    model = QuantumDouble(group, Region.free(3, 3))
    assert probe_residual(model.boundary_charge_eps(), model.detector_eps(), rng) < 1e-12
    assert probe_residual(model.boundary_charge_mu(), model.detector_mu(), rng) < 1e-12


def test_boundary_charge_equality_z3(rng):
    group = make_group([3])
    model = QuantumDouble(group, Region.free(3, 3))
    assert probe_residual(model.boundary_charge_eps(), model.detector_eps(), rng, k=2) < 1e-12
    assert probe_residual(model.boundary_charge_mu(), model.detector_mu(), rng, k=2) < 1e-12


def test_sector_projectors_resolve_identity(rng):
    group = make_group([2])
    model = QuantumDouble(group, Region.free(3, 3))
    total = None
    for chi in group.characters():
        for c in group.elements():
            p = model.sector_projector(chi, c)
            assert probe_residual(p.compose(p), p, rng, k=1) < 1e-12
            total = p if total is None else total + p
    assert probe_residual(total, model.identity(), rng) < 1e-12


def test_to_dense_matches_reference_matrix(rng):
    orders, region = (2,), Region.torus(2, 2)
    group = make_group(orders)
    model = QuantumDouble(group, region)
    h = model.hamiltonian()
    dense = h.to_dense()
    mat = ref.to_matrix(ref.hamiltonian_column(orders, region), model.space.dim)
    assert np.max(np.abs(dense - mat)) < 1e-13


def test_dimension_cap():
    group = make_group([4])
    model = QuantumDouble(group, Region.free(4, 4), cap=1 << 20)
    assert model.space.dim == 4 ** 24
    with pytest.raises(DimensionCapError):
        model.space.random_vectors(np.random.default_rng(0), 1)


def test_basis_indexing_roundtrip():
    group = make_group([2, 3])
    model = QuantumDouble(group, Region.free(2, 2))
    space = model.space
    for idx in [0, 1, space.dim - 1, 17, 100 % space.dim]:
        assert space.basis_index(space.config_of(idx)) == idx
