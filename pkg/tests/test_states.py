import numpy as np
import pytest

from qdouble.groups import make_group
from qdouble.lattice import (
    Region,
    direct_ribbon,
    dual_ribbon,
    ribbon_between,
    ribbon_to_boundary,
)
from qdouble.operators import QuantumDouble
from qdouble.spectral import ground_space
from qdouble.states import (
    StateFunctional,
    charge_transport,
    conditional_sector_state,
    eventual_constancy_check,
    frustration_free_state,
    detector_energy_residual,
    indistinguishability_check,
    mix,
    one_sided_sector_expectation,
    probe_family,
    sector_weights,
    single_excitation_state,
    spanning_matrix,
)

Z2 = make_group([2])
Z3 = make_group([3])


@pytest.fixture(scope="module")
def model33():
    return QuantumDouble(Z2, Region.free(3, 3))


@pytest.fixture(scope="module")
def omega33(model33):
    return frustration_free_state(model33)


def test_seed_vector_structure(model33, omega33):
    # gauge orbit of the identity configuration: q^(#interior) configurations
    vec = omega33.vector
    assert vec.n_configs == 2
    assert vec.norm() == pytest.approx(1.0)
    assert omega33.expect(model33.identity()) == pytest.approx(1.0)


def test_seed_vector_matches_dense_projection(model33, omega33):
    space = model33.space
    dense = space.basis_vector([0] * space.num_edges)
    for p in model33.ground_projector_factors():
        dense = p.apply(dense)
    dense /= np.linalg.norm(dense)
    assert np.linalg.norm(omega33.vector.to_dense(space) - dense) < 1e-13


def test_frustration_freeness(model33, omega33):
    for v in model33.region.interior_vertices():
        assert omega33.expect(model33.star(v)) == pytest.approx(1.0, abs=1e-12)
    for f in model33.region.faces():
        assert omega33.expect(model33.plaquette(f)) == pytest.approx(1.0, abs=1e-12)
    assert abs(omega33.expect(model33.hamiltonian())) < 1e-12


def test_uniform_mixture_against_dense_trace():
    # oracle: tr(P A)/tr(P) with P assembled densely from a ground basis
    for group, region in [(Z2, Region.free(2, 3)), (Z2, Region.free(3, 3))]:
        model = QuantumDouble(group, region)
        mixture = frustration_free_state(model, "uniform-mixture")
        basis = ground_space(model, method="projector").vectors
        assert len(mixture.parts) == basis.shape[1]
        probes = [
            model.plaquette((0, 0)),
            model.ribbon_char(direct_ribbon(region, ("h", 0, 0)), 1, 0),
            model.ribbon_char(dual_ribbon(region, ("v", 0, 0)), 0, 1),
        ]
        if region.interior_vertices():
            probes.append(model.star_shift((1, 1), 1))
        for op in probes:
            dense_val = np.trace(basis.conj().T @ op.apply(basis)) / basis.shape[1]
            assert mixture.expect(op) == pytest.approx(dense_val, abs=1e-10)


def test_uniform_mixture_is_frustration_free(model33):
    mixture = frustration_free_state(model33, "uniform-mixture")
    assert mixture.expect(model33.star((1, 1))) == pytest.approx(1.0, abs=1e-12)
    assert mixture.expect(model33.plaquette((1, 1))) == pytest.approx(1.0, abs=1e-12)


def test_open_interior_ribbon_has_zero_ground_expectation():
    region = Region.free(3, 4)
    model = QuantumDouble(Z2, region)
    omega = frustration_free_state(model)
    rib = ribbon_between(region, region.site((1, 1), (1, 1)), region.site((1, 2), (1, 2)))
    for chi, c in [(0, 1), (1, 0), (1, 1)]:
        val = omega.expect(model.ribbon_char(rib, chi, c))
        assert abs(val) < 1e-12
    assert omega.expect(model.ribbon_char(rib, 0, 0)) == pytest.approx(1.0)


def test_single_excitation_energy(model33):
    # H expectation 2 - [chi trivial] - [c trivial] for a boundary-routed ribbon
    site = model33.region.site((1, 1), (1, 1))
    for chi in range(2):
        for c in range(2):
            state = single_excitation_state(model33, site, chi, c)
            want = 2 - (chi == 0) - (c == 0)
            assert state.expect(model33.hamiltonian()) == pytest.approx(want, abs=1e-12)
            bnd = state.expect(model33.hamiltonian(boundary="eps_mu"))
            assert abs(bnd) < 1e-12


def test_single_excitation_is_boundary_ground_z3():
    model = QuantumDouble(Z3, Region.free(3, 3))
    site = model.region.site((1, 1), (0, 0))
    state = single_excitation_state(model, site, 2, 1)
    assert state.expect(model.hamiltonian()) == pytest.approx(2.0, abs=1e-12)
    h_bnd = model.hamiltonian(boundary="eps_mu")
    vec = state.vector
    assert vec.apply(h_bnd).norm() < 1e-12


def test_ribbon_path_independence_on_ground(model33, omega33):
    # equal endpoints, different L-route: identical action on the ground state
    region = model33.region
    s0 = region.site((1, 1), (1, 1))
    s1 = region.site((2, 2), (1, 1))
    for chi, c in [(1, 0), (0, 1), (1, 1)]:
        a = omega33.vector.apply(model33.ribbon_char(ribbon_between(region, s0, s1, "xy"), chi, c))
        b = omega33.vector.apply(model33.ribbon_char(ribbon_between(region, s0, s1, "yx"), chi, c))
        assert a.add(b.scaled(-1.0)).norm() < 1e-12


def test_excitation_routes_agree_locally(model33):
    # different boundary endpoints: same charge at the site, so the same
    # energy, sector weights, and site-local expectations
    site = model33.region.site((1, 1), (1, 1))
    a = single_excitation_state(model33, site, 1, 1, direction=(1, 0))
    b = single_excitation_state(model33, site, 1, 1, direction=(0, 1))
    assert a.expect(model33.hamiltonian()) == pytest.approx(b.expect(model33.hamiltonian()))
    wa, wb = sector_weights(a), sector_weights(b)
    assert wa.as_dict() == pytest.approx(wb.as_dict(), abs=1e-12)
    for name, op in probe_family(model33, site, (1, 1)):
        assert a.expect(op) == pytest.approx(b.expect(op), abs=1e-12), name


def test_single_excitation_validation(model33):
    with pytest.raises(ValueError):
        single_excitation_state(model33, model33.region.site((0, 1), (0, 1)), 1, 1)
    torus_model = QuantumDouble(Z2, Region.torus(2, 2))
    with pytest.raises(ValueError):
        single_excitation_state(torus_model, None, 1, 1)


def test_sector_weights_ground(model33, omega33):
    w = sector_weights(omega33)
    assert w[(0, 0)] == pytest.approx(1.0, abs=1e-12)
    assert w[(1, 0)] == pytest.approx(0.0, abs=1e-12)
    assert w[(0, 1)] == pytest.approx(0.0, abs=1e-12)
    mixture = frustration_free_state(model33, "uniform-mixture")
    assert sector_weights(mixture)[(0, 0)] == pytest.approx(1.0, abs=1e-12)


def test_sector_weights_single_excitation(model33):
    site = model33.region.site((1, 1), (1, 1))
    for chi in range(2):
        for c in range(2):
            state = single_excitation_state(model33, site, chi, c)
            w = sector_weights(state)
            for sigma in range(2):
                for d in range(2):
                    want = 1.0 if (sigma, d) == (chi, c) else 0.0
                    assert w[(sigma, d)] == pytest.approx(want, abs=1e-10)


def test_sector_weights_z3_excitation():
    model = QuantumDouble(Z3, Region.free(3, 3))
    state = single_excitation_state(model, model.region.site((1, 1), (1, 1)), 1, 2)
    w = sector_weights(state)
    assert w[(1, 2)] == pytest.approx(1.0, abs=1e-10)
    assert sum(w.as_dict().values()) == pytest.approx(1.0, abs=1e-10)


def test_sector_weights_mixture_linearity(model33, omega33):
    site = model33.region.site((1, 1), (1, 1))
    exc = single_excitation_state(model33, site, 1, 1)
    half = mix([(omega33, 0.5), (exc, 0.5)])
    w = sector_weights(half)
    assert w[(0, 0)] == pytest.approx(0.5, abs=1e-10)
    assert w[(1, 1)] == pytest.approx(0.5, abs=1e-10)


def test_sector_weights_json(model33, omega33):
    w = sector_weights(omega33)
    d = w.to_json_dict(model33.group)
    assert d["group"] == "Z2"
    assert d["region"] == "free:3x3"
    assert len(d["weights"]) == 4
    assert d["weights"][0]["chi"] == [0]
    assert d["weights"][0]["lambda"] == pytest.approx(1.0)


def test_conditional_state_recovers_component(model33, omega33):
    site = model33.region.site((1, 1), (1, 1))
    exc = single_excitation_state(model33, site, 1, 1)
    half = mix([(omega33, 0.5), (exc, 0.5)])
    cond = conditional_sector_state(half, 1, 1)
    assert cond.info["weight"] == pytest.approx(0.5, abs=1e-10)
    for name, op in probe_family(model33, site, (1, 1)):
        assert cond.expect(op) == pytest.approx(exc.expect(op), abs=1e-10), name


def test_conditional_on_ground_sector_is_identity(model33, omega33):
    cond = conditional_sector_state(omega33, 0, 0)
    for v in model33.region.interior_vertices():
        assert cond.expect(model33.star(v)) == pytest.approx(1.0, abs=1e-12)
    assert abs(cond.expect(model33.hamiltonian())) < 1e-12


def test_conditional_vanishing_sector_raises(model33, omega33):
    with pytest.raises(ValueError):
        conditional_sector_state(omega33, 1, 1)


def test_one_sided_equals_sandwiched_for_interior_ops(model33, omega33):
    site = model33.region.site((1, 1), (1, 1))
    exc = single_excitation_state(model33, site, 1, 0)
    half = mix([(omega33, 0.5), (exc, 0.5)])
    cond = conditional_sector_state(half, 1, 0)
    for name, op in probe_family(model33, site, (1, 1)):
        one = one_sided_sector_expectation(half, 1, 0, op)
        assert one == pytest.approx(cond.expect(op), abs=1e-10), name


def test_charge_transport_morphism(model33, omega33):
    region = model33.region
    rib = ribbon_to_boundary(region, region.site((1, 1), (1, 1)))
    a = model33.star_shift((1, 1), 1)
    b = model33.plaquette_indicator((1, 1), 1)
    probe = omega33.vector
    alpha_id = charge_transport(model33, rib, 1, 1, model33.identity())
    assert probe.apply(alpha_id).add(probe.scaled(-1.0)).norm() < 1e-12
    ab = charge_transport(model33, rib, 1, 1, a @ b)
    a_b = charge_transport(model33, rib, 1, 1, a) @ charge_transport(model33, rib, 1, 1, b)
    diff = probe.apply(ab).add(probe.apply(a_b).scaled(-1.0))
    assert diff.norm() < 1e-12


def test_transport_of_ground_equals_excited(model33, omega33):
    region = model33.region
    site = region.site((1, 1), (1, 1))
    exc = single_excitation_state(model33, site, 1, 1)
    long_rib = ribbon_to_boundary(region, site, direction=(0, -1))
    for name, op in probe_family(model33, site, (1, 1)):
        transported = omega33.expect(charge_transport(model33, long_rib, 1, 1, op))
        assert transported == pytest.approx(exc.expect(op), abs=1e-10), name


def test_detector_energy_expectations(model33, omega33):
    site = model33.region.site((1, 1), (1, 1))
    assert detector_energy_residual(omega33) < 1e-12
    both = single_excitation_state(model33, site, 1, 1)
    assert both.expect(model33.hamiltonian()) == pytest.approx(2.0, abs=1e-12)
    de = both.expect(model33.detector_eps())
    dm = both.expect(model33.detector_mu())
    assert de == pytest.approx(1.0, abs=1e-12)
    assert dm == pytest.approx(1.0, abs=1e-12)
    assert detector_energy_residual(both) < 1e-12
    charge_only = single_excitation_state(model33, site, 1, 0)
    assert charge_only.expect(model33.hamiltonian()) == pytest.approx(1.0, abs=1e-12)
    assert charge_only.expect(model33.detector_eps()) == pytest.approx(1.0, abs=1e-12)
    assert abs(charge_only.expect(model33.detector_mu())) < 1e-12
    assert detector_energy_residual(charge_only) < 1e-12


def test_eventual_constancy_small_vs_large():
    dev = eventual_constancy_check(Z2, Region.free(4, 4), Region.free(5, 5), (1, 1), 1, 1)
    assert dev < 1e-10


def test_eventual_constancy_validation():
    with pytest.raises(ValueError):
        eventual_constancy_check(Z2, Region.free(4, 4), Region.torus(5, 5), (1, 1), 1, 1)
    with pytest.raises(ValueError):
        eventual_constancy_check(Z2, Region.free(5, 5), Region.free(4, 4), (1, 1), 1, 1)
    with pytest.raises(ValueError):
        eventual_constancy_check(Z2, Region.free(4, 4), Region.free(5, 5), (0, 0), 1, 1)


def test_vector_seed_vs_mixture_inner_block():
    model = QuantumDouble(Z2, Region.free(4, 4))
    assert indistinguishability_check(model) < 1e-10


def test_spanning_matrix_no_interior():
    model = QuantumDouble(Z2, Region.free(2, 3))
    cols = spanning_matrix(model)
    assert cols.shape == (128, 128)
    s = np.linalg.svd(cols, compute_uv=False)
    assert int(np.sum(s > 1e-8 * s[0])) == 128


def test_spanning_matrix_torus_rejected():
    model = QuantumDouble(Z2, Region.torus(2, 2))
    with pytest.raises(ValueError):
        spanning_matrix(model)
