import numpy as np
import pytest

from multikink.errors import ConfigError, DegenerateVacuumError, InvalidChainError
from multikink.potential import PotentialModel, eval_potential, find_vacua, validate_chain


def test_builtin_values(phi4, sg):
    phi4_model, _ = phi4
    sg_model, _ = sg
    assert eval_potential(phi4_model, 1.0, 0) == 0.0
    assert eval_potential(phi4_model, 0.0, 0) == 1.0
    assert eval_potential(sg_model, 0.0, 2) == 1.0


def test_order_validation(phi4):
    model, _ = phi4
    with pytest.raises(ConfigError):
        model(0.5, 4)
    with pytest.raises(ConfigError):
        model(0.5, -1)


@pytest.mark.parametrize("fixture,expected_vacua,expected_masses", [
    ("phi4", (-1.0, 1.0), (2.0 * np.sqrt(2.0),) * 2),
    ("phi6", (-1.0, 0.0, 1.0), (2.0 * np.sqrt(2.0), np.sqrt(2.0), 2.0 * np.sqrt(2.0))),
])
def test_find_vacua_builtin(request, fixture, expected_vacua, expected_masses):
    model, table = request.getfixturevalue(fixture)
    assert np.allclose(table.vacua, expected_vacua, atol=1e-10)
    assert np.allclose(table.masses, expected_masses, atol=1e-10)
    for w in table.vacua:
        assert abs(model(w, 0)) <= 1e-12
        assert model(w, 2) > 1e-12


def test_find_vacua_sine_gordon_window(sg):
    model, _ = sg
    table = find_vacua(model, interval=(-1.0, 7.0))
    assert np.allclose(table.vacua, (0.0, 2.0 * np.pi), atol=1e-10)
    assert np.allclose(table.masses, (1.0, 1.0), atol=1e-10)


def test_custom_poly_matches_phi4(phi4):
    model, _ = phi4
    custom = PotentialModel.custom_poly([1.0, 0.0, -2.0, 0.0, 1.0])
    xs = np.linspace(-1.5, 1.5, 41)
    for order in range(4):
        assert np.allclose(custom(xs, order), model(xs, order), atol=1e-12)
    table = find_vacua(custom)
    assert np.allclose(table.vacua, (-1.0, 1.0), atol=1e-10)


def test_custom_trig_matches_sine_gordon(sg):
    model, _ = sg
    custom = PotentialModel.custom_trig([1.0, -1.0])
    xs = np.linspace(-3.0, 9.0, 41)
    for order in range(4):
        assert np.allclose(custom(xs, order), model(xs, order), atol=1e-12)


def test_degenerate_vacuum_rejected():
    quartic = PotentialModel.custom_poly([0.0, 0.0, 0.0, 0.0, 1.0])
    with pytest.raises(DegenerateVacuumError):
        find_vacua(quartic, interval=(-1.0, 1.0))


def test_positive_local_minimum_not_a_vacuum():
    # W = (1 - p^2)^2 + 0.1 has the same minima but no zeros
    lifted = PotentialModel.custom_poly([1.1, 0.0, -2.0, 0.0, 1.0])
    with pytest.raises(ConfigError):
        find_vacua(lifted, interval=(-2.0, 2.0))


def test_validate_chain(sg, phi4, phi6):
    _, sg_table3 = sg
    assert validate_chain(sg_table3, (0, 1, 2)).labels == (0, 1, 2)
    _, phi4_table = phi4
    assert validate_chain(phi4_table, (0, 1, 0)).labels == (0, 1, 0)
    _, phi6_table = phi6
    with pytest.raises(InvalidChainError):
        validate_chain(phi6_table, (0, 2))
    with pytest.raises(InvalidChainError):
        validate_chain(phi4_table, (0, 5))


@pytest.mark.parametrize("fixture", ["phi4", "phi6", "sg"])
def test_derivative_consistency(request, fixture):
    # finite differences of order k match order k+1 at O(h^2)
    model, _ = request.getfixturevalue(fixture)
    xs = np.linspace(-1.2, 1.2, 17)
    for k in range(3):
        errs = []
        for h in (2e-2, 1e-2):
            fd = (model(xs + h, k) - model(xs - h, k)) / (2.0 * h)
            errs.append(np.max(np.abs(fd - model(xs, k + 1))))
        assert errs[0] <= 0.1
        assert errs[1] <= 0.3 * errs[0] + 1e-12
