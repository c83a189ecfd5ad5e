import math

import numpy as np
import pytest

from cascadesim.geometries import (RATE_SCHEMES, closed_form_rates, multipass_alpha,
                                   multipass_squeeze, two_pass_optimal_phase)
from cascadesim.meq import effective_matrices, jump_operators, system_coupling_matrix
from cascadesim.metrics import chain_rates
from cascadesim.presets import preset

PI = math.pi


def random_params(scheme, rng):
    p = {"g1": rng.uniform(0.05, 2), "g2": rng.uniform(0.05, 2), "phi": rng.uniform(0, 2 * PI),
         "theta1": rng.uniform(-PI, PI), "theta2": rng.uniform(-PI, PI)}
    if scheme == "double_pass":
        p.update(eta=rng.uniform(0, 1), g1_minus=rng.uniform(-2, 2), g2_minus=rng.uniform(-2, 2))
    else:
        n = {"single_pass": 1, "loop121": 2, "double_loop": 3}[scheme]
        p.update({f"eta{i + 1}": rng.uniform(0, 1) for i in range(n)})
    return p


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-12)


@pytest.mark.parametrize("scheme", RATE_SCHEMES)
def test_closed_forms_agree_with_master_equation(scheme):
    rng = np.random.default_rng(hash(scheme) % 2**32)
    for _ in range(200):
        params = random_params(scheme, rng)
        a = closed_form_rates(scheme, params)
        b = chain_rates(preset(scheme, params))
        pairs = [(a.g, b.g), (a.Gamma_12, b.Gamma_12), *zip(a.Gamma, b.Gamma),
                 *zip(a.self_interaction, b.self_interaction)]
        assert all(close(x, y) for x, y in pairs), (params, a, b)


def test_loop121_coherent_case():
    eta, g1, g2 = 0.85, 1.1, 0.4
    r = closed_form_rates("loop121", {"g1": g1, "g2": g2, "eta": eta, "phi": PI})
    assert r.g == pytest.approx(2 * eta * g1 * g2)
    assert r.Gamma == pytest.approx((2 * g1**2 * (1 - eta**2), g2**2))
    assert r.Gamma_12 == pytest.approx(0, abs=1e-15)


def test_loop121_dissipative_case_has_no_coherent_coupling():
    r = closed_form_rates("loop121", {"g1": 1.0, "g2": 0.5, "eta": 0.7, "phi": 0.0})
    assert r.g == 0.0
    assert r.Gamma_12 == pytest.approx(2 * 0.7 * 0.5)
    unequal = closed_form_rates("loop121", {"g1": 1.0, "g2": 0.5, "eta1": 0.9, "eta2": 0.6,
                                            "phi": 0.0})
    assert unequal.g == pytest.approx(0.3 * 0.5)


def test_double_pass_without_time_reversal_has_no_hamiltonian():
    params = {"g1": 0.9, "g2": 0.6, "eta": 0.8, "g1_minus": 0.9}
    assert closed_form_rates("double_pass", params).g == 0.0
    assert np.abs(effective_matrices(preset("double_pass", params)).R).max() < 1e-15


def test_double_pass_time_reversed_doubles_coupling():
    r = closed_form_rates("double_pass", {"g1": 0.9, "g2": 0.6, "eta": 0.8})
    assert r.g == pytest.approx(2 * 0.8 * 0.9 * 0.6)
    assert r.Gamma_12 == 0.0


def test_double_loop_equal_losses():
    eta = 0.9
    r = closed_form_rates("double_loop", {"g1": 1.0, "g2": 1.0, "eta": eta})
    assert r.g == pytest.approx(eta * (3 - eta**2))
    assert r.Gamma == pytest.approx((2 * (1 - eta**2),) * 2)


def test_single_pass_jump_rates():
    g, eta = 0.7, 0.45
    r = closed_form_rates("single_pass", {"g1": g, "g2": g, "eta": eta})
    jumps = jump_operators(effective_matrices(preset("single_pass", {"g1": g, "g2": g,
                                                                     "eta": eta})).L)
    assert [j.rate for j in jumps] == pytest.approx([g**2 * (1 + eta), g**2 * (1 - eta)])
    assert r.Gamma_12 == pytest.approx(eta * g**2)


def test_unknown_scheme():
    with pytest.raises(ValueError, match="unknown scheme"):
        closed_form_rates("triangle", {"g1": 1, "g2": 1})
    with pytest.raises(ValueError, match="unknown scheme"):
        multipass_squeeze("four_pass", 1.0, phi=1.0)


# -- single-system squeezing --------------------------------------------------------

def test_three_pass_lossless_alpha():
    rep = multipass_squeeze("three_pass", 1.0)
    assert abs(rep.alpha.real) <= 1e-15
    assert abs(rep.alpha.imag) == pytest.approx(math.sqrt(3) / 2, rel=1e-15)
    assert rep.r == pytest.approx(0.0, abs=1e-15)


def test_three_pass_rates_at_optimal_phase():
    for eta in (0.5, 0.8, 0.95, 1.0):
        for sign in (1, -1):
            rep = multipass_squeeze("three_pass", eta, phi=sign * 2 * PI / 3)
            assert abs(rep.g_sq) == pytest.approx(math.sqrt(3) * (2 * eta - eta**2) / 2)
            assert rep.Gamma == pytest.approx(3 - 2 * eta - eta**2, abs=1e-15)
            assert rep.r == pytest.approx(rep.Gamma / 2 / abs(rep.g_sq), abs=1e-15)


def test_three_pass_ratio_asymptotics():
    ratios = [multipass_squeeze("three_pass", eta).r * math.sqrt(3) * eta / (4 * (1 - eta))
              for eta in (0.99, 0.999, 0.9999)]
    assert abs(ratios[-1] - 1) < 1e-3
    assert abs(ratios[0] - 1) > abs(ratios[1] - 1) > abs(ratios[2] - 1)


def test_three_pass_small_ratio_at_eight_percent_loss():
    assert multipass_squeeze("three_pass", math.sqrt(0.92)).r <= 0.1


def test_two_pass_formulas():
    eta, phi = 0.9, 2.5
    rep = multipass_squeeze("two_pass", eta, phi=phi)
    assert rep.g_sq == pytest.approx(eta * math.sin(phi))
    assert rep.Gamma == pytest.approx(2 * (1 + eta * math.cos(phi)))
    assert rep.r == pytest.approx((1 + eta * math.cos(phi)) / (eta * math.sin(phi)))


def test_two_pass_lossless_ratio_vanishes_towards_pi():
    rs = [multipass_squeeze("two_pass", 1.0, phi=PI - d).r for d in (0.1, 0.01, 0.001)]
    assert rs[0] > rs[1] > rs[2] and rs[2] < 1e-3


def test_two_pass_needs_a_phase_offset():
    with pytest.raises(ZeroDivisionError, match="no squeezing"):
        multipass_squeeze("two_pass", 0.9, phi=0.0)
    with pytest.raises(ValueError):
        multipass_squeeze("two_pass", 0.9)


def test_two_pass_ratio_near_pi_follows_leading_asymptote():
    eta = 0.95
    for d in (1e-3, 1e-4, 1e-5):
        phi = PI - d
        r = multipass_squeeze("two_pass", eta, phi=phi).r
        assert r * (phi - PI) / (1 - 1 / eta) == pytest.approx(1.0, rel=10 * d)


def test_two_pass_optimum():
    eta = 0.95
    phis = np.linspace(PI / 2 + 1e-3, PI - 1e-3, 20001)
    rs = [(1 + eta * math.cos(p)) / (eta * math.sin(p)) for p in phis]
    best = phis[int(np.argmin(rs))]
    assert best == pytest.approx(two_pass_optimal_phase(eta), abs=2 * (phis[1] - phis[0]))
    assert multipass_squeeze("two_pass", eta, phi=best).r == \
        pytest.approx(math.sqrt(1 - eta**2) / eta, rel=1e-6)


@pytest.mark.parametrize("name, phases", [("self_loop2", {"phi": 2.2}),
                                          ("self_loop3", {"phi12": 2.0, "phi23": 1.7})])
def test_squeezing_coefficient_matches_chain(name, phases):
    eta, g1 = 0.9, 0.6
    chain = preset(name, {"g1": g1, "eta": eta, **phases})
    collected = system_coupling_matrix(chain)[0, 0] / g1**2
    steps = tuple(phases.values())
    assert collected == pytest.approx(multipass_alpha(eta, steps), rel=1e-12)
