"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line with its runtime, bypassing
pytest's output capture so the lines appear in a plain ``pytest`` run.
"""

import math
import time

import numpy as np
import pytest

from cascadesim import studies
from cascadesim.chain import InteractionChain, Pass, SystemSpec
from cascadesim.delays import DelaySpec, delay_corrected_matrix
from cascadesim.fock import FockConfig, oracle_compare
from cascadesim.gaussian import drift_diffusion, evolve, thermal_state
from cascadesim.geometries import RATE_SCHEMES, closed_form_rates, multipass_squeeze
from cascadesim.meq import effective_matrices, mn_matrix
from cascadesim.metrics import chain_rates
from cascadesim.presets import preset

PI = math.pi


@pytest.fixture
def report(capsys):
    """Print a verdict line for ``label`` around the body of a test."""
    class Reporter:
        def __init__(self):
            self.start = time.perf_counter()

        def elapsed(self):
            return time.perf_counter() - self.start

        def __call__(self, label, ok, detail=""):
            with capsys.disabled():
                verdict = "PASS" if ok else "FAIL"
                print(f"\n{verdict} {label} ({self.elapsed():.2f} s) {detail}".rstrip())
            return ok

    return Reporter()


def within(x, target, rel):
    return abs(x - target) <= rel * abs(target)


# 1 -----------------------------------------------------------------------------------

def test_cooperativity_curves(report):
    losses = np.linspace(0.0, 0.9, 91)
    rows = studies.cooperativity_curves(losses)
    worst = 0.0
    for loss, single, double, _, _ in rows[1:]:
        e2 = 1 - loss
        single_ref = 8 * e2 / (1 - e2)
        double_ref = e2 * (3 - e2) ** 2 / (1 - e2) ** 2
        rates = chain_rates(preset("double_loop", {"g1": 1.0, "g2": 1.0, "eta": math.sqrt(e2)}))
        pipeline = rates.g**2 / (rates.Gamma[0] * rates.Gamma[1] / 4)
        worst = max(worst, abs(single / single_ref - 1), abs(double / double_ref - 1),
                    abs(pipeline / double_ref - 1))
    zero = rows[0]
    finite_ok = within(zero[3], 4 * 25 / (0.5 + 1 / 4), 1e-6) and within(zero[4], 400.0, 1e-6)
    ok = worst <= 1e-9 and finite_ok and rows[0][1] == math.inf and report.elapsed() < 1
    assert report("1 cooperativity curves", ok,
                  f"max rel err {worst:.1e}, zero loss {zero[3]:.4f} / {zero[4]:.4f}")


# 2 -----------------------------------------------------------------------------------

def test_sympathetic_cooling(report):
    gs = np.logspace(-3, 0, 100)
    lossless = [n2 for _, _, n2 in studies.cooling_sweep(gs, eta=1.0)]
    lossy = [n2 for _, _, n2 in studies.cooling_sweep(gs, eta=0.9)]
    g_best = gs[int(np.argmin(lossless))]
    gamma1 = preset("fig7", {}).systems[0].gamma
    ok = (min(lossless) < 1 and min(lossy) < 1 and gamma1 / 3 <= g_best <= 3 * gamma1
          and report.elapsed() < 10)
    assert report("2 sympathetic cooling", ok,
                  f"min n2 {min(lossless):.3f} at g={g_best:.3g}; lossy {min(lossy):.3f}")


# 3 -----------------------------------------------------------------------------------

def test_transient_epr_and_stationary_entanglement(report):
    rows = studies.entanglement_trajectory("fig8_121", np.linspace(0, 1000, 2001))
    min_epr = min(d for _, _, d in rows)
    e121 = studies.stationary_log_negativity("fig8_121")
    e1212 = studies.stationary_log_negativity("fig8_1212")
    ok = abs(min_epr - 0.25) <= 0.05 and e121 > 0 and e1212 >= e121 and report.elapsed() < 30
    assert report("3 entanglement dynamics", ok,
                  f"min EPR {min_epr:.3f}, E_N 121 {e121:.3f}, 1212 {e1212:.3f}")


# 4 -----------------------------------------------------------------------------------

def test_entanglement_loss_thresholds(report):
    targets = {"fig8_12": 0.40, "fig8_212": 0.40, "fig8_121": 0.50, "fig8_1212": 0.70}
    found = {name: studies.entanglement_loss_threshold(name) for name in targets}
    hits = {name: found[name] is not None and abs(found[name] - t) <= 0.05
            for name, t in targets.items()}
    detail = ", ".join(f"{n} {found[n]:.3f}/{targets[n]:.2f}" for n in targets)
    ok = all(hits.values()) and report.elapsed() < 60
    assert report("4 entanglement loss thresholds", ok, detail)


# 5 -----------------------------------------------------------------------------------

def test_three_pass_squeezing(report):
    lossless = multipass_squeeze("three_pass", 1.0, phi=2 * PI / 3)
    lossy = multipass_squeeze("three_pass", math.sqrt(1 - 0.08), phi=2 * PI / 3)
    ok = (lossless.alpha.real == 0.0 or abs(lossless.alpha.real) <= 1e-15) \
        and abs(abs(lossless.alpha.imag) - math.sqrt(3) / 2) <= 1e-15 and lossy.r <= 0.1 + 0.01
    assert report("5 three-pass squeezing", ok,
                  f"alpha {lossless.alpha:.3g}, r(8% loss) {lossy.r:.4f}")


# 6 -----------------------------------------------------------------------------------

def random_chain(rng):
    n_sys = int(rng.integers(1, 4))
    n = int(rng.integers(1, 7))
    systems = tuple(SystemSpec(i + 1) for i in range(n_sys))
    passes = tuple(Pass(int(rng.integers(1, n_sys + 1)), float(rng.uniform(0, 2)),
                        float(rng.uniform(-PI, PI)), float(rng.uniform(-PI, PI)))
                   for _ in range(n))
    return InteractionChain(systems, passes, tuple(float(e) for e in rng.uniform(0, 1, n - 1)))


def test_dissipator_positivity(report):
    rng = np.random.default_rng(20261014)
    worst_L, worst_M = math.inf, math.inf
    for _ in range(1000):
        chain = random_chain(rng)
        L = effective_matrices(chain).L
        norm = float(np.linalg.norm(L, 2))
        worst_L = min(worst_L, float(np.linalg.eigvalsh(L)[0]) / max(norm, 1e-300))
        M, lo = mn_matrix(chain.link_etas, chain.n_passes)
        worst_M = min(worst_M, lo)
    ok = worst_L >= -1e-10 and worst_M >= -1e-12 and report.elapsed() < 5
    assert report("6 dissipator positivity", ok,
                  f"min eig(L)/|L| {worst_L:.1e}, min eig(M) {worst_M:.1e}")


# 7 -----------------------------------------------------------------------------------

ORACLE_CHAINS = [
    ("single_pass", {"g1": 0.3, "g2": 0.3, "eta": 0.8, "gamma1": 0.2, "gamma2": 0.2,
                     "nbar1": 0.3}),
    ("loop121", {"g1": 0.3, "g2": 0.3, "eta": 0.9, "gamma1": 0.2, "gamma2": 0.2, "nbar2": 0.3,
                 "theta2": -0.5}),
    ("loop212", {"g1": 0.3, "g2": 0.3, "eta": 0.9, "gamma1": 0.2, "gamma2": 0.2, "nbar1": 0.3,
                 "theta1": 0.4}),
    ("double_loop", {"g1": 0.25, "g2": 0.25, "eta": 0.9, "gamma1": 0.2, "gamma2": 0.2,
                     "nbar1": 0.2}),
    ("double_pass", {"g1": 0.2, "g2": 0.2, "eta": 0.9, "gamma1": 0.3, "gamma2": 0.3,
                     "nbar2": 0.3}),
    ("loop121", {"g1": 0.2, "g2": 0.2, "eta": 0.9, "gamma1": 0.2, "gamma2": 0.2, "nbar2": 0.3,
                 "omega1": 1.0, "omega2": -1.0, "theta1": 0.5, "theta2": -0.5}),
]


def cooled(name):
    """Entangling preset with the warm oscillator's bath lowered to half a phonon."""
    chain = preset(name, {})
    s1, s2 = chain.systems
    return chain.replace(systems=(s1, SystemSpec(2, s2.omega, s2.gamma, 0.5)))


def test_fock_oracle_equivalence(report):
    t = np.linspace(0, 10, 21)
    chains = [preset(name, params) for name, params in ORACLE_CHAINS]
    chains += [cooled("fig8_121"), cooled("fig8_1212")]
    devs = [oracle_compare(chain, FockConfig((10, 10)), t).max_abs_deviation for chain in chains]
    ok = len(devs) >= 5 and max(devs) <= 1e-3 and report.elapsed() < 120
    assert report("7 Fock oracle equivalence", ok,
                  f"{len(devs)} chains, max deviation {max(devs):.1e}")


# 8 -----------------------------------------------------------------------------------

def draw_params(scheme, rng):
    p = {"g1": rng.uniform(0.05, 2), "g2": rng.uniform(0.05, 2), "phi": rng.uniform(0, 2 * PI),
         "theta1": rng.uniform(-PI, PI), "theta2": rng.uniform(-PI, PI)}
    if scheme == "double_pass":
        p.update(eta=rng.uniform(0, 1), g1_minus=rng.uniform(-2, 2), g2_minus=rng.uniform(-2, 2))
    else:
        n = {"single_pass": 1, "loop121": 2, "double_loop": 3}[scheme]
        p.update({f"eta{i + 1}": rng.uniform(0, 1) for i in range(n)})
    return p


def test_closed_form_cross_validation(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for scheme in RATE_SCHEMES:
        for _ in range(200):
            params = draw_params(scheme, rng)
            a, b = closed_form_rates(scheme, params), chain_rates(preset(scheme, params))
            pairs = [(a.g, b.g), (a.Gamma_12, b.Gamma_12), *zip(a.Gamma, b.Gamma),
                     *zip(a.self_interaction, b.self_interaction)]
            for x, y in pairs:
                worst = max(worst, abs(x - y) / max(abs(x), abs(y), 1e-12))
    ok = worst <= 1e-9 and report.elapsed() < 5
    assert report("8 closed-form cross-validation", ok,
                  f"{len(RATE_SCHEMES)} schemes x 200, max rel err {worst:.1e}")


# 9 -----------------------------------------------------------------------------------

def test_backaction_cancellation(report):
    g1, omega, eps = 0.5, 1.0, 0.2
    chain = preset("self_loop2", {"g1": g1, "eta": 1.0, "phi": PI, "omega1": omega})
    t = np.linspace(0, 100, 101)
    C0 = thermal_state(chain.systems)
    drift = max(np.abs(np.diag(C) - np.diag(C0)).max()
                for C in evolve(drift_diffusion(chain), C0, t))

    # Second pass arrives after omega * tau = eps.
    At = delay_corrected_matrix(chain, DelaySpec((0.0, eps / omega)), order="exact")
    Cs = evolve(drift_diffusion(chain, At=At), C0, t)
    total = [np.trace(C) for C in Cs]
    rate = np.polyfit(t, total, 1)[0]
    expected = 2 * g1**2 * (1 - math.cos(eps))
    ok = drift <= 1e-6 and abs(rate / expected - 1) <= 0.05
    assert report("9 back-action cancellation", ok,
                  f"variance drift {drift:.1e}, heating {rate:.4e} vs {expected:.4e}")
