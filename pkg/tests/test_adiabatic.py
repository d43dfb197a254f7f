import numpy as np
import pytest

from zenosim import (
    SectorTrackingError,
    StepResolutionError,
    TimeDependentBundle,
    ValidationError,
    constant_bundle,
    exact_propagator,
    intertwining_defect,
    propagate_td,
    propagate_td_interaction,
    required_steps,
    rotating_bundle,
    rotation_generator,
    snorm,
    three_level,
)


def rotating_three_level(omega=1.0, rate=0.2, coupling=1.0, kind="phase"):
    m = three_level(omega, coupling)
    gen = rotation_generator(3, 2, 3, kind)
    return rotating_bundle(m.h.matrix, m.h_meas, gen, rate, coupling)


# --------------------------------------------------------------------------
# integrator


def test_constant_bundle_matches_exact_propagator():
    hk = three_level(1.0, 5.0)
    b = constant_bundle(hk)
    u = propagate_td(b, 1.2, required_steps(b, 1.2))
    # midpoint exponentials are exact for a constant generator
    assert snorm(u.matrix - exact_propagator(hk, 1.2).matrix) <= 1e-11


def test_propagate_unitary_and_second_order():
    b = rotating_three_level(coupling=5.0, rate=0.3)
    t = 1.0
    n0 = 4 * required_steps(b, t)
    u1 = propagate_td(b, t, n0).matrix
    u2 = propagate_td(b, t, 2 * n0).matrix
    u3 = propagate_td(b, t, 4 * n0).matrix
    assert snorm(u3.conj().T @ u3 - np.eye(3)) <= 1e-10
    ratio = snorm(u1 - u2) / snorm(u2 - u3)
    assert 3.6 <= ratio <= 4.4


def test_step_resolution_error_names_timescale():
    b = rotating_three_level(coupling=50.0)
    with pytest.raises(StepResolutionError) as info:
        propagate_td(b, 1.0, 3)
    assert info.value.timescale == "measurement"
    slow = TimeDependentBundle(h=lambda t: 30.0 * np.diag([1.0, -1.0]),
                               h_meas=lambda t: np.zeros((2, 2)), coupling=0.0)
    with pytest.raises(StepResolutionError) as info:
        propagate_td(slow, 1.0, 10)
    assert info.value.timescale == "system"


def test_propagate_rejects_nonhermitian_sample():
    bad = TimeDependentBundle(h=lambda t: np.array([[0, t], [0, 0]]),
                              h_meas=lambda t: np.zeros((2, 2)), coupling=0.0)
    with pytest.raises(ValidationError):
        propagate_td(bad, 1.0, 100)


def test_time_zero_is_identity():
    b = rotating_three_level()
    assert np.array_equal(propagate_td(b, 0.0, 1).matrix, np.eye(3))


def test_frame_consistency():
    b = rotating_three_level(coupling=3.0, rate=0.4)
    t = 1.0
    n = 4 * required_steps(b, t)
    direct = propagate_td(b, t, n).matrix
    us, ui = propagate_td_interaction(b, t, n)
    diff_n = snorm(us.matrix @ ui.matrix - direct)
    us2, ui2 = propagate_td_interaction(b, t, 2 * n)
    direct2 = propagate_td(b, t, 2 * n).matrix
    diff_2n = snorm(us2.matrix @ ui2.matrix - direct2)
    assert diff_n <= 1e-4            # both integrators agree at the tolerance
    assert diff_2n <= diff_n / 2     # and the disagreement is integration error


# --------------------------------------------------------------------------
# intertwining / transport


def test_constant_coupling_reduces_to_commutator_defect():
    hk = three_level(1.0, 1.0)
    b = constant_bundle(hk)
    reports = intertwining_defect(b, 1.0, [25.0], samples=10)
    r = reports[0]
    # constant sectors: defect is the worst commutator norm over checkpoints
    from zenosim import zeno_sectors

    sec = zeno_sectors(hk)
    worst = 0.0
    for t in np.linspace(0.1, 1.0, 10):
        u = exact_propagator(hk.with_coupling(25.0), t).matrix
        for s in sec:
            p = s.projector.matrix
            worst = max(worst, snorm(u @ p - p @ u))
    assert r.max_defect == pytest.approx(worst, rel=1e-6)


def test_intertwining_defect_zero_at_time_zero():
    b = rotating_three_level()
    reports = intertwining_defect(b, 0.0, [10.0], samples=1)
    assert reports[0].max_defect <= 1e-12


def test_intertwining_defect_shrinks_with_coupling():
    b = rotating_three_level(rate=0.2)
    reports = intertwining_defect(b, 1.5, [10.0, 40.0, 160.0], samples=30)
    d = [r.max_defect for r in reports]
    assert d[1] / d[0] <= 0.35
    assert d[2] / d[1] <= 0.35
    drift = [r.max_drift for r in reports]
    assert drift[0] > drift[1] > drift[2]


def test_transport_monotone_on_doubling_grid():
    b = rotating_three_level(rate=0.2)
    reports = intertwining_defect(b, 1.0, [10.0, 20.0, 40.0, 80.0], samples=20)
    defects = [r.max_defect for r in reports]
    drifts = [r.max_drift for r in reports]
    for a, bb in zip(defects, defects[1:]):
        assert bb <= 1.05 * a
    for a, bb in zip(drifts, drifts[1:]):
        assert bb <= 1.05 * a


def test_plane_rotation_transport():
    b = rotating_three_level(rate=0.15, kind="plane")
    reports = intertwining_defect(b, 1.0, [20.0, 80.0], samples=20)
    assert reports[1].max_defect < reports[0].max_defect / 2


def test_eigenvalue_crossing_refused():
    hm0 = np.diag([1.0, -1.0, 0.0])

    def h_meas(t):
        return (1.0 - 2.0 * t) * hm0

    b = TimeDependentBundle(h=lambda t: np.zeros((3, 3)), h_meas=h_meas, coupling=10.0)
    with pytest.raises(SectorTrackingError):
        intertwining_defect(b, 1.0, [10.0], samples=10)


def test_bad_grids_rejected():
    b = rotating_three_level()
    with pytest.raises(ValidationError):
        intertwining_defect(b, 1.0, [])
    with pytest.raises(ValidationError):
        intertwining_defect(b, 1.0, [-1.0])
