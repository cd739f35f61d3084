import numpy as np
import pytest

from brody_forge.curves import eval_F, eval_F_deriv_length
from brody_forge.rescaling import (
    RescalingRun,
    check_not_compactly_divergent,
    contradiction_witness,
    convergence_to_csv,
    disk_grid,
    family_member,
    limit_identification,
    logderiv_first_coordinate,
    rescaled_map,
    witness_to_csv,
)


def test_disk_grid():
    g = disk_grid(2.0, 41)
    assert np.all(np.abs(g) <= 2.0)
    assert 0 in g and 2.0 in g


def test_run_rejects_escape(punctured):
    with pytest.raises(ValueError):
        RescalingRun(punctured, A=0.9, j_list=(1,))


def test_family_domain(punctured):
    with pytest.raises(ValueError):
        family_member(punctured, 3, 1.0)


def test_not_compactly_divergent(punctured):
    out = check_not_compactly_divergent(punctured, [1, 5, 50, 500])
    assert out["passed"] and out["matches_eval_F"]


def test_exact_rescaling_is_composition(punctured):
    run = RescalingRun(punctured)
    xi = np.array([0.3 - 0.1j, -1.5, 1j])
    for j in (8, 16, 32):
        np.testing.assert_array_equal(rescaled_map(run, j, xi), eval_F(punctured, run.A + xi))


def test_exact_rows(punctured, plane):
    for curve in (punctured, plane):
        rows = limit_identification(RescalingRun(curve))
        for r in rows:
            assert r.dev_full_map <= 1e-10 and r.dev_first_coord <= 1e-10
            assert abs(r.jrho_measured - 1) <= 1e-12
            assert r.jrho_exact == 1


def test_logderivative_methods(punctured):
    run = RescalingRun(punctured, delta=1.0)
    xi = np.array([0.2 + 0.1j])
    c = logderiv_first_coordinate(run, 16, xi)
    d = logderiv_first_coordinate(run, 16, xi, method="central")
    assert abs(c[0] - 16 * run.rho(16)) <= 1e-12
    assert abs(d[0] - c[0]) <= 1e-8
    with pytest.raises(ValueError):
        logderiv_first_coordinate(run, 16, xi, method="spline")


def test_logderivative_is_real(punctured):
    for delta in (0.0, 1.0):
        run = RescalingRun(punctured, delta=delta)
        xi = disk_grid(1.0, 9)
        for j in run.j_list:
            q = logderiv_first_coordinate(run, j, xi)
            assert np.max(np.abs(q.imag)) <= 1e-8
            np.testing.assert_allclose(q.real, 1 + delta / j, rtol=1e-8)


def test_node_transport(punctured):
    q3 = punctured.q[2]
    F = family_member(punctured, 8, q3 / 8)
    np.testing.assert_allclose(F, eval_F(punctured, q3), rtol=1e-12)
    assert F[0] == pytest.approx(punctured.nodes.alpha[2], rel=1e-14)
    assert F[1] == pytest.approx(np.exp(3), rel=1e-6)


def test_small_speed_flagged(punctured):
    with pytest.warns(RuntimeWarning):
        run = RescalingRun(punctured, B=1e-9, j_list=(8,))
    assert contradiction_witness(run, [5])[0]["speed_near_zero"]
    assert not RescalingRun(punctured).speed_near_zero


def test_logderivative_plane_rejected(plane):
    with pytest.raises(ValueError):
        logderiv_first_coordinate(RescalingRun(plane), 8, np.array([0j]))


def test_perturbed_first_coordinate_decays(punctured):
    rows = limit_identification(RescalingRun(punctured, delta=1.0, j_list=(8, 16, 32, 64)))
    dev = np.array([r.dev_first_coord for r in rows])
    assert np.all(np.diff(dev) < 0)
    slope = np.polyfit(np.log([8, 16, 32, 64]), np.log(dev), 1)[0]
    assert -1.2 <= slope <= -0.8


def test_witness_plane(plane):
    run = RescalingRun(plane)
    out = contradiction_witness(run, [5, 10, 15, 20])
    assert [w["j"] for w in out] == [3, 5, 8, None]
    for w in out[:3]:
        assert w["speed_G"] == pytest.approx(w["scaled_row"], rel=1e-12)
        assert w["speed_G"] > w["c"]


def test_witness_speed_is_limit_speed(punctured):
    run = RescalingRun(punctured)
    w = contradiction_witness(run, [20])[0]
    assert w["j"] is not None
    xi = w["xi"]
    assert w["speed_G"] == pytest.approx(run.speed * eval_F_deriv_length(punctured, run.A + xi),
                                         rel=1e-12)


def test_csv(plane):
    run = RescalingRun(plane)
    rows = limit_identification(run)
    assert convergence_to_csv(rows).splitlines()[0].startswith("j,dev_first_coord")
    text = witness_to_csv(contradiction_witness(run, [20]))
    assert text.splitlines()[1] == "20,,,,0"


def test_json_round_trip(punctured):
    run = RescalingRun(punctured, A=0.05j, delta=0.5, j_list=(4, 8))
    again = RescalingRun.from_json(punctured, run.to_json())
    assert again.to_json() == run.to_json()
    with pytest.raises(ValueError):
        RescalingRun.from_json(punctured, {**run.to_json(), "extra": 1})
