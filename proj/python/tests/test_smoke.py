import math

import numpy as np
import pytest

import nsasym


def test_landau_roundtrip():
    for A in (1.01, 1.1, 2.0, 5.0, 10.0, 100.0):
        b = nsasym.b_of_A(A)
        assert abs(nsasym.a_of_b(b) - A) <= 1e-8 * A
    assert nsasym.b_of_A(2.0) == pytest.approx(34.767, rel=1e-4)


def test_landau_solution_is_homogeneous():
    sol = nsasym.LandauSolution.from_A(2.0, np.array([0.0, 0.0, 1.0]))
    x = np.array([0.3, -0.4, 1.2])
    assert np.allclose(sol.velocity(2.0 * x), 0.5 * sol.velocity(x), rtol=1e-14, atol=0.0)
    assert sol.pressure(2.0 * x) == pytest.approx(0.25 * sol.pressure(x), rel=1e-14)
    assert np.linalg.norm(sol.b) == pytest.approx(nsasym.b_of_A(2.0), rel=1e-14)


def test_oseen_trace_and_heat_kernel():
    assert nsasym.heat_kernel(1.0, np.zeros(3)) == pytest.approx((4 * math.pi) ** -1.5, rel=1e-15)
    x = np.array([0.5, -0.2, 0.9])
    S = nsasym.oseen(0.7, x)
    assert np.allclose(S, S.T, atol=1e-15)
    assert np.trace(S) == pytest.approx(2.0 * nsasym.heat_kernel(0.7, x), rel=1e-10)


def test_int_est_scaling_reduction():
    xs = [r * np.array([0.0, 0.6, 0.8]) for r in (0.05, 0.7, 3.0)]
    a = nsasym.int_est_ratio(1.0, 0.0, 1.0, 2.0, 4.0, xs)
    b = nsasym.int_est_ratio(1.0, 0.0, 1.0, 1.0, 1.0, [x / 2 for x in xs])
    assert np.allclose(a, b, rtol=1e-6, atol=0.0)


def test_errors_map_to_python_exceptions():
    with pytest.raises(nsasym.DomainError):
        nsasym.b_of_A(0.5)
    with pytest.raises(ValueError):
        nsasym.run("kernel", bogus=1)
    with pytest.raises(nsasym.ConfigError, match="n"):
        nsasym.run("kernel", n="abc")


def test_run_suite(tmp_path):
    report, timings = nsasym.run("flux", output_dir=tmp_path, radii=[2, 4, 8])
    flux = report["sections"]["flux"]
    assert report["summary"]["pass"]
    assert all(inv["pass"] for inv in flux["invariants"])
    assert flux["constants"]["b_extracted"][2] == pytest.approx(34.767, rel=1e-3)
    assert "flux" in timings
    assert (tmp_path / "flux.csv").exists()
