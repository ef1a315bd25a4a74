import math

import pytest

import rwpm


def test_version_and_names():
    assert rwpm.__version__ == "0.1.0"
    assert "kernel-info" in rwpm.experiment_names()


def test_srw3_critical_point():
    e = rwpm.TransitionEngine(rwpm.srw_kernel(3))
    assert e.transient
    assert e.beta0() == pytest.approx(0.659463, abs=1e-5)
    assert e.alpha == pytest.approx(0.5)


def test_free_energy_table():
    e = rwpm.TransitionEngine(rwpm.stable_kernel(0.8))
    tab = rwpm.FreeEnergyTable(e, 1.2 * e.beta0())
    assert tab.F == pytest.approx(rwpm.solve_free_energy(e, 1.2 * e.beta0()))
    assert tab.F > 0
    assert tab.K_beta_bar(0) == pytest.approx(1, rel=1e-6)
    assert rwpm.solve_free_energy(e, 0.5 * e.beta0()) == 0


def test_bad_kernel_raises():
    with pytest.raises(ValueError):
        rwpm.stable_kernel(2.5)
    with pytest.raises(ValueError):
        rwpm.TransitionEngine(rwpm.srw_kernel(1)).beta0()


def test_renewal_fixtures():
    s = rwpm.overlap_stats([0, 1, 3], [0, 2, 5], 0, 5)
    assert (s["j1"], s["j2"], s["frak_j"], s["frak_j_prime"]) == (1, 1, 1, 1)
    tr = rwpm.iterated_overshoots([2, 7, 20], [1, 4, 9, 30], 10, 0, 0)
    assert tr["T"] == [1, 2, 4, 7, 9, 20]
    assert tr["S"] == [1, 2, 3, 2, 11]
    assert tr["D"] == 4


def test_validate_and_run(tmp_path):
    assert any("experiment" in d for d in rwpm.validate({}))
    cfg = {"experiment": "kernel-info", "kernel": {"type": "srw", "d": 3}}
    assert rwpm.validate(cfg) == []
    r = rwpm.run(cfg, out_dir=str(tmp_path))
    assert r["exit_code"] == 0
    assert (tmp_path / "manifest.json").exists()
    assert math.isclose(r["manifest"]["summary"]["beta0"], 0.659463, abs_tol=1e-5)
