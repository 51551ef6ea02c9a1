import math

import numpy as np
import pytest

import bifurcate as bf


@pytest.fixture(scope="module")
def ramp():
    return bf.Problem(M=0.2)


def test_eigenvalues(ramp):
    assert abs(ramp.lambda1 - math.pi**2) / math.pi**2 < 1e-4
    assert abs(ramp.lambda2 - 4 * math.pi**2) / (4 * math.pi**2) < 1e-4
    assert ramp.phi.shape == (399,)
    assert ramp.phi.max() == pytest.approx(1.0)
    assert np.dot(ramp.harvest, ramp.psi) < 0


def test_hypotheses(ramp):
    report = bf.check_hypotheses(ramp)
    assert report["all_pass"]
    assert bf.check_hypotheses(bf.Problem(harvest="first_mode"))["all_pass"] is False


def test_newton_linear_regime(ramp):
    p = bf.newton_solve(ramp, np.zeros(399), 5.0, -0.5)
    assert p["residual"] < 1e-10
    assert p["morse_index"] == 0
    assert p["u"].max() <= 0.2


def test_count_window(ramp):
    s = bf.count_solutions(ramp, 40.0, -0.005, n_starts=800)
    assert s["count"] == 4
    assert s["indices"] == [0, 1, 1, 2]


def test_regimes(ramp):
    assert bf.detect_regime(ramp, 20.0) == "(lambda1,lambda2)"
    assert bf.detect_regime(ramp, 5.0) == "below-lambda1"
    with pytest.raises(ValueError):
        bf.detect_regime(ramp, ramp.lambda3 + 1)


def test_diagram_below_lambda1(ramp):
    d = bf.diagram(ramp, 5.0, verify=True)
    assert d["schema_version"] == "bifurcate.result/1"
    assert [b["label"] for b in d["branches"]] == ["M_unique"]
    assert d["report"]["verification"]["all_pass"]


def test_run_count(tmp_path):
    cfg = "schema: bifurcate.config/1\nrun: {a: 40, c: -0.005, n_starts: 800}\n"
    status, log, err = bf.run("count", cfg, out=str(tmp_path))
    assert status == 0, err
    assert "count=4" in log
    assert (tmp_path / "count.json").exists()


def test_config_error_has_line():
    with pytest.raises(ValueError, match=r":3:3: unknown key 'bogus'"):
        bf.run("count", "schema: bifurcate.config/1\nrun:\n  bogus: 1\n")
