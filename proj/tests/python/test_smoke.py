"""Smoke tests for the _couplab python module (run via ctest or pytest)."""

import json
import math
import os
import tempfile

import numpy as np

try:
    import couplab as cl
except ImportError:
    import _couplab as cl


def test_version():
    assert cl.__version__


def test_softmax_values():
    # p = 1 is exact; constant coordinates hit the sandwich cap
    assert cl.softmax(np.array([1.7]), 3.0) == 1.7
    got = cl.softmax(np.array([0.3, 0.3, 0.3, 0.3]), 50.0)
    assert abs(got - (0.3 + math.log(4) / 50.0)) < 1e-15
    x = np.random.default_rng(0).normal(size=8)
    f = cl.softmax(x, 50.0)
    assert x.max() - 1e-12 <= f <= x.max() + math.log(8) / 50.0 + 1e-12


def test_mollified_indicator():
    g = cl.MollifiedIndicator([(0.0, 1.0)], 0.1)
    assert abs(g(0.5) - 1.0) < 1e-10
    assert g(2.0) == 0.0
    mid = g(1.15)
    assert 0.0 < mid < 1.0
    vals = g.eval(np.linspace(-0.5, 1.5, 101))
    assert np.all(vals >= -1e-8) and np.all(vals <= 1 + 1e-8)


def test_rate_formulas():
    p = cl.ClassParams(v=1.0, A=math.e, b=1.0, sigma=1.0, q=4.0, n=100, N_B_eta=1, gamma=0.5)
    assert abs(cl.compute_Kn(p) - math.log(100)) < 1e-12
    value, side_ok = cl.delta_rate(p, "d1")
    assert value > 0
    assert isinstance(side_ok, bool)


def test_third_moment_terms():
    m = np.array([[2.0, 0.0], [0.0, -2.0]])
    ln, mnx = cl.third_moment_terms(m, math.log(2.0) / math.sqrt(2.0))
    assert abs(ln - 4.0) < 1e-12
    assert abs(mnx - 8.0) < 1e-12


def test_kolmogorov_and_coupling():
    assert cl.kolmogorov_distance(np.array([0.0, 1.0]), np.array([0.5, 1.5])) == 0.5
    assert abs(cl.coupling_to_kolmogorov(0.3, 0.05, 0.1) - 0.15) < 1e-15


def test_bounds():
    assert abs(cl.nazarov_density_bound(1, 1.0, 0.1) - 0.4) < 1e-12
    b = cl.anticoncentration_bound(1.0, 0.1, 0.0, 1, 1e-6, np.array([6.0]))
    assert abs(b - 0.40002401522997977) < 1e-9


def test_multinomial_weights():
    w = cl.multinomial_weights(500, 7)
    assert w.sum() == 500
    assert (cl.multinomial_weights(500, 7) == w).all()


def test_gaussian_max_sample():
    cov = np.eye(2)
    draws = cl.gaussian_max_sample(cov, np.zeros(2), 20000, 3)
    assert len(draws) == 20000
    assert abs(draws.mean() - 1.0 / math.sqrt(math.pi)) < 0.02


def test_support_function_and_convex_probability():
    ball = cl.ConvexSet.ball(np.zeros(2), 1.0)
    v = np.array([1.0, 0.0])
    assert abs(cl.support_function(ball, v) - 1.0) < 1e-12

    half = cl.ConvexSet.halfspace(np.array([1.0, 0.0]), 0.5)
    prob, se, bias, net_size = cl.convex_probability(
        half, "standard_gaussian", 256, 0.05, "gaussian", 20000, 11
    )
    phi = 0.5 * math.erfc(-0.5 / math.sqrt(2))
    assert net_size == 1
    assert abs(prob - phi) <= 4 * se


def test_run_config_end_to_end():
    cfg = {
        "seed": 5,
        "class": {"kind": "ball_indicators", "dim": 2},
        "net": {"epsilon": 0.2, "pool_size": 100, "probe_size": 1000, "max_members": 8},
        "experiments": [
            {
                "type": "marginal",
                "name": "smoke",
                "n_grid": [16, 32],
                "reps_outer": 50,
                "reps_inner": 50,
            }
        ],
    }
    errors, warnings = cl.validate_config(json.dumps(cfg))
    assert errors == []
    with tempfile.TemporaryDirectory() as out:
        manifest_path, csvs = cl.run_config(json.dumps(cfg), out)
        assert os.path.exists(manifest_path)
        assert len(csvs) == 1
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        assert manifest["outputs"] == csvs
        header = open(csvs[0]).readline()
        assert header.startswith("n,kind,ks,se,")


def test_preset_text():
    text = cl.preset("remark1")
    cfg = json.loads(text)
    assert cfg["experiments"]


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"{name}: ok")
            except AssertionError as exc:
                failures += 1
                print(f"{name}: FAILED {exc}")
    raise SystemExit(1 if failures else 0)
