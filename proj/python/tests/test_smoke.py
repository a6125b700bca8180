import itertools
import math

import numpy as np
import pytest

import calibr


def test_form_algebra():
    e12 = calibr.Form(4, 2, {(1, 2): 1.0})
    e34 = calibr.Form(4, 2, {(3, 4): 1.0})
    w = e12 + e34
    assert w.terms() == {(1, 2): 1.0, (3, 4): 1.0}
    assert calibr.wedge(w, w).terms() == {(1, 2, 3, 4): 2.0}
    assert calibr.pairing(w, e12) == 1.0
    assert calibr.hodge_star(e12).terms() == {(3, 4): 1.0}
    assert (2.0 * w - w).norm() == pytest.approx(math.sqrt(2))


def test_form_json_round_trip():
    w = calibr.catalogue("omega4").form
    back = calibr.Form.from_json(w.to_json())
    assert (back - w).norm() == 0.0


def test_bad_input_raises_value_error():
    with pytest.raises(calibr.InputError, match=r"form.terms\[0\].indices\[1\]"):
        calibr.Form.from_json({"n": 4, "p": 2, "terms": [{"indices": [2, 1], "coeff": 1}]})
    with pytest.raises(ValueError):
        calibr.catalogue("nosuch")


def test_plucker_matches_minors():
    rng = np.random.default_rng(0)
    frame = np.linalg.qr(rng.standard_normal((5, 2)))[0]
    xi = calibr.plucker(frame)
    for (i, j), c in xi.terms().items():
        minor = np.linalg.det(frame[[i - 1, j - 1], :])
        assert c == pytest.approx(minor, abs=1e-12)


def test_catalogue_comass_is_one():
    names = {e["name"] for e in calibr.catalogue_list()}
    assert "associative" in names
    for sel in ["kaehler:2:1", "special_lagrangian:3", "associative"]:
        r = calibr.comass(calibr.catalogue(sel).form, multistarts=40)
        assert r["value"] == pytest.approx(1.0, abs=1e-6)


def test_lambda_grassmannian_is_one_plane():
    s = calibr.sample_grassmannian(calibr.catalogue("lambda:0.5"), count=20)
    assert len(s["planes"]) == 1


def test_mass_norm_bracket():
    r = calibr.mass_norm(calibr.catalogue("omega4").form)
    assert r["lower"] <= 2.0 + 1e-6
    assert r["upper"] >= 2.0 - 1e-6
    assert r["upper"] - r["lower"] < 1e-5


def test_boundary_batch_consistent():
    sites = [[0, 0, 0, 0]] + [[a, b, 0, 0] for a, b in itertools.product([-1, 1], repeat=2)]
    out = calibr.boundary_batch(calibr.catalogue("omega4"), sites, count=10)
    summary = out["summary"]
    assert summary["consistent"] + summary["ties"] == 10
    assert len(out["instances"]) == 10


def test_jensen_inside_hull_is_feasible():
    sites = [[a, b, 0, 0] for a, b in itertools.product([-1, 1], repeat=2)] + [[0, 0, 0, 0]]
    r = calibr.jensen(calibr.catalogue("omega4"), sites, K=[0, 1, 2, 3], x=4)
    assert r["consistent"]
    assert r["primal"]["status"] == "Feasible"


def test_acceptance_criterion():
    assert calibr.criterion_count == 12
    r = calibr.run_criterion(12)
    assert r["passed"], r["detail"]
