import json

import numpy as np
import pytest

from gaussvarlp.config import (load_config, parse_exponent, parse_field, parse_lambdas,
                               parse_point, parse_profile, parse_spec)
from gaussvarlp.errors import ConfigError
from gaussvarlp.fields import FieldSum


def field_of(exc):
    return exc.value.field


def test_parse_exponent_families():
    assert parse_exponent({"family": "constant", "p": 3}, 2)(np.zeros((1, 2)))[0] == 3
    p = parse_exponent({"family": "radial_rational", "p_inf": 2, "amplitude": 1}, 2)
    assert p.p_inf == 2
    q = parse_exponent('{"family": "expression", "source": "2 + 1/(1 + x1**2 + x2**2)"}', 2)
    assert q(np.zeros((1, 2)))[0] == pytest.approx(3.0)


@pytest.mark.parametrize("cfg,path", [
    ({"family": "constant"}, "exponent.p"),
    ({"family": "constant", "p": 0.5}, "exponent.p"),
    ({"family": "constant", "p": "two"}, "exponent.p"),
    ({"family": "weird"}, "exponent.family"),
    ({"family": "expression", "source": "x1 +"}, "exponent.source"),
    ({"family": "expression"}, "exponent.source"),
])
def test_parse_exponent_errors_name_the_field(cfg, path):
    with pytest.raises(ConfigError) as exc:
        parse_exponent(cfg, 2)
    assert field_of(exc) == path


def test_parse_profile_forms():
    a = parse_profile({"hermite": [[1, 0], [0, 2]], "coeffs": [1.0, 0.5]}, 2)
    b = parse_profile("x1*x2", 2)
    c = parse_profile({"expression": "x1*x2"}, 2)
    z = np.array([[0.3, -1.2]])
    assert a.eval(z)[0] == pytest.approx(2 * 0.3 + 0.5 * (4 * 1.44 - 2))
    assert b.eval(z)[0] == pytest.approx(c.eval(z)[0])


@pytest.mark.parametrize("cfg,path", [
    ({"hermite": [[1, 0]], "coeffs": [1.0, 2.0]}, "spec.profile.coeffs"),
    ({"hermite": [[1]], "coeffs": [1.0]}, "spec.profile.hermite"),
    ({"other": 1}, "spec.profile"),
])
def test_parse_profile_errors(cfg, path):
    with pytest.raises(ConfigError) as exc:
        parse_profile(cfg, 2, "spec.profile")
    assert field_of(exc) == path


def test_parse_field_kinds():
    pts = np.array([[0.0, 0.0], [2.0, 0.0]])
    assert np.all(parse_field({"kind": "constant", "value": 2}, 2)(pts) == 2)
    ball = parse_field({"kind": "ball", "center": [2, 0], "radius": 0.5}, 2)
    assert ball(pts).tolist() == [0.0, 1.0]
    h = parse_field({"kind": "hermite", "alpha": [1, 0]}, 2)
    assert h(pts).tolist() == [0.0, 4.0]
    e = parse_field({"kind": "expression", "source": "x1 + 1",
                     "support": {"center": [0, 0], "radius": 1}}, 2)
    assert e(pts).tolist() == [1.0, 0.0]
    s = parse_field({"kind": "sum", "terms": [
        {"kind": "constant", "value": 1.0},
        {"kind": "bump", "center": [0, 0], "width": 1.0, "scale": -1.0}]}, 2)
    assert isinstance(s, FieldSum)
    assert s(pts)[0] == pytest.approx(0.0)


@pytest.mark.parametrize("cfg,path", [
    ({"kind": "ball", "center": [0, 0]}, "field.radius"),
    ({"kind": "ball", "center": [0], "radius": 1}, "field.center"),
    ({"kind": "bump", "width": -1}, "field.width"),
    ({"kind": "hermite", "alpha": [1, -1]}, "field.alpha"),
    ({"kind": "hermite", "alpha": [1, 0], "kappa": -1}, "field.kappa"),
    ({"kind": "sum", "terms": []}, "field.terms"),
    ({"kind": "sum", "terms": [{"kind": "ball"}]}, "field.terms[0].radius"),
    ({"kind": "cube"}, "field.kind"),
])
def test_parse_field_errors(cfg, path):
    with pytest.raises(ConfigError) as exc:
        parse_field(cfg, 2)
    assert field_of(exc) == path


def test_parse_spec_and_overrides():
    spec = parse_spec({"variant": "general", "m": 3, "profile": "x1"}, overrides={"m": 1})
    assert (spec.variant, spec.m, spec.d, spec.scale_const) == ("general", 1, 2, 2.0)
    spec = parse_spec({"outer_tol": 1e-4, "n_radial": 14})
    assert spec.outer_tol == 1e-4 and spec.n_radial == 14


@pytest.mark.parametrize("cfg,path", [
    ({"variant": "other"}, "spec.variant"),
    ({"m": 0}, "spec.m"),
    ({"m": 1.5}, "spec.m"),
    ({"profile": "x1**2"}, "spec"),
    ({"outer_tol": -1}, "spec.outer_tol"),
])
def test_parse_spec_errors(cfg, path):
    with pytest.raises(ConfigError) as exc:
        parse_spec(cfg)
    assert field_of(exc) == path


def test_points_and_lambdas():
    assert parse_point("1.5,-2", 2).tolist() == [1.5, -2.0]
    with pytest.raises(ConfigError):
        parse_point("1,2,3", 2)
    lam = parse_lambdas("log:0.01:10:20")
    assert lam.size == 20 and lam[0] == pytest.approx(0.01) and lam[-1] == pytest.approx(10)
    assert parse_lambdas("0.5,1").tolist() == [0.5, 1.0]
    for bad in ("log:1:0.5:3", "log:a:b", [-1.0], "x"):
        with pytest.raises(ConfigError):
            parse_lambdas(bad)


def test_load_config(tmp_path):
    good = tmp_path / "c.json"
    good.write_text(json.dumps({"command": "norm"}))
    assert load_config(good) == {"command": "norm"}
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    (tmp_path / "list.json").write_text("[1]")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "list.json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
