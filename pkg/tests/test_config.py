import math

import pytest

from wavereg import ConfigError
from wavereg.config import (ExperimentConfig, load_config, parse_overrides, parse_text,
                            validate, write_template)


def test_defaults():
    cfg = load_config()
    assert cfg.eps_grid()[0] == 2**-4 and cfg.eps_grid().size == 9
    assert cfg.zoo_members() == ("dirac", "sawtooth_jump", "smooth_bump")
    assert cfg.resolved_lambda_max() == 1e6 and cfg.resolved_weyl_tol() == 0.01


def test_torus_defaults():
    cfg = load_config(overrides={"manifold": "torus"})
    assert cfg.zoo_members() == ("line_delta", "smooth_bump")
    assert cfg.resolved_lambda_max() == 1e4 and cfg.resolved_weyl_tol() == 0.02
    assert cfg.manifold_model().dim == 2


def test_parse_sections():
    text = """
[manifold]
manifold = torus
side_lengths = 6.0, 3.0   # comment
[cutoff]
c = 0.5, 0.8
[checks]
contrasts = yes
checks = A, C
"""
    up = parse_text(text)
    assert up == {"manifold": "torus", "side_lengths": (6.0, 3.0), "c": 0.5, "c_alt": 0.8,
                  "contrasts": True, "checks": ("A", "C")}


def test_flat_text_without_sections():
    assert parse_text("eps_count = 12\nseed = 3\n") == {"eps_count": 12, "seed": 3}


@pytest.mark.parametrize("text", [
    "[eps]\neps_count = 3\n[run]\neps_count = 4\n",   # duplicate across sections
    "[filter]\nbogus = 1\n",                          # unknown key
    "[weird]\na = 1\n",                               # unknown section
    "[filter]\neps_count = 3\n",                      # key in the wrong section
    "[eps]\neps_count = 2.5\n",                       # non-integer count
    "[checks]\ncontrasts = maybe\n",                  # bad boolean
    "[filter]\na = one\n",                            # not a number
])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_text(text)


def test_overrides_accept_dashes():
    up = parse_overrides([("--eps-ratio", "0.25"), ("--lambda-max", "1e5"), ("--zoo", "dirac")])
    assert up == {"eps_ratio": 0.25, "lambda_max": 1e5, "zoo": ("dirac",)}
    with pytest.raises(ConfigError):
        parse_overrides([("--nope", "1")])


@pytest.mark.parametrize("bad", [{"eps_ratio": 1.5}, {"a": 3.0}, {"manifold": "sphere"},
                                 {"eps_start": 2.0}, {"zoo": ("nope",)}, {"checks": ("Q",)},
                                 {"side_lengths": (1.0,), "manifold": "torus"},
                                 {"workers": 0}, {"lambda_max": -1.0}, {"seed": -1}])
def test_validate_rejects(bad):
    with pytest.raises(ConfigError):
        load_config(overrides=bad)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.ini")


def test_template_round_trip(tmp_path):
    p = write_template(tmp_path / "t.ini")
    cfg = load_config(p)
    assert cfg == ExperimentConfig()
    validate(cfg)


def test_output_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv("REG_OUTPUT_DIR", raising=False)
    assert str(ExperimentConfig().resolved_output_dir()) == "wavereg-out"
    monkeypatch.setenv("REG_OUTPUT_DIR", str(tmp_path))
    assert ExperimentConfig().resolved_output_dir() == tmp_path
    assert ExperimentConfig(output_dir="x").resolved_output_dir().name == "x"


def test_refined_grid_spans_same_range():
    cfg = ExperimentConfig()
    g = cfg.refined_grid(0.75)
    assert g[0] == cfg.eps_grid()[0]
    assert g[-1] >= cfg.eps_grid()[-1] and g[-1] * 0.75 < cfg.eps_grid()[-1]
    assert math.isclose(g[1] / g[0], 0.75)
