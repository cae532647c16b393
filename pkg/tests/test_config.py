import math

import pytest

from quotient_spectrum.config import (
    SCHEMA,
    ConfigError,
    ExperimentConfig,
    default_config_text,
    load_config,
    parse_config,
)
from quotient_spectrum.models import MPInducedModel


def test_defaults_round_trip():
    cfg = parse_config(default_config_text())
    assert cfg == ExperimentConfig()
    assert cfg.n == 2000 and cfg.k == 2 and cfg.points == 65
    assert cfg.alpha_min is None and cfg.alphas == ()
    assert cfg.probe_alphas == (-0.05, -0.02, -0.01)


def test_every_schema_key_is_in_default_text():
    text = default_config_text()
    for section, keys in SCHEMA.items():
        assert f"[{section}]" in text
        for key in keys:
            assert f"\n{key} = " in text


def test_parse_values():
    cfg = parse_config(
        """
[model]
id = mp:0.5
branch_cutoff = 300
[truncation]
n = 250   # inline comment
k = 3
tail = 50, 100 250
[grid]
alphas = -0.1 0 0.05
alpha_min = -0.2
side = right
[tolerances]
power_tol = 1e-12
spectrum_tol = 1e-9
"""
    )
    assert cfg.model_id == "mp:0.5" and cfg.branch_cutoff == 300
    assert (cfg.n, cfg.k, cfg.tail) == (250, 3, (50, 100, 250))
    assert cfg.alphas == (-0.1, 0.0, 0.05)
    assert cfg.alpha_min == -0.2 and cfg.alpha_max is None
    assert cfg.side == "right"
    assert cfg.tolerances.power_tol == 1e-12 and cfg.spectrum_tol == 1e-9
    model = cfg.build_model()
    assert isinstance(model, MPInducedModel) and model.branch_count == 300


@pytest.mark.parametrize(
    "text",
    [
        "[modle]\nid = gauss\n",
        "[model]\nidd = gauss\n",
        "[truncation]\nn = many\n",
        "[truncation]\nn = 0\n",
        "[grid]\nside = middle\n",
        "[tolerances]\npower_tol = -1\n",
        "[tolerances]\nspectrum_tol = 0\n",
        "[potentials]\nflow_observable_kind = other\n",
        "no section header\n",
        "[model]\nid = gauss\n[model]\nid = gauss\n",
    ],
)
def test_malformed_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_keys_are_case_sensitive():
    with pytest.raises(ConfigError):
        parse_config("[truncation]\nN = 10\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    assert load_config(None) == ExperimentConfig()


def test_load_from_file(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[model]\nid = gauss\n[truncation]\nn = 12\n")
    assert load_config(path).n == 12


def test_overrides():
    cfg = ExperimentConfig()
    assert cfg.with_overrides(n=None, k=None) is cfg
    assert cfg.with_overrides(n=7, k=None).n == 7
    with pytest.raises(ConfigError):
        cfg.with_overrides(k=0)


def test_combination_parsing(gauss):
    cfg = ExperimentConfig(combination="0.5*log-digit, -1.2*log-derivative")
    combo = cfg.build_combination(gauss)
    assert [(c, p.name) for c, p in combo] == [(0.5, "log-digit"), (-1.2, "log-derivative")]
    for bad in ("log-digit", "x*log-digit", "1*nothing", " , "):
        with pytest.raises(ConfigError):
            ExperimentConfig(combination=bad).build_combination(gauss)


def test_model_errors_become_config_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig(model_id="tent").build_model()
    with pytest.raises(ConfigError):
        ExperimentConfig(model_id="mp:2").build_model()
    with pytest.raises(ConfigError):
        ExperimentConfig(model_id="gauss", branch_cutoff=4).build_model()


def test_spec_uses_budget():
    spec = ExperimentConfig(n=30, k=3, budget=10**5).spec
    assert (spec.n, spec.k, spec.budget) == (30, 3, 10**5)
    assert math.isclose(ExperimentConfig().q_max, 1e4)
