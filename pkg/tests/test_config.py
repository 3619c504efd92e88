import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from gapinn.config import (DGM_EPOCHS, PRESETS, SCHEMA_VERSION, ExperimentConfig, dump_config, load_config,
                           preset_config, save_config)
from gapinn.problems import PROBLEM_NAMES, get_problem
from gapinn.training import MODES, ConfigError, PwParams


def test_poisson_preset():
    cfg = preset_config("poisson", "pinn")
    assert cfg.tc == 5e-5 and cfg.generator == (4, 100)
    assert (cfg.n_interior, cfg.n_boundary, cfg.n_labeled) == (5000, 100, 5)
    assert (cfg.eta_G, cfg.eta_P, cfg.eta_D) == (1e-3, 1e-6, 5e-6)


@pytest.mark.parametrize("problem", PROBLEM_NAMES)
@pytest.mark.parametrize("mode", MODES)
def test_every_preset_is_valid(problem, mode):
    cfg = preset_config(problem, mode)
    cfg.validate(get_problem(problem))
    assert len(cfg.pw_boundary) == len(get_problem(problem).boundary_terms)
    if mode == "dgm":
        assert cfg.max_epochs == DGM_EPOCHS[problem]


def test_adversarial_rate_ratio():
    for problem, p in PRESETS.items():
        assert p["eta_D"] == pytest.approx(5 * p["eta_P"]), problem


def test_schrodinger_periodic_terms_share_second_pair():
    cfg = preset_config("schrodinger", "pinn_pw")
    assert cfg.pw_boundary[1] == cfg.pw_boundary[2] == PwParams(5e-3, 1e-4)
    assert cfg.pw_boundary[0] == PwParams(5e-3, 5e-4)


def test_unknown_names():
    with pytest.raises(ConfigError, match="poisson"):
        preset_config("nope", "pinn")
    with pytest.raises(ConfigError):
        preset_config("poisson", "nope")


def test_overrides():
    cfg = preset_config("heat", "gapinn", seed=4, max_epochs=7)
    assert cfg.seed == 4 and cfg.max_epochs == 7


def _exp(**kw):
    runs = [preset_config("poisson", "pinn"), preset_config("burgers", "gapinn_pw")]
    return ExperimentConfig(runs=runs, seeds=[0, 1, 2], **kw)


def test_yaml_round_trip(tmp_path):
    exp = _exp(name="demo", checkpoint_every=10)
    save_config(exp, tmp_path / "c.yaml")
    text = (tmp_path / "c.yaml").read_text()
    assert text.startswith("#") and "lambda1" in text
    back = load_config(tmp_path / "c.yaml")
    assert back.to_dict() == exp.to_dict()
    assert back.runs == exp.runs


def test_expand_sets_seed():
    out = list(_exp(data_root="/data").expand())
    assert [(label, s) for label, s, _ in out][:3] == [("poisson-pinn", 0), ("poisson-pinn", 1), ("poisson-pinn", 2)]
    assert all(cfg.seed == s and cfg.data_root == "/data" for _, s, cfg in out)


def _raw():
    return yaml.safe_load(dump_config(_exp()))


def test_unknown_top_level_key():
    d = _raw()
    d["colour"] = "blue"
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict(d)


def test_unknown_run_key():
    d = _raw()
    d["runs"][0]["learning_rate"] = 1.0
    with pytest.raises(ConfigError, match="learning_rate"):
        ExperimentConfig.from_dict(d)


@pytest.mark.parametrize("version", [None, 0, 2, "1"])
def test_schema_version(version):
    d = _raw()
    d["schema_version"] = version
    with pytest.raises(ConfigError, match="schema_version"):
        ExperimentConfig.from_dict(d)
    assert SCHEMA_VERSION == 1


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(seeds=[1, 1]),
    lambda d: d.update(runs=[]),
    lambda d: d["runs"].append(dict(d["runs"][0])),
    lambda d: d["runs"][0].update(seed=3),
    lambda d: d["runs"][0].update(tc=-1.0),
    lambda d: d["runs"][1].update(n_labeled=0),
    lambda d: d["runs"][0].update(problem="nope"),
    lambda d: d.update(checkpoint_every=0),
])
def test_invalid_experiments(mutate):
    d = _raw()
    mutate(d)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d)


def test_malformed_yaml(tmp_path):
    (tmp_path / "bad.yaml").write_text("runs: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.yaml")


@given(st.sampled_from(PROBLEM_NAMES), st.sampled_from(MODES), st.lists(st.integers(0, 10 ** 6), min_size=1,
                                                                          max_size=4, unique=True),
       st.floats(1e-8, 1.0), st.integers(1, 10 ** 5))
def test_round_trip_property(problem, mode, seeds, tc, k):
    exp = ExperimentConfig(runs=[preset_config(problem, mode, tc=tc, max_epochs=k)], seeds=seeds)
    back = ExperimentConfig.from_dict(yaml.safe_load(dump_config(exp)))
    assert back.to_dict() == exp.to_dict()
