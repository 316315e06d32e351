import pytest

from pareto_explore.config import ConfigError, ExplorationConfig, format_config, parse_config, parse_config_text


def test_empty_file_gives_defaults(tmp_path):
    (tmp_path / "e.cfg").write_text("")
    cfg = parse_config(tmp_path / "e.cfg")
    assert cfg == ExplorationConfig()
    assert (cfg.gamma, cfg.hinge_res, cfg.query_res, cfg.budget) == (40.0, 0.2, 0.1, 500)


def test_bad_gamma_names_key_and_line():
    with pytest.raises(ConfigError) as e:
        parse_config_text("gamma = -1\n")
    assert e.value.key == "gamma" and e.value.line == 1
    assert "gamma" in str(e.value) and "line 1" in str(e.value)


def test_partial_override():
    cfg = parse_config_text("# planner\nbudget = 50   # quick\n")
    assert cfg == ExplorationConfig(budget=50)


def test_list_and_bool_values():
    cfg = parse_config_text("dtheta_deg = -45, 0, 45\nnormalize = false\n")
    assert cfg.dtheta_deg == (-45.0, 0.0, 45.0) and cfg.normalize is False


@pytest.mark.parametrize("text,key,line", [
    ("\n\nbogus = 3\n", "bogus", 3),
    ("budget = 10\nbudget = 20\n", "budget", 2),
    ("budget = ten\n", "budget", 1),
    ("budget = 1.5\n", "budget", 1),
    ("seed = 1\nentropy_fraction = 0\n", "entropy_fraction", 2),
    ("occ_threshold = 1.0\n", "occ_threshold", 1),
    ("normalize = maybe\n", "normalize", 1),
])
def test_errors_carry_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as e:
        parse_config_text(text)
    assert (e.value.key, e.value.line) == (key, line)


def test_missing_equals():
    with pytest.raises(ConfigError) as e:
        parse_config_text("budget 10\n")
    assert e.value.line == 1


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.cfg")


def test_format_round_trip():
    cfg = ExplorationConfig(budget=77, dtheta_deg=(-30.0, 30.0), normalize=False, world="x/y.txt")
    assert parse_config_text(format_config(cfg)) == cfg


def test_world_resolution(tmp_path):
    assert ExplorationConfig().world_path().name == "maze12.txt"
    (tmp_path / "w.txt").write_text("###\n#.#\n###\n")
    assert ExplorationConfig(world="w.txt").world_path(tmp_path) == tmp_path / "w.txt"
    with pytest.raises(ConfigError):
        ExplorationConfig(world="missing-world").world_path(tmp_path)
