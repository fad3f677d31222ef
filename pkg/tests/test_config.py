import textwrap

import pytest

from fracnehari.config import ConfigError, load_config

BASE = """
[problem]
domain = 0, 1
N = 16
p = 2
alpha = 0.5
q = 0.5
r = 3
lambda = 1.5
h = "1 + x"
b = "1"
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_defaults_and_values(tmp_path):
    cfg = load_config(write(tmp_path, BASE), environ={})
    assert cfg.problem.N == 16 and cfg.problem.lam == 1.5 and cfg.problem.h == "1 + x"
    assert cfg.seed == 42 and cfg.solver.seed == 42 and cfg.sampler.seed == 42
    assert cfg.output.formats == ["csv", "json"]
    spec = cfg.problem_spec()
    assert spec.lam == 1.5 and spec.mesh.size == 16


def test_sections_and_seed(tmp_path):
    text = BASE + "\n[solver]\nmultistart = 2\ntruncate_negative = no\n[lambda0]\nstarts = 4\n[run]\nseed = 9\n"
    cfg = load_config(write(tmp_path, text), environ={})
    assert cfg.solver.multistart == 2 and cfg.solver.truncate_negative is False
    assert cfg.sampler.starts == 4 and cfg.sampler.seed == 9 and cfg.solver.seed == 9
    assert cfg.with_seed(5).solver.seed == 5


def test_env_override(tmp_path):
    env = {"FRACNEHARI_PROBLEM_LAMBDA": "0.25", "FRACNEHARI_PROBLEM_N": "8", "FRACNEHARI_SOLVER_MULTISTART": "1"}
    cfg = load_config(write(tmp_path, BASE), environ=env)
    assert cfg.problem.lam == 0.25 and cfg.problem.N == 8 and cfg.solver.multistart == 1


def test_two_dimensional_domain(tmp_path):
    text = BASE.replace("domain = 0, 1", "domain = 0, 1; 0, 2").replace("r = 3", "r = 2.5").replace("N = 16", "N = 4")
    cfg = load_config(write(tmp_path, text), environ={})
    assert cfg.problem_spec().mesh.n == 2


@pytest.mark.parametrize(
    "old,new,msg",
    [
        ("q = 0.5", "q = 1", "q < p-1 violated"),
        ("r = 3", "r = 0.5", "p-1 < r violated"),
        ("lambda = 1.5", "lambda = -1", "lambda > 0 violated"),
        ("lambda = 1.5", "", "one of lambda or lambda_factor"),
        ("lambda = 1.5", "lambda = 1\nlambda_factor = 0.5", "not both"),
        ("N = 16", "N = sixteen", r"\[problem\] N"),
        ("N = 16", "N = 1", "N >= 2"),
        ("alpha = 0.5", "alpha = 1.5", "alpha"),
        ("h = \"1 + x\"", "h = \"1 + z\"", "unknown variable"),
        ("domain = 0, 1", "domain = 0", "domain"),
        ("N = 16", "N = 16\nbogus = 1", "unknown key"),
    ],
)
def test_invalid(tmp_path, old, new, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(write(tmp_path, BASE.replace(old, new)), environ={})


def test_unknown_section_and_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        load_config(write(tmp_path, BASE + "\n[extra]\na = 1\n"), environ={})
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.ini", environ={})


def test_echo_round_trip(tmp_path):
    cfg = load_config(write(tmp_path, BASE), environ={})
    echo = cfg.echo()
    assert echo["problem"]["lambda"] == 1.5 and echo["run"]["seed"] == 42
    assert echo["solver"]["multistart"] == cfg.solver.multistart


def test_ini_round_trip(tmp_path):
    text = BASE + "\n[solver]\nmultistart = 3\n[output]\nformats = json\n[run]\nseed = 11\n"
    cfg = load_config(write(tmp_path, text), environ={})
    again = load_config(write(tmp_path, cfg.to_ini(), "again.ini"), environ={})
    assert again.echo() == cfg.echo()
