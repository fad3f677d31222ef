"""Run configuration: INI-style sections of ``key = value`` pairs.

Example::

    [problem]
    domain = 0, 1
    N = 64
    p = 2
    alpha = 0.5
    kernel = fractional
    q = 0.5
    r = 3
    lambda_factor = 0.5     ; lambda = factor * lambda0 estimate (or give lambda = ...)
    h = "1"
    b = "1"

    [solver]
    multistart = 4

    [lambda0]
    starts = 64
    steps = 200

    [output]
    directory = out
    formats = csv, json

    [run]
    seed = 42

Any key can be overridden from the environment as
``FRACNEHARI_<SECTION>_<KEY>``, e.g. ``FRACNEHARI_PROBLEM_LAMBDA=0.2``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .discretization import MeshError, build_mesh
from .expressions import ExpressionError, kernel_evaluator
from .fibering import SamplerConfig
from .functional import ProblemError, ProblemSpec
from .kernel import CUSTOM, FAMILIES, KernelError, KernelSpec
from .solver import SolverConfig

ENV_PREFIX = "FRACNEHARI_"
SECTIONS = ("problem", "solver", "lambda0", "output", "run")


class ConfigError(ValueError):
    pass


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


@dataclass
class ProblemBlock:
    domain: list = field(default_factory=lambda: [[0.0, 1.0]])
    N: int = 64
    p: float = 2.0
    alpha: float = 0.5
    theta: float = 1.0
    kernel: str = "fractional"
    multiplier: float = 1.0
    kernel_expression: str | None = None
    singularity_exponent: float | None = None
    q: float = 0.5
    r: float = 3.0
    lam: float | None = None
    lambda_factor: float | None = None
    h: str = "1"
    b: str = "1"


@dataclass
class OutputBlock:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    verbosity: int = 0


@dataclass
class RunConfig:
    problem: ProblemBlock
    solver: SolverConfig
    sampler: SamplerConfig
    output: OutputBlock
    seed: int = 42
    source: str | None = None

    def kernel_spec(self) -> KernelSpec:
        pb = self.problem
        n = len(pb.domain)
        try:
            if pb.kernel == CUSTOM:
                if not pb.kernel_expression:
                    raise ConfigError("[problem] kernel = custom requires kernel_expression")
                return KernelSpec(
                    n, pb.p, pb.alpha, pb.theta, CUSTOM,
                    evaluator=kernel_evaluator(pb.kernel_expression, n),
                    singularity_exponent=pb.singularity_exponent,
                )
            return KernelSpec(n, pb.p, pb.alpha, pb.theta, pb.kernel, multiplier=pb.multiplier)
        except (KernelError, ExpressionError) as exc:
            raise ConfigError(f"[problem] kernel: {exc}") from None

    def problem_spec(self, lam: float | None = None) -> ProblemSpec:
        """Build the discrete problem; ``lam`` overrides the configured value.

        With ``lambda_factor`` and no explicit value, a provisional lambda of 1
        is used so that lambda0 can be estimated first.
        """
        pb = self.problem
        lam = lam if lam is not None else pb.lam if pb.lam is not None else 1.0
        try:
            mesh = build_mesh(pb.domain, pb.N)
            return ProblemSpec.from_expressions(self.kernel_spec(), mesh, pb.q, pb.r, lam, pb.h, pb.b)
        except (MeshError, ProblemError, ExpressionError) as exc:
            raise ConfigError(f"[problem] {exc}") from None

    def echo(self) -> dict:
        prob = asdict(self.problem)
        prob["lambda"] = prob.pop("lam")
        return {
            "problem": prob,
            "solver": asdict(self.solver),
            "lambda0": asdict(self.sampler),
            "output": asdict(self.output),
            "run": {"seed": self.seed},
        }

    def to_ini(self) -> str:
        """Config text that reloads to this configuration."""
        return echo_to_ini(self.echo())

    def with_seed(self, seed: int) -> RunConfig:
        return _assemble(self.problem, asdict(self.solver), asdict(self.sampler), self.output, seed, self.source)


def echo_to_ini(echo: dict) -> str:
    """Render a config echo (as stored in result.json) back to config text."""
    lines = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for key, val in echo.get(section, {}).items():
            if val is None:
                continue
            if key == "domain":
                val = "; ".join(f"{a!r}, {b!r}" for a, b in val)
            elif key in ("h", "b", "kernel_expression"):
                val = f'"{val}"'
            elif isinstance(val, list):
                val = ", ".join(val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)


def _parse_domain(text: str) -> list:
    try:
        axes = [[float(v) for v in part.split(",")] for part in text.split(";") if part.strip()]
    except ValueError:
        raise ConfigError(f"[problem] domain: cannot parse {text!r}") from None
    if not axes or any(len(ax) != 2 for ax in axes):
        raise ConfigError(f"[problem] domain: expected 'a, b' or 'a, b; c, d', got {text!r}")
    return axes


def _convert(section: str, key: str, raw: str, typ):
    try:
        if typ is bool:
            val = raw.strip().lower()
            if val in ("1", "true", "yes", "on"):
                return True
            if val in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as {typ.__name__}") from None


_PROBLEM_TYPES = {
    "N": int, "p": float, "alpha": float, "theta": float, "multiplier": float,
    "singularity_exponent": float, "q": float, "r": float, "lambda": float, "lambda_factor": float,
}


def _read_problem(items: dict) -> ProblemBlock:
    pb = ProblemBlock()
    for key, raw in items.items():
        if key == "domain":
            pb.domain = _parse_domain(raw)
        elif key == "kernel":
            fam = _unquote(raw).lower()
            if fam not in FAMILIES:
                raise ConfigError(f"[problem] kernel: unknown family {fam!r}; choose from {FAMILIES}")
            pb.kernel = fam
        elif key in ("h", "b", "kernel_expression"):
            setattr(pb, key, _unquote(raw))
        elif key in _PROBLEM_TYPES:
            val = _convert("problem", key, raw, _PROBLEM_TYPES[key])
            setattr(pb, "lam" if key == "lambda" else key, val)
        else:
            raise ConfigError(f"[problem] unknown key {key!r}")
    if pb.lam is None and pb.lambda_factor is None:
        raise ConfigError("[problem] one of lambda or lambda_factor is required")
    if pb.lam is not None and pb.lambda_factor is not None:
        raise ConfigError("[problem] give lambda or lambda_factor, not both")
    if pb.lambda_factor is not None and not pb.lambda_factor > 0:
        raise ConfigError("[problem] lambda_factor > 0 violated")
    return pb


def _read_dataclass(section: str, cls, items: dict, extra=()) -> dict:
    types = {f.name: f.type for f in fields(cls)}
    out = {}
    for key, raw in items.items():
        if key in extra:
            continue
        if key not in types:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        typ = {"int": int, "float": float, "bool": bool}[str(types[key])]
        out[key] = _convert(section, key, raw, typ)
    return out


def _assemble(problem, solver_kw, sampler_kw, output, seed, source) -> RunConfig:
    solver_kw = {**solver_kw, "seed": seed}
    sampler_kw = {**sampler_kw, "seed": seed}
    try:
        solver = SolverConfig(**solver_kw)
        sampler = SamplerConfig(**sampler_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(problem, solver, sampler, output, seed, source)


def load_config(path, environ=None) -> RunConfig:
    """Read and validate a run configuration (file values, then environment overrides)."""
    environ = os.environ if environ is None else environ
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    for name in parser.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]; expected one of {SECTIONS}")
    for var, value in sorted(environ.items()):
        if not var.startswith(ENV_PREFIX):
            continue
        rest = var[len(ENV_PREFIX):].lower()
        section, _, key = rest.partition("_")
        if section not in SECTIONS or not key:
            continue
        if not parser.has_section(section):
            parser.add_section(section)
        existing = {k.lower(): k for k in parser[section]}
        if section == "problem" and key == "n":
            key = "N"
        parser[section][existing.get(key, key)] = value

    get = lambda s: dict(parser[s]) if parser.has_section(s) else {}
    problem = _read_problem(get("problem"))
    run = get("run")
    seed = _convert("run", "seed", run.pop("seed"), int) if "seed" in run else 42
    if run:
        raise ConfigError(f"[run] unknown key(s) {sorted(run)}")
    solver_kw = _read_dataclass("solver", SolverConfig, get("solver"))
    solver_kw.pop("seed", None)
    sampler_kw = _read_dataclass("lambda0", SamplerConfig, get("lambda0"))
    sampler_kw.pop("seed", None)

    out_items = get("output")
    output = OutputBlock()
    for key, raw in out_items.items():
        if key == "directory":
            output.directory = _unquote(raw)
        elif key == "formats":
            fmts = [f.strip().lower() for f in raw.split(",") if f.strip()]
            bad = set(fmts) - {"csv", "json"}
            if bad:
                raise ConfigError(f"[output] formats: unsupported {sorted(bad)}")
            output.formats = fmts
        elif key == "verbosity":
            output.verbosity = _convert("output", key, raw, int)
        else:
            raise ConfigError(f"[output] unknown key {key!r}")
    cfg = _assemble(problem, solver_kw, sampler_kw, output, seed, str(path))
    cfg.problem_spec()  # revalidate the standing assumptions now
    return cfg
