"""Flat ``key = value`` experiment configuration.

Grammar, one entry per line::

    # comment (also after a value)
    section.key = value

Values are parsed as booleans (``true``/``false``), integers, floats, or
comma-separated lists of those; an empty value means "default"; anything
else is a string (optionally quoted).
Keys are dotted: ``env.*``, ``opt.*``, ``noise.*``, ``planner.*``,
``basis.*`` and ``experiment.*``.  The run manifest uses the same grammar
(plus informational ``manifest.*`` keys) so it can be fed back to ``run``.
"""

import re
from dataclasses import dataclass, field, fields

from ..envs import ENV_KINDS
from ..errors import ConfigurationError
from ..noise import NoiseSchedule
from ..optim import ALGORITHMS, OptimizerConfig
from ..planner import PlannerConfig

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")

EXPERIMENT_DEFAULTS = {
    "id": "experiment",
    "mode": "optimize",
    "trials": 5,
    "base_seed": 0,
    "seeds": None,
    "sample_sweep": None,
    "algorithms": None,
    "output_dir": "results",
    "export_scores": False,
    "replays": True,
    "figures": True,
}

# config keys whose names differ from the dataclass field
_OPT_RENAMES = {"lambda": "lam"}


def parse_scalar(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if not low:
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_value(text):
    text = text.strip()
    if "," in text and not (text[:1] in "\"'" and text[-1:] == text[:1]):
        return [parse_scalar(part) for part in text.split(",") if part.strip()]
    return parse_scalar(text)


def parse_text(text, source="<config>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigurationError(f"{source}:{lineno}: malformed key", key=key)
        out[key] = parse_value(value)
    return out


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump(flat):
    return "".join(f"{k} = {format_value(v)}\n" for k, v in sorted(flat.items()))


def _section(flat, prefix):
    n = len(prefix) + 1
    return {k[n:]: v for k, v in flat.items() if k.startswith(prefix + ".")}


def _build(cls, values, prefix, renames=None):
    renames = renames or {}
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in values.items():
        name = renames.get(key, key)
        if name not in names:
            raise ConfigurationError("unknown key", key=f"{prefix}.{key}")
        if value is None:
            continue  # empty value: keep the default
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc), key=prefix) from exc


def _as_list(value):
    if value is None:
        return None
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentConfig:
    flat: dict
    env_kind: str
    env: object
    opt: OptimizerConfig
    noise: NoiseSchedule
    planner: PlannerConfig
    nodes: int
    dense: int
    experiment: dict = field(default_factory=dict)

    @property
    def seeds(self):
        exp = self.experiment
        if exp["seeds"] is not None:
            return [int(s) for s in _as_list(exp["seeds"])]
        return [int(exp["base_seed"]) + i for i in range(int(exp["trials"]))]

    @property
    def sample_sweep(self):
        sweep = _as_list(self.experiment["sample_sweep"])
        return [int(n) for n in sweep] if sweep else [self.opt.n_samples]

    @property
    def algorithms(self):
        algos = _as_list(self.experiment["algorithms"])
        return [str(a) for a in algos] if algos else [self.opt.algorithm]


def build(flat):
    """Validate a flat mapping and assemble the typed experiment configuration."""
    flat = dict(flat)
    known = ("env.", "opt.", "noise.", "planner.", "basis.", "experiment.", "manifest.")
    # manifest.* entries are provenance written alongside results; ignored here
    flat = {k: v for k, v in flat.items() if not k.startswith("manifest.")}
    for key in flat:
        if not key.startswith(known):
            raise ConfigurationError("unknown section", key=key)
    env_values = _section(flat, "env")
    kind = env_values.pop("kind", "nav2d")
    if kind not in ENV_KINDS:
        raise ConfigurationError(f"unknown environment {kind!r}", key="env.kind")
    env_cfg = _build(ENV_KINDS[kind][0], env_values, "env")

    basis = _section(flat, "basis")
    unknown = set(basis) - {"nodes", "dense"}
    if unknown:
        raise ConfigurationError("unknown key", key=f"basis.{sorted(unknown)[0]}")
    nodes = int(basis.get("nodes", 16))
    dense = int(basis.get("dense", 64))
    if nodes < 4:
        raise ConfigurationError("need at least 4 nodes", key="basis.nodes")
    if dense < nodes:
        raise ConfigurationError("must be >= basis.nodes", key="basis.dense")

    opt_values = _section(flat, "opt")
    opt_values.setdefault("dt", env_cfg.dt)
    opt = _build(OptimizerConfig, opt_values, "opt", _OPT_RENAMES)
    noise = _build(NoiseSchedule, _section(flat, "noise"), "noise")

    planner_values = _section(flat, "planner")
    planner_values["horizon"] = dense
    planner_values["n_nodes"] = nodes
    policy = planner_values.pop("policy", "heuristic")
    planner = _build(PlannerConfig, planner_values, "planner")

    exp = dict(EXPERIMENT_DEFAULTS)
    for key, value in _section(flat, "experiment").items():
        if key not in exp:
            raise ConfigurationError("unknown key", key=f"experiment.{key}")
        exp[key] = value
    exp["policy"] = policy
    if exp["mode"] not in ("optimize", "plan"):
        raise ConfigurationError("must be 'optimize' or 'plan'", key="experiment.mode")
    if exp["seeds"] is None and int(exp["trials"]) < 1:
        raise ConfigurationError("need at least one trial", key="experiment.trials")
    cfg = ExperimentConfig(flat, kind, env_cfg, opt, noise, planner, nodes, dense, exp)
    if not cfg.seeds:
        raise ConfigurationError("need at least one seed", key="experiment.seeds")
    for n in cfg.sample_sweep:
        if n < 1:
            raise ConfigurationError("sample counts must be positive", key="experiment.sample_sweep")
    for name in cfg.algorithms:
        parse_variant(name)
    return cfg


def parse_variant(name):
    """Split an algorithm label like ``avwbfo+ws`` into ``(algorithm, warm_start)``.

    ``+ws`` forces the warm-start policy on, ``-ws`` forces it off and no
    suffix keeps the configured planner setting (``None``).  The label
    ``policy`` runs the warm-start policy alone.
    """
    label = str(name).lower()
    if label == "policy":
        return "policy", True
    for suffix, warm in (("+ws", True), ("-ws", False)):
        if label.endswith(suffix):
            algo = label[: -len(suffix)]
            break
    else:
        algo, warm = label, None
    if algo not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {name!r}", key="opt.algorithm")
    return algo, warm
