"""JSON ingestion of system configs and experiment descriptors, and presets."""
from __future__ import annotations

import json
import os
from pathlib import Path

from .engine import Experiment
from .errors import DomainError
from .model import Action, SystemConfig, UserParams
from .sampling import Geometric, Poisson, UniformInt

PRESET_ENV = "LYAPIDX_PRESET_DIR"
_BUILTIN_PRESETS = Path(__file__).with_name("presets")


def preset_dir() -> Path:
    return Path(os.environ.get(PRESET_ENV) or _BUILTIN_PRESETS)


def _law_from_json(d):
    if d is None:
        return None
    law = d.get("law")
    if law == "geometric":
        return Geometric(float(d["mu"]))
    if law == "uniform":
        return UniformInt(int(d["lo"]), int(d["hi"]))
    if law == "poisson":
        return Poisson(float(d["mean"]))
    raise DomainError(f"unknown file length law {law!r}")


def _law_to_json(law):
    if law is None:
        return None
    if isinstance(law, Geometric):
        return {"law": "geometric", "mu": law.mu}
    if isinstance(law, UniformInt):
        return {"law": "uniform", "lo": law.lo, "hi": law.hi}
    return {"law": "poisson", "mean": law.mean}


def user_from_json(d: dict) -> UserParams:
    if "mu" in d:
        mean, packet = 1.0 / float(d["mu"]), True
    elif "mean_packets" in d:
        mean, packet = float(d["mean_packets"]), True
    elif "mean_file_bits" in d:
        mean, packet = float(d["mean_file_bits"]), False
    else:
        raise DomainError("user needs mu, mean_packets or mean_file_bits")
    actions = []
    for a in d["actions"]:
        if "success_prob" in a:
            actions.append(Action(int(a["id"]), float(a["power"]), float(a["success_prob"])))
        elif packet:
            actions.append(Action.geometric(int(a["id"]), float(a["power"]), 1.0 / mean,
                                            float(a["link_success"])))
        else:
            actions.append(Action.exponential(int(a["id"]), float(a["power"]), float(a["rate_bits"]),
                                              float(a["link_success"]), mean))
    if not any(a.id == 0 for a in actions):
        actions.append(Action.idle())
    return UserParams(lam=float(d["lambda"]), mean_file=mean, actions=tuple(actions),
                      weight=float(d.get("weight", 1.0)), packet_based=packet,
                      file_law=_law_from_json(d.get("file_length")))


def user_to_json(u: UserParams) -> dict:
    d = {"lambda": u.lam, ("mean_packets" if u.packet_based else "mean_file_bits"): u.mean_file,
         "weight": u.weight,
         "actions": [{"id": a.id, "power": a.power, "success_prob": a.success_prob} for a in u.actions]}
    if u.file_law is not None:
        d["file_length"] = _law_to_json(u.file_law)
    return d


def config_from_json(d: dict) -> SystemConfig:
    return SystemConfig(
        users=tuple(user_from_json(u) for u in d["users"]),
        servers=int(d["servers"]),
        power_budget=float(d["power_budget"]),
        tradeoff=float(d.get("tradeoff_v", 0.0)),
    )


def config_to_json(cfg: SystemConfig) -> dict:
    return {"users": [user_to_json(u) for u in cfg.users], "servers": cfg.servers,
            "power_budget": cfg.power_budget, "tradeoff_v": cfg.tradeoff}


def experiment_from_json(d: dict) -> Experiment:
    if "users" in d:
        d = {"config": d}
    return Experiment(
        config=config_from_json(d["config"]),
        policy=d.get("policy", "lyapunov"),
        horizon=int(d.get("horizon", 1_000_000)),
        trials=int(d.get("trials", 1)),
        file_length_mode=d.get("file_length_mode", "memoryless"),
        thinning=int(d.get("thinning", 0)),
    )


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_config(path) -> SystemConfig:
    d = load_json(path)
    return config_from_json(d["config"] if "config" in d else d)


def load_preset(name: str) -> dict:
    path = preset_dir() / f"{name}.json"
    if not path.exists():
        raise DomainError(f"no preset named {name!r} in {preset_dir()}")
    return load_json(path)


def preset_experiment(name: str) -> Experiment:
    return experiment_from_json(load_preset(name))


def preset_config(name: str) -> SystemConfig:
    return preset_experiment(name).config
