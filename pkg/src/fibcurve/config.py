"""Pipeline configuration: defaults, key=value file parsing, hashing."""

import hashlib
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    bound_start: int | None = None  # default: max(2 ln f_q, 30)
    bound_cap: int = 1024
    rm_witnesses: int = 20
    hilbert_method: str = "analytic"  # "analytic" | "crt"
    max_iterations: int = 64  # split discriminants attempted, not screened
    max_screened: int = 4096

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def config_hash(self):
        text = "\n".join(f"{k}={v}" for k, v in sorted(self.to_dict().items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _coerce(value):
    v = value.strip()
    if v.lower() in ("true", "false"):
        return v.lower() == "true"
    if v.lower() in ("none", "null", ""):
        return None
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def load_config(path=None, overrides=None):
    """key=value text file ('#' comments allowed) plus overrides."""
    values = {}
    if path:
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"bad config line: {raw!r}")
                key, _, val = line.partition("=")
                values[key.strip()] = _coerce(val)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    allowed = {f.name for f in fields(PipelineConfig)}
    unknown = set(values) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**values)
