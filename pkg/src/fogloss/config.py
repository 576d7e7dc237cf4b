"""Run configuration: line-based `key = value` files, fail-closed.

`#` starts a comment anywhere on a line.  The key set is fixed; unknown
keys, duplicates, and malformed lines raise ParseError with the line
number, while missing or out-of-range values raise ValidationError
naming the field.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .params import SystemParams
from .ring import RingParams

MODES = ("analytic", "oracle", "simulate", "exact", "ring", "check", "sweep")

SYSTEM_KEYS = ("lambda1", "lambda2", "mu1", "mu2", "c1", "c2", "p1", "p2")
SWEEP_KEYS = ("sweep.param", "sweep.from", "sweep.to", "sweep.steps")
KNOWN_KEYS = SYSTEM_KEYS + SWEEP_KEYS + (
    "mode", "oracle.M", "quad.tol", "sim.N", "sim.horizon", "sim.warmup",
    "sim.seed", "ring.nodes", "out",
)

# fields a sweep may range over
SWEEPABLE = SYSTEM_KEYS


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams | None = None
    ring: RingParams | None = None
    sweep: SweepSpec | None = None
    oracle_M: int = 160
    tol_quad: float = 1e-10
    n_values: tuple[int, ...] = ()
    horizon: float = 1e4
    warmup: float | None = None
    seed: int = 12345
    out: str | None = None


def _raw_pairs(text: str) -> dict[str, str]:
    seen: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected `key = value`, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        if not value:
            raise ParseError(f"empty value for {key!r}", line=lineno)
        seen[key] = value
    return seen


def _as_float(raw: dict[str, str], key: str) -> float:
    try:
        return float(raw[key])
    except ValueError:
        raise ValidationError(key, f"{key}: not a number: {raw[key]!r}") from None


def _as_int(raw: dict[str, str], key: str) -> int:
    v = _as_float(raw, key)
    if v != int(v):
        raise ValidationError(key, f"{key}: expected an integer, got {raw[key]!r}")
    return int(v)


def _parse_nodes(value: str) -> RingParams:
    nodes = []
    for part in value.split(";"):
        part = part.strip()
        if not part:
            continue
        fields = [f.strip() for f in part.split(",")]
        if len(fields) != 4:
            raise ValidationError(
                "ring.nodes", f"ring.nodes: expected `lambda,mu,c,p`, got {part!r}")
        try:
            nodes.append(tuple(float(f) for f in fields))
        except ValueError:
            raise ValidationError(
                "ring.nodes", f"ring.nodes: not a number in {part!r}") from None
    return RingParams(tuple(nodes))


def _parse_n_values(value: str) -> tuple[int, ...]:
    out = []
    for part in value.split(","):
        try:
            v = float(part.strip())
        except ValueError:
            raise ValidationError("sim.N", f"sim.N: not a number: {part.strip()!r}") from None
        if v != int(v) or int(v) < 1:
            raise ValidationError("sim.N", f"sim.N: scales must be positive integers, got {part.strip()!r}")
        out.append(int(v))
    if not out:
        raise ValidationError("sim.N", "sim.N: empty list")
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config file; see the module docstring for the grammar."""
    raw = _raw_pairs(text)

    if "mode" not in raw:
        raise ValidationError("mode")
    mode = raw["mode"]
    if mode not in MODES:
        raise ValidationError("mode", f"mode: expected one of {', '.join(MODES)}; got {mode!r}")

    params = None
    if mode == "ring":
        if "ring.nodes" not in raw:
            raise ValidationError("ring.nodes")
        for key in SYSTEM_KEYS + SWEEP_KEYS:
            if key in raw:
                raise ValidationError(key, f"{key}: not valid with mode=ring")
        ring = _parse_nodes(raw["ring.nodes"])
    else:
        ring = None
        if "ring.nodes" in raw:
            raise ValidationError("ring.nodes", "ring.nodes: only valid with mode=ring")
        for key in SYSTEM_KEYS:
            if key not in raw:
                raise ValidationError(key)
        params = SystemParams(*(_as_float(raw, key) for key in SYSTEM_KEYS))

    sweep = None
    if mode in ("sweep", "check"):
        have = [k for k in SWEEP_KEYS if k in raw]
        if mode == "sweep" and not have:
            raise ValidationError("sweep.param", "mode=sweep needs a sweep axis")
        if have:
            for key in SWEEP_KEYS:
                if key not in raw:
                    raise ValidationError(key)
            axis = raw["sweep.param"]
            if axis not in SWEEPABLE:
                raise ValidationError(
                    "sweep.param", f"sweep.param: expected one of {', '.join(SWEEPABLE)}")
            steps = _as_int(raw, "sweep.steps")
            if steps < 2:
                raise ValidationError("sweep.steps", "sweep.steps: need at least 2")
            start = _as_float(raw, "sweep.from")
            stop = _as_float(raw, "sweep.to")
            lo, hi = min(start, stop), max(start, stop)
            if axis in ("p1", "p2"):
                if lo < 0 or hi > 1:
                    raise ValidationError("sweep.from", f"sweep over {axis} must stay in [0, 1]")
            elif lo <= 0:
                raise ValidationError("sweep.from", f"sweep over {axis} must stay positive")
            sweep = SweepSpec(param=axis, start=start, stop=stop, steps=steps)
    else:
        for key in SWEEP_KEYS:
            if key in raw:
                raise ValidationError(key, f"{key}: only valid with mode=sweep or mode=check")

    oracle_M = _as_int(raw, "oracle.M") if "oracle.M" in raw else 160
    if oracle_M < 8:
        raise ValidationError("oracle.M", "oracle.M: truncation must be at least 8")
    tol_quad = _as_float(raw, "quad.tol") if "quad.tol" in raw else 1e-10
    if not tol_quad > 0:
        raise ValidationError("quad.tol", "quad.tol: must be positive")
    n_values = _parse_n_values(raw["sim.N"]) if "sim.N" in raw else ()
    horizon = _as_float(raw, "sim.horizon") if "sim.horizon" in raw else 1e4
    if not horizon > 0:
        raise ValidationError("sim.horizon", "sim.horizon: must be positive")
    warmup = _as_float(raw, "sim.warmup") if "sim.warmup" in raw else None
    if warmup is not None and not 0 <= warmup < horizon:
        raise ValidationError("sim.warmup", "sim.warmup: need 0 <= warmup < horizon")
    seed = _as_int(raw, "sim.seed") if "sim.seed" in raw else 12345

    return RunConfig(mode=mode, params=params, ring=ring, sweep=sweep,
                     oracle_M=oracle_M, tol_quad=tol_quad, n_values=n_values,
                     horizon=horizon, warmup=warmup, seed=seed,
                     out=raw.get("out"))
