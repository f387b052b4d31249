"""Seeded instance generators with certificates.

Kinds and their parameters (all take ``w``; ``seed`` lives on the spec):

``planted``   separator_size, components_per_separator, component_size (<= w),
              attachment (separator vertices each component touches, default 1),
              separator_p (edge probability among separator vertices, default 0)
``gnp``       n, p
``path``      n
``grid``      rows, cols
``crown``     head_size, crown_components, crown_size (<= w), attachment (default 1),
              rest_n (extra vertices, default 0), rest_p (default 0.3)
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any

from .graph import Graph
from .lp import lp_value
from .reducible import ReduciblePair, verify_reducible_pair
from .separator import Instance

KINDS = ("planted", "gnp", "path", "grid", "crown")
_LP_LIMIT = 30


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict[str, Any]
    seed: int = 0


@dataclass(frozen=True)
class Certificate:
    """Known bounds on OPT; ``opt`` is set when they meet.  ``pair`` for crown instances."""

    lower: int | None
    upper: int | None
    pair: ReduciblePair | None = None

    @property
    def opt(self) -> int | None:
        if self.lower is not None and self.lower == self.upper:
            return self.lower
        return None


def _get(params: dict, key: str, kind: type, default=None):
    if key not in params:
        if default is None:
            raise ConfigError(f"missing generator parameter {key!r}")
        return default
    try:
        return kind(params[key])
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be {kind.__name__}, got {params[key]!r}") from None


def _positive(name: str, value: int, allow_zero: bool = False) -> int:
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"parameter {name!r} must be {'non-negative' if allow_zero else 'positive'}")
    return value


def _random_tree(rnd: random.Random, vertices: list[int]) -> list[tuple[int, int]]:
    return [(vertices[i], vertices[rnd.randrange(i)]) for i in range(1, len(vertices))]


def _lp_lower(inst: Instance) -> int | None:
    if inst.n > _LP_LIMIT:
        return None
    return math.ceil(lp_value(inst).value)


def _planted(p: dict, w: int, rnd: random.Random) -> tuple[Instance, Certificate]:
    s = _positive("separator_size", _get(p, "separator_size", int))
    per = _positive("components_per_separator", _get(p, "components_per_separator", int))
    size = _positive("component_size", _get(p, "component_size", int))
    attach = _positive("attachment", _get(p, "attachment", int, 1))
    sep_p = _get(p, "separator_p", float, 0.0)
    if size > w:
        raise ConfigError(f"component_size {size} exceeds W={w}")
    if attach > s:
        raise ConfigError(f"attachment {attach} exceeds separator_size {s}")
    edges = []
    n = s
    for a in range(s):
        for b in range(a + 1, s):
            if rnd.random() < sep_p:
                edges.append((a, b))
    for owner in range(s):
        for _ in range(per):
            comp = list(range(n, n + size))
            n += size
            edges += _random_tree(rnd, comp)
            others = [b for b in range(s) if b != owner]
            for a in [owner] + rnd.sample(others, attach - 1):
                edges.append((a, rnd.choice(comp)))
    inst = Instance(Graph.from_edges(n, edges), w)
    heads = range(s)
    pair = verify_reducible_pair(inst, heads, range(s, n))
    if pair is not None and pair.strict:
        # the whole instance is a strictly reducible pair, so OPT = s exactly
        return inst, Certificate(s, s, pair)
    return inst, Certificate(_lp_lower(inst), s)


def _gnp(p: dict, w: int, rnd: random.Random) -> tuple[Instance, Certificate]:
    n = _positive("n", _get(p, "n", int), allow_zero=True)
    prob = _get(p, "p", float)
    if not 0 <= prob <= 1:
        raise ConfigError("edge probability p must lie in [0, 1]")
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rnd.random() < prob]
    inst = Instance(Graph.from_edges(n, edges), w)
    if not edges:
        return inst, Certificate(0, 0)
    return inst, Certificate(_lp_lower(inst), None)


def _path(p: dict, w: int, rnd: random.Random) -> tuple[Instance, Certificate]:
    n = _positive("n", _get(p, "n", int), allow_zero=True)
    inst = Instance(Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)]), w)
    opt = n // (w + 1)
    return inst, Certificate(opt, opt)


def _grid(p: dict, w: int, rnd: random.Random) -> tuple[Instance, Certificate]:
    rows = _positive("rows", _get(p, "rows", int))
    cols = _positive("cols", _get(p, "cols", int))
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    inst = Instance(Graph.from_edges(rows * cols, edges), w)
    return inst, Certificate(_lp_lower(inst), None)


def _crown(p: dict, w: int, rnd: random.Random) -> tuple[Instance, Certificate]:
    h = _positive("head_size", _get(p, "head_size", int))
    count = _positive("crown_components", _get(p, "crown_components", int))
    size = _positive("crown_size", _get(p, "crown_size", int))
    attach = _positive("attachment", _get(p, "attachment", int, 1))
    rest_n = _positive("rest_n", _get(p, "rest_n", int, 0), allow_zero=True)
    rest_p = _get(p, "rest_p", float, 0.3)
    if size > w:
        raise ConfigError(f"crown_size {size} exceeds W={w}")
    if attach > h:
        raise ConfigError(f"attachment {attach} exceeds head_size {h}")
    edges = []
    n = h
    for i in range(count):
        comp = list(range(n, n + size))
        n += size
        edges += _random_tree(rnd, comp)
        owner = i % h
        others = [b for b in range(h) if b != owner]
        for a in [owner] + rnd.sample(others, attach - 1):
            edges.append((a, rnd.choice(comp)))
    crown = range(h, n)
    rest = list(range(n, n + rest_n))
    n += rest_n
    for i, a in enumerate(rest):
        for b in rest[i + 1:]:
            if rnd.random() < rest_p:
                edges.append((a, b))
        if rnd.random() < rest_p:
            edges.append((a, rnd.randrange(h)))
    inst = Instance(Graph.from_edges(n, edges), w)
    pair = verify_reducible_pair(inst, range(h), crown)
    if pair is None or not pair.strict:
        raise ConfigError(
            f"{count} crown components of size {size} cannot give {h} heads "
            f"{2 * w - 1} units each plus one spare"
        )
    upper = h + rest_n
    return inst, Certificate(h if rest_n == 0 else _lp_lower(inst), upper, pair)


_BUILDERS = {"planted": _planted, "gnp": _gnp, "path": _path, "grid": _grid, "crown": _crown}


def generate(spec: GeneratorSpec) -> tuple[Instance, Certificate]:
    if spec.kind not in _BUILDERS:
        raise ConfigError(f"unknown generator kind {spec.kind!r}; expected one of {KINDS}")
    w = _get(spec.params, "w", int, 1)
    if w < 1:
        raise ConfigError(f"W must be >= 1, got {w}")
    rnd = random.Random(f"{spec.kind}:{spec.seed}")
    return _BUILDERS[spec.kind](spec.params, w, rnd)
