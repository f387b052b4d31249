"""Experiment campaigns: an INI config describing a sweep, per-trial rows, aggregates.

Config schema (comma-separated values in ``[generator]`` and for ``names`` /
``fitness`` in ``[algorithm]`` expand into a Cartesian sweep)::

    [generator]
    kind = path
    n = 16, 32, 64
    w = 1
    seed = 0                  ; instance seed (optional)

    [algorithm]
    names = semo
    fitness = f3

    [stopping]
    budget = 1000000
    until = zero_point        ; events that end a trial once all are seen
    trials = 50
    master_seed = 1
    approx =                  ; optional ratios, e.g. 3/2, 2

    [output]
    rows = rows.csv           ; optional
    json = result.json        ; optional
"""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .emo import ALGORITHMS, FITNESSES, StopSpec, run
from .generators import ConfigError, GeneratorSpec, generate
from .reducible import reducible_sequence
from .separator import brute_force_opt

ORACLE_LIMIT = 16


def _scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


@dataclass(frozen=True)
class CampaignConfig:
    kind: str
    sweep: dict[str, list]
    algorithms: tuple[str, ...]
    fitnesses: tuple[str, ...]
    budget: int
    until: tuple[str, ...]
    trials: int
    master_seed: int
    approx: tuple[Fraction, ...] = ()
    rows_path: str | None = None
    json_path: str | None = None

    def points(self) -> list[dict]:
        keys = sorted(self.sweep)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.sweep[k] for k in keys))]


def parse_config(text: str) -> CampaignConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for section in ("generator", "algorithm", "stopping"):
        if not cp.has_section(section):
            raise ConfigError(f"config lacks a [{section}] section")
    gen = dict(cp["generator"])
    kind = gen.pop("kind", None)
    if kind is None:
        raise ConfigError("[generator] needs a kind")
    sweep = {k: [_scalar(v) for v in _split(val)] for k, val in gen.items()}
    alg = cp["algorithm"]
    algorithms = tuple(_split(alg.get("names", "semo-alt")))
    fitnesses = tuple(_split(alg.get("fitness", "f2")))
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}")
    for f in fitnesses:
        if f not in FITNESSES:
            raise ConfigError(f"unknown fitness {f!r}")
    st = cp["stopping"]
    try:
        budget = st.getint("budget", 100_000)
        trials = st.getint("trials", 1)
        master = st.getint("master_seed", 0)
        approx = tuple(Fraction(r) for r in _split(st.get("approx", "")))
    except ValueError as exc:
        raise ConfigError(f"bad [stopping] value: {exc}") from None
    if budget < 0 or trials < 1 or master < 0:
        raise ConfigError("budget and master_seed must be >= 0 and trials >= 1")
    out = cp["output"] if cp.has_section("output") else {}
    return CampaignConfig(
        kind=kind,
        sweep=sweep,
        algorithms=algorithms,
        fitnesses=fitnesses,
        budget=budget,
        until=tuple(_split(st.get("until", ""))),
        trials=trials,
        master_seed=master,
        approx=approx,
        rows_path=out.get("rows") or None,
        json_path=out.get("json") or None,
    )


@dataclass(frozen=True)
class Row:
    trial: int
    kind: str
    params: tuple[tuple[str, object], ...]
    n: int
    w: int
    algorithm: str
    fitness: str
    seed: int
    iterations: int
    events: tuple[tuple[str, int | None], ...]

    def group(self) -> tuple:
        return (self.kind, self.params, self.algorithm, self.fitness)

    def hit(self, name: str) -> int | None:
        return dict(self.events).get(name)


@dataclass(frozen=True)
class Aggregate:
    group: tuple
    event: str
    trials: int
    hits: int
    median: float | None
    mean: float | None
    q1: float | None
    q3: float | None


def aggregate(rows: list[Row]) -> list[Aggregate]:
    """Statistics over trials that reached each event (misses are counted, not averaged)."""
    groups: dict[tuple, list[Row]] = {}
    for r in sorted(rows, key=lambda r: r.trial):
        groups.setdefault(r.group(), []).append(r)
    out = []
    for key, members in groups.items():
        names = sorted({e for r in members for e, _ in r.events})
        for name in names:
            hits = [r.hit(name) for r in members if r.hit(name) is not None]
            if hits:
                qs = statistics.quantiles(hits, n=4, method="inclusive") if len(hits) > 1 else [hits[0]] * 3
                stats = (float(statistics.median(hits)), float(statistics.fmean(hits)), float(qs[0]), float(qs[2]))
            else:
                stats = (None, None, None, None)
            out.append(Aggregate(key, name, len(members), len(hits), *stats))
    return out


@dataclass
class CampaignResult:
    rows: list[Row]
    aggregates: list[Aggregate] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.trial)
        if not self.aggregates:
            self.aggregates = aggregate(self.rows)

    def __eq__(self, other):
        return isinstance(other, CampaignResult) and self.rows == other.rows and self.aggregates == other.aggregates

    def medians(self, event: str, key: str) -> dict:
        """Median hitting time of ``event`` per value of sweep parameter ``key``."""
        out = {}
        for a in self.aggregates:
            if a.event == event:
                out[dict(a.group[1])[key]] = a.median
        return out

    # --- serialisation ------------------------------------------------

    def to_csv(self) -> str:
        names = sorted({e for r in self.rows for e, _ in r.events})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["trial", "kind", "params", "n", "w", "algorithm", "fitness", "seed", "iterations"]
            + [f"event:{e}" for e in names]
        )
        for r in self.rows:
            ev = dict(r.events)
            writer.writerow(
                [r.trial, r.kind, json.dumps(dict(r.params), sort_keys=True), r.n, r.w,
                 r.algorithm, r.fitness, r.seed, r.iterations]
                + ["-" if e not in ev else "" if ev[e] is None else ev[e] for e in names]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> CampaignResult:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        names = [h[len("event:"):] for h in header[9:]]
        rows = []
        for rec in reader:
            events = tuple(
                (name, None if cell == "" else int(cell))
                for name, cell in zip(names, rec[9:])
                if cell != "-"
            )
            rows.append(
                Row(int(rec[0]), rec[1], tuple(sorted(json.loads(rec[2]).items())), int(rec[3]),
                    int(rec[4]), rec[5], rec[6], int(rec[7]), int(rec[8]), events)
            )
        return cls(rows)

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [
                    {
                        "trial": r.trial, "kind": r.kind, "params": dict(r.params), "n": r.n, "w": r.w,
                        "algorithm": r.algorithm, "fitness": r.fitness, "seed": r.seed,
                        "iterations": r.iterations, "events": dict(r.events),
                    }
                    for r in self.rows
                ],
                "aggregates": [
                    {
                        "kind": a.group[0], "params": dict(a.group[1]), "algorithm": a.group[2],
                        "fitness": a.group[3], "event": a.event, "trials": a.trials, "hits": a.hits,
                        "median": a.median, "mean": a.mean, "q1": a.q1, "q3": a.q3,
                    }
                    for a in self.aggregates
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> CampaignResult:
        data = json.loads(text)
        rows = [
            Row(d["trial"], d["kind"], tuple(sorted(d["params"].items())), d["n"], d["w"],
                d["algorithm"], d["fitness"], d["seed"], d["iterations"],
                tuple(sorted(d["events"].items())))
            for d in data["rows"]
        ]
        aggs = [
            Aggregate((d["kind"], tuple(sorted(d["params"].items())), d["algorithm"], d["fitness"]),
                      d["event"], d["trials"], d["hits"], d["median"], d["mean"], d["q1"], d["q3"])
            for d in data["aggregates"]
        ]
        return cls(rows, aggs)


@dataclass(frozen=True)
class _Task:
    trial: int
    kind: str
    params: tuple
    algorithm: str
    fitness: str
    budget: int
    until: tuple[str, ...]
    approx: tuple[Fraction, ...]
    master_seed: int


def _needs_opt(event: str) -> bool:
    return event in ("optimum", "degree_reduced_point") or event.startswith("approx(")


def _run_task(task: _Task) -> Row:
    params = dict(task.params)
    seed = int(params.pop("seed", task.master_seed))
    inst, cert = generate(GeneratorSpec(task.kind, params, seed))
    opt = cert.opt
    if opt is None and inst.n <= ORACLE_LIMIT:
        opt = brute_force_opt(inst).opt
    heads = None
    if "heads_point" in task.until:
        heads = set().union(*(p.head for p in reducible_sequence(inst)))
    # without a known OPT the optimum and approximation events cannot be judged
    until = tuple(e for e in task.until if opt is not None or not _needs_opt(e))
    trace = run(
        inst, task.fitness, task.algorithm, task.master_seed, StopSpec(task.budget, until),
        trial=task.trial, opt=opt, heads=heads, approx=task.approx,
    )
    names = set(until) | {f"approx({r})" for r in task.approx if opt is not None}
    events = tuple(sorted((name, trace.hit(name)) for name in names))
    return Row(task.trial, task.kind, task.params, inst.n, inst.w, task.algorithm, task.fitness,
               task.master_seed, trace.iterations, events)


def campaign(config: CampaignConfig, workers: int = 1) -> CampaignResult:
    """Run every (sweep point, algorithm, fitness, trial) combination.

    Trial ids are assigned in sweep order before anything runs, and each trial
    draws from the stream (master_seed, trial id), so results do not depend on
    ``workers`` or on completion order.
    """
    tasks = []
    for point in config.points():
        params = tuple(sorted(point.items()))
        for algorithm in config.algorithms:
            for fitness in config.fitnesses:
                for _ in range(config.trials):
                    tasks.append(_Task(len(tasks), config.kind, params, algorithm, fitness,
                                       config.budget, config.until, config.approx, config.master_seed))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = [_run_task(t) for t in tasks]
    return CampaignResult(rows)


def write_outputs(config: CampaignConfig, result: CampaignResult, base: Path | None = None) -> None:
    base = base or Path.cwd()
    if config.rows_path:
        (base / config.rows_path).write_text(result.to_csv())
    if config.json_path:
        (base / config.json_path).write_text(result.to_json())
