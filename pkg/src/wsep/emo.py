"""Global SEMO and Global SEMO Alt for the W-separator problem.

Three fitness functions, all minimised componentwise:

* ``f1``: (|X1|, |u(X)|, -sum of degrees over X1)
* ``f2``: (|X1|, |u(X)|, LP(G[u(X)]))
* ``f3``: (|X1|, LP(G[u(X)]))

A run keeps a Pareto archive with one search point per fitness vector and
records the first iteration at which certain milestone points enter it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .graph import iter_bits
from .lp import LpMemo
from .rng import Stream
from .separator import Instance, SearchPoint, uncovered_mask

FITNESSES = ("f1", "f2", "f3")
ALGORITHMS = ("semo", "semo-alt")


@dataclass(frozen=True)
class FitnessVector:
    fitness: str
    values: tuple

    @property
    def ones(self) -> int:
        return self.values[0]

    @property
    def uncovered(self) -> int | None:
        return None if self.fitness == "f3" else self.values[1]

    @property
    def third(self):
        return self.values[-1]

    def __str__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.values) + ")"


def _check_fitness(fitness: str) -> None:
    if fitness not in FITNESSES:
        raise ValueError(f"unknown fitness {fitness!r}; expected one of {FITNESSES}")


def weakly_dominates(a: FitnessVector, b: FitnessVector) -> bool:
    if a.fitness != b.fitness:
        raise ValueError(f"cannot compare {a.fitness} vector with {b.fitness} vector")
    return all(x <= y for x, y in zip(a.values, b.values))


def dominates(a: FitnessVector, b: FitnessVector) -> bool:
    return weakly_dominates(a, b) and a.values != b.values


class Evaluator:
    """Fitness of search points for one instance, sharing an LP memo keyed by u(X)."""

    def __init__(self, inst: Instance, fitness: str, memo: LpMemo | None = None):
        _check_fitness(fitness)
        self.inst = inst
        self.fitness = fitness
        self.memo = memo if memo is not None else LpMemo(inst)
        self.degree = [inst.graph.degree(v) for v in range(inst.n)]

    def evaluate_mask(self, mask: int) -> tuple[FitnessVector, int]:
        u = uncovered_mask(self.inst, mask)
        ones = mask.bit_count()
        if self.fitness == "f1":
            deg = sum(self.degree[v] for v in iter_bits(mask))
            vals = (ones, u.bit_count(), -deg)
        elif self.fitness == "f2":
            vals = (ones, u.bit_count(), self.memo.value(u))
        else:
            vals = (ones, self.memo.value(u))
        return FitnessVector(self.fitness, vals), u


def evaluate(inst: Instance, fitness: str, x: SearchPoint, memo: LpMemo | None = None) -> FitnessVector:
    if x.n != inst.n:
        raise ValueError(f"search point has length {x.n}, graph has {inst.n} vertices")
    return Evaluator(inst, fitness, memo).evaluate_mask(x.mask)[0]


class Population:
    """Pareto archive: fitness vector -> search point (plus its uncovered mask)."""

    def __init__(self, fitness: str | None = None):
        self.fitness = fitness
        self.archive: dict[FitnessVector, SearchPoint] = {}
        self._uncovered: dict[FitnessVector, int] = {}
        self._keys: list[FitnessVector] | None = None
        self.version = 0  # bumped on every accepted insert

    def __len__(self) -> int:
        return len(self.archive)

    def __iter__(self):
        return iter(self.archive.items())

    def keys(self) -> list[FitnessVector]:
        if self._keys is None:
            self._keys = list(self.archive)
        return self._keys

    def uncovered_of(self, fx: FitnessVector) -> int | None:
        return self._uncovered.get(fx)

    def insert(self, x: SearchPoint, fx: FitnessVector, u: int | None = None) -> bool:
        """Reject if a stored vector dominates ``fx``; otherwise insert and drop every
        stored vector that ``fx`` weakly dominates (an equal vector is replaced)."""
        if self.fitness is not None and fx.fitness != self.fitness:
            raise ValueError(f"archive holds {self.fitness} vectors, got {fx.fitness}")
        for z in self.archive:
            if dominates(z, fx):
                return False
        for z in [z for z in self.archive if weakly_dominates(fx, z)]:
            del self.archive[z]
            self._uncovered.pop(z, None)
        self.archive[fx] = x
        if u is not None:
            self._uncovered[fx] = u
        self._keys = None
        self.version += 1
        return True

    def is_pairwise_nondominated(self) -> bool:
        keys = list(self.archive)
        return not any(dominates(a, b) for a in keys for b in keys if a is not b)


def archive_insert(pop: Population, x: SearchPoint, fx: FitnessVector) -> Population:
    pop.insert(x, fx)
    return pop


def population_bound(n: int, fitness: str) -> int:
    return n + 1 if fitness == "f3" else (n + 1) ** 2


def standard_mutation(rng: Stream, x: SearchPoint) -> SearchPoint:
    if x.n == 0:
        return x
    return SearchPoint(x.mask ^ rng.bernoulli_mask((1 << x.n) - 1, 1 / x.n), x.n)


def alt_mutation(rng: Stream, inst: Instance, x: SearchPoint, u: int | None = None) -> SearchPoint:
    """Flip half of u(X) (b=2), half of X1 (b=1), or fall back to standard mutation."""
    if u is None:
        u = uncovered_mask(inst, x.mask)
    b = rng.below(3)
    if b == 2 and u:
        return SearchPoint(x.mask ^ rng.bernoulli_mask(u, 0.5), x.n)
    if b == 1 and x.mask:
        return SearchPoint(x.mask ^ rng.bernoulli_mask(x.mask, 0.5), x.n)
    return standard_mutation(rng, x)


@dataclass(frozen=True)
class StopSpec:
    """Iteration budget plus events that end the run once all have been seen."""

    budget: int
    until: tuple[str, ...] = ()

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be non-negative")


@dataclass(frozen=True)
class Event:
    name: str
    iteration: int
    point: str


@dataclass
class RunTrace:
    seed: int
    trial: int
    fitness: str
    algorithm: str
    budget: int
    iterations: int = 0
    events: list[Event] = field(default_factory=list)
    final_population: Population | None = None

    def event(self, name: str) -> Event | None:
        for e in self.events:
            if e.name == name:
                return e
        return None

    def hit(self, name: str) -> int | None:
        e = self.event(name)
        return None if e is None else e.iteration

    def best_feasible(self) -> SearchPoint | None:
        best = None
        for fx, x in self.final_population or ():
            if self.final_population.uncovered_of(fx) == 0 and (best is None or x.mask.bit_count() < best.mask.bit_count()):
                best = x
        return best

    def to_json(self) -> dict:
        pop = self.final_population
        return {
            "config": {"fitness": self.fitness, "algorithm": self.algorithm, "budget": self.budget},
            "seed": self.seed,
            "trial": self.trial,
            "iterations": self.iterations,
            "events": [{"name": e.name, "iteration": e.iteration, "point": e.point} for e in self.events],
            "archive": [
                {"vector": [str(v) for v in fx.values], "point": str(x)} for fx, x in (pop or ())
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def approx_event(ratio: Fraction) -> str:
    return f"approx({Fraction(ratio)})"


class _EventTracker:
    def __init__(
        self,
        inst: Instance,
        ev: Evaluator,
        opt: int | None,
        heads: int | None,
        ratios: Iterable[Fraction],
        track: Iterable[str] | None,
    ):
        self.inst = inst
        self.ev = ev
        self.opt = opt
        self.heads = heads
        self.ratios = [Fraction(r) for r in ratios]
        names = {"zero_point", "feasible_point"}
        if opt is not None:
            names |= {"optimum", "degree_reduced_point"} | {approx_event(r) for r in self.ratios}
        if heads is not None:
            names.add("heads_point")
        if track is not None:
            names |= set(track)
        self.active = names
        self.seen: set[str] = set()
        self._lp_full: Fraction | None = None

    def _lp_equality(self, mask: int, u: int) -> bool:
        memo = self.ev.memo
        if self._lp_full is None:
            self._lp_full = memo.value(self.inst.graph.full_mask)
        return mask.bit_count() + memo.value(u) == self._lp_full and memo.has_no_persistent_ones(u)

    def _degree_reduced(self, mask: int, u: int) -> bool:
        bound = self.opt + self.inst.w
        deg = self.ev.degree
        return all(deg[v] > bound for v in iter_bits(mask)) and all(deg[v] <= bound for v in iter_bits(u))

    def holds(self, name: str, mask: int, u: int) -> bool:
        ones = mask.bit_count()
        if name == "zero_point":
            return mask == 0
        if name == "feasible_point":
            return u == 0
        if name == "optimum":
            return u == 0 and ones == self.opt
        if name.startswith("approx("):
            return u == 0 and ones <= Fraction(name[7:-1]) * self.opt
        if name == "degree_reduced_point":
            return self._degree_reduced(mask, u)
        if name == "heads_point":
            return mask == self.heads
        if name == "lp_equality_point":
            return self._lp_equality(mask, u)
        raise ValueError(f"unknown event {name!r}")

    def check(self, trace: RunTrace, iteration: int, x: SearchPoint, u: int) -> None:
        for name in sorted(self.active - self.seen):
            if self.holds(name, x.mask, u):
                self.seen.add(name)
                trace.events.append(Event(name, iteration, str(x)))


Observer = Callable[[int, Population, RunTrace], None]


def run(
    inst: Instance,
    fitness: str,
    algorithm: str,
    seed: int,
    stop: StopSpec,
    *,
    trial: int = 0,
    opt: int | None = None,
    heads: Iterable[int] | None = None,
    approx: Iterable[Fraction] = (),
    track: Iterable[str] | None = None,
    observer: Observer | None = None,
    memo: LpMemo | None = None,
) -> RunTrace:
    """One run of Global SEMO (``semo``) or Global SEMO Alt (``semo-alt``).

    ``opt`` enables the optimum, approximation and degree milestones; ``heads``
    (a vertex set) enables the heads milestone; ``track`` adds events such as
    ``lp_equality_point`` that are expensive to check.  ``observer`` is called
    after every iteration with (iteration, population, trace).
    """
    _check_fitness(fitness)
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    for name in stop.until:
        if name not in ("zero_point", "feasible_point", "optimum", "degree_reduced_point",
                        "heads_point", "lp_equality_point") and not name.startswith("approx("):
            raise ValueError(f"unknown event {name!r}")
    rng = Stream(seed, trial)
    ev = Evaluator(inst, fitness, memo)
    heads_mask = None if heads is None else sum(1 << v for v in set(heads))
    tracker = _EventTracker(inst, ev, opt, heads_mask, approx, tuple(track or ()) + stop.until)
    trace = RunTrace(seed, trial, fitness, algorithm, stop.budget)
    pop = Population(fitness)
    n = inst.n
    targets = set(stop.until)

    x = SearchPoint(rng.bits(n), n)
    fx, u = ev.evaluate_mask(x.mask)
    pop.insert(x, fx, u)
    tracker.check(trace, 0, x, u)
    if observer is not None:
        observer(0, pop, trace)

    t = 0
    while t < stop.budget and not (targets and targets <= tracker.seen):
        t += 1
        keys = pop.keys()
        key = keys[rng.below(len(keys))]
        parent = pop.archive[key]
        if algorithm == "semo":
            child = standard_mutation(rng, parent)
        else:
            child = alt_mutation(rng, inst, parent, pop.uncovered_of(key))
        fc, uc = ev.evaluate_mask(child.mask)
        if pop.insert(child, fc, uc):
            tracker.check(trace, t, child, uc)
        if observer is not None:
            observer(t, pop, trace)
    trace.iterations = t
    trace.final_population = pop
    return trace
