"""Selection of informative level-2 regions by harmony search.

Two variants over the 16 local regions:

* ``enhanced`` - per-cardinality search (k = 1..15). Memory consideration
  draws regions from a roulette wheel whose sectors are the singleton
  fitness values, pitch adjustment nudges a region index by up to ``bw``.
* ``basic`` - plain harmony search over 16-bit inclusion vectors at the
  same improvisation budget, for baseline comparison.

Fitness of a candidate subset is the validation accuracy of a classifier
trained on the global features plus the subset's local features; values
are memoized per subset so each distinct subset trains exactly once.
"""

from __future__ import annotations

import threading
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .classifier import ClassifierConfig, accuracy_of, train
from .features import subset_columns
from .harmony import HSParams
from .partition import LEVEL2_COUNT

MAX_SUBSET_RETRIES = 32
ALL_REGIONS = tuple(range(LEVEL2_COUNT))

RegionSubset = tuple[int, ...]


def canonical(indices) -> RegionSubset:
    """Sorted duplicate-free tuple of region indices, validated to 0..15."""
    subset = tuple(sorted(set(int(i) for i in indices)))
    if subset and (subset[0] < 0 or subset[-1] >= LEVEL2_COUNT):
        raise ValueError(f"region indices must lie in 0..{LEVEL2_COUNT - 1}: {subset}")
    return subset


@dataclass
class FitnessContext:
    """Training/validation features in the full 84-column layout plus the
    classifier configuration, with a per-subset fitness memo."""

    train_matrix: np.ndarray
    train_labels: np.ndarray
    val_matrix: np.ndarray
    val_labels: np.ndarray
    config: ClassifierConfig
    seed: int
    evaluations: int = 0
    cache_hits: int = 0
    _cache: dict[RegionSubset, float] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def counters(self) -> tuple[int, int]:
        return self.evaluations, self.cache_hits


def region_fitness(subset, context: FitnessContext) -> float:
    """Validation accuracy of the classifier on global + subset features."""
    key = canonical(subset)
    with context._lock:
        if key in context._cache:
            context.cache_hits += 1
            return context._cache[key]
    cols = subset_columns(key)
    model = train(context.train_matrix[:, cols], context.train_labels, context.config, context.seed)
    value = accuracy_of(model, context.val_matrix[:, cols], context.val_labels)
    with context._lock:
        if key not in context._cache:
            context._cache[key] = value
            context.evaluations += 1
        else:
            context.cache_hits += 1
    return value


@dataclass(frozen=True)
class RouletteWheel:
    weights: np.ndarray
    cumulative: np.ndarray
    uniform_fallback: bool = False

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])


def build_roulette(context: FitnessContext) -> RouletteWheel:
    """One sector per local region, sized by its singleton fitness."""
    weights = np.array([region_fitness((i,), context) for i in ALL_REGIONS], dtype=np.float64)
    fallback = False
    if weights.sum() <= 0.0:
        warnings.warn("all singleton fitness values are zero; falling back to a uniform wheel")
        weights = np.ones(LEVEL2_COUNT)
        fallback = True
    return RouletteWheel(weights=weights, cumulative=np.cumsum(weights), uniform_fallback=fallback)


def spin(wheel: RouletteWheel, rng: np.random.Generator) -> int:
    """Fitness-proportional region draw via a single uniform variate."""
    u = rng.random() * wheel.total
    return int(np.searchsorted(wheel.cumulative, u, side="right"))


def _spin_restricted(wheel: RouletteWheel, allowed: tuple[int, ...], rng: np.random.Generator) -> int:
    weights = wheel.weights[list(allowed)]
    total = float(weights.sum())
    if total <= 0.0:
        return allowed[int(rng.integers(len(allowed)))]
    u = rng.random() * total
    return allowed[int(np.searchsorted(np.cumsum(weights), u, side="right"))]


def improvise_subset(memory: list[RegionSubset], wheel: RouletteWheel, params: HSParams,
                     rng: np.random.Generator, k: int) -> RegionSubset:
    """Improvise a subset of exactly k distinct regions.

    Each slot draws from the roulette wheel restricted to the regions present
    in memory (probability hmcr) or uniformly from all 16, then may pitch
    adjust the index by +-delta, delta in 1..bw. Colliding slots are redrawn
    a bounded number of times, then filled by wheel-weight order.
    """
    if not 1 <= k <= LEVEL2_COUNT - 1:
        raise ValueError(f"k must be in 1..{LEVEL2_COUNT - 1}, got {k}")
    pool = tuple(sorted({i for subset in memory for i in subset}))
    bw = max(1, int(params.bw))
    fallback_order = sorted(ALL_REGIONS, key=lambda i: (-wheel.weights[i], i))

    chosen: set[int] = set()
    for _ in range(k):
        picked = -1
        for _ in range(MAX_SUBSET_RETRIES):
            if rng.random() <= params.hmcr and pool:
                idx = _spin_restricted(wheel, pool, rng)
            else:
                idx = int(rng.integers(LEVEL2_COUNT))
            if rng.random() <= params.par:
                delta = int(rng.integers(1, bw + 1))
                if rng.random() < 0.5:
                    delta = -delta
                idx = min(LEVEL2_COUNT - 1, max(0, idx + delta))
            if idx not in chosen:
                picked = idx
                break
        if picked < 0:
            picked = next(i for i in fallback_order if i not in chosen)
        chosen.add(picked)
    return canonical(chosen)


@dataclass
class SelectionResult:
    variant: str
    best_subset: RegionSubset
    best_fitness: float
    per_size_best: dict[int, tuple[RegionSubset, float]] | None
    trajectories: dict[int, list[float]] | list[float]
    evaluations: int
    cache_hits: int
    improvisation_requests: int
    params: HSParams
    seed: int
    wall_clock: dict[str, float]

    def to_dict(self) -> dict:
        payload = {
            "variant": self.variant,
            "best_subset": list(self.best_subset),
            "best_fitness": self.best_fitness,
            "evaluations": self.evaluations,
            "cache_hits": self.cache_hits,
            "improvisation_requests": self.improvisation_requests,
            "params": {"hms": self.params.hms, "hmcr": self.params.hmcr, "par": self.params.par,
                       "bw": self.params.bw, "ni": self.params.ni, "seed": self.params.seed},
            "seed": self.seed,
            "wall_clock": dict(self.wall_clock),
        }
        if self.per_size_best is None:
            payload["per_size_best"] = None
            payload["trajectory"] = list(self.trajectories)
        else:
            payload["per_size_best"] = {
                str(k): {"subset": list(subset), "fitness": fit}
                for k, (subset, fit) in sorted(self.per_size_best.items())
            }
            payload["trajectories"] = {str(k): list(v) for k, v in sorted(self.trajectories.items())}
        return payload


def _better(a: tuple[RegionSubset, float], b: tuple[RegionSubset, float]) -> bool:
    """Fitness first, then fewer regions, then lexicographically smaller indices."""
    if a[1] != b[1]:
        return a[1] > b[1]
    if len(a[0]) != len(b[0]):
        return len(a[0]) < len(b[0])
    return a[0] < b[0]


def select_best(candidates) -> tuple[RegionSubset, float]:
    """Order-independent pick of the best (subset, fitness) pair."""
    best = None
    for cand in candidates:
        if best is None or _better(cand, best):
            best = cand
    if best is None:
        raise ValueError("no candidates to select from")
    return best


def _random_distinct_subsets(rng: np.random.Generator, k: int, count: int) -> list[RegionSubset]:
    subsets: list[RegionSubset] = []
    seen = set()
    attempts = 0
    while len(subsets) < count:
        cand = canonical(rng.choice(LEVEL2_COUNT, size=k, replace=False))
        attempts += 1
        if cand not in seen or attempts > 50 * count:
            seen.add(cand)
            subsets.append(cand)
    return subsets


def enhanced_search(context: FitnessContext, params: HSParams) -> SelectionResult:
    """Roulette-guided per-cardinality search over subset sizes 1..15."""
    if params.hms != LEVEL2_COUNT:
        raise ValueError(f"enhanced search ties memory size to the {LEVEL2_COUNT} local regions; "
                         f"got hms={params.hms}")
    evals0, hits0 = context.counters()
    t0 = time.perf_counter()
    wheel = build_roulette(context)
    t_wheel = time.perf_counter() - t0

    per_size_best: dict[int, tuple[RegionSubset, float]] = {}
    trajectories: dict[int, list[float]] = {}
    improvisations = 0
    t0 = time.perf_counter()
    for k in range(1, LEVEL2_COUNT):
        rng = np.random.default_rng([params.seed, k])
        if k == 1:
            memory = [canonical((i,)) for i in ALL_REGIONS]
        else:
            memory = _random_distinct_subsets(rng, k, params.hms)
        fitnesses = [region_fitness(m, context) for m in memory]
        best = select_best(zip(memory, fitnesses))

        trajectory = []
        for _ in range(params.ni):
            candidate = improvise_subset(memory, wheel, params, rng, k)
            fitness = region_fitness(candidate, context)
            improvisations += 1
            worst = int(np.argmin(fitnesses))
            if fitness > fitnesses[worst]:
                memory[worst] = candidate
                fitnesses[worst] = fitness
            if _better((candidate, fitness), best):
                best = (candidate, fitness)
            trajectory.append(best[1])
        per_size_best[k] = best
        trajectories[k] = trajectory
    t_search = time.perf_counter() - t0

    overall = select_best(per_size_best.values())
    evals1, hits1 = context.counters()
    return SelectionResult(
        variant="enhanced", best_subset=overall[0], best_fitness=overall[1],
        per_size_best=per_size_best, trajectories=trajectories,
        evaluations=evals1 - evals0, cache_hits=hits1 - hits0,
        improvisation_requests=improvisations, params=params, seed=params.seed,
        wall_clock={"roulette_seconds": t_wheel, "search_seconds": t_search},
    )


def _bits_to_subset(bits: np.ndarray) -> RegionSubset:
    return canonical(np.flatnonzero(bits))


def basic_search(context: FitnessContext, params: HSParams) -> SelectionResult:
    """Plain harmony search over 16-bit inclusion vectors at a budget of
    ni improvisations per non-trivial subset size (ni * 15 total)."""
    rng = np.random.default_rng(params.seed)
    evals0, hits0 = context.counters()
    t0 = time.perf_counter()
    memory = [rng.integers(0, 2, size=LEVEL2_COUNT).astype(np.int8) for _ in range(params.hms)]
    fitnesses = [region_fitness(_bits_to_subset(m), context) for m in memory]
    best = select_best(zip([_bits_to_subset(m) for m in memory], fitnesses))
    t_init = time.perf_counter() - t0
    budget = params.ni * (LEVEL2_COUNT - 1)
    trajectory = []
    t0 = time.perf_counter()
    for _ in range(budget):
        bits = np.empty(LEVEL2_COUNT, dtype=np.int8)
        for pos in range(LEVEL2_COUNT):
            if rng.random() <= params.hmcr:
                bit = memory[int(rng.integers(params.hms))][pos]
                if rng.random() <= params.par:
                    bit = 1 - bit
            else:
                bit = int(rng.integers(2))
            bits[pos] = bit
        candidate = _bits_to_subset(bits)
        fitness = region_fitness(candidate, context)
        worst = int(np.argmin(fitnesses))
        if fitness > fitnesses[worst]:
            memory[worst] = bits
            fitnesses[worst] = fitness
        if _better((candidate, fitness), best):
            best = (candidate, fitness)
        trajectory.append(best[1])
    t_search = time.perf_counter() - t0

    evals1, hits1 = context.counters()
    return SelectionResult(
        variant="basic", best_subset=best[0], best_fitness=best[1],
        per_size_best=None, trajectories=trajectory,
        evaluations=evals1 - evals0, cache_hits=hits1 - hits0,
        improvisation_requests=budget, params=params, seed=params.seed,
        wall_clock={"init_seconds": t_init, "search_seconds": t_search},
    )
