"""Basic harmony search over box-bounded continuous variables (minimization).

Also doubles as the parameter container for the discrete region-subset
variant, where ``bw`` is an integer index radius instead of a real step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HSParams:
    hms: int = 16
    hmcr: float = 0.85
    par: float = 0.45
    bw: float = 1.0
    ni: int = 25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.hmcr <= 1.0:
            raise ValueError(f"hmcr must be in [0, 1], got {self.hmcr}")
        if not 0.0 <= self.par <= 1.0:
            raise ValueError(f"par must be in [0, 1], got {self.par}")
        if self.hms < 1:
            raise ValueError(f"hms must be >= 1, got {self.hms}")
        if self.ni < 1:
            raise ValueError(f"ni must be >= 1, got {self.ni}")
        if self.bw <= 0:
            raise ValueError(f"bw must be positive, got {self.bw}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass
class ContinuousHarmony:
    variables: np.ndarray
    fitness: float


def _check_bounds(bounds) -> tuple[np.ndarray, np.ndarray]:
    lower = np.asarray([b[0] for b in bounds], dtype=np.float64)
    upper = np.asarray([b[1] for b in bounds], dtype=np.float64)
    if lower.size == 0 or (lower >= upper).any():
        raise ValueError("each bound must satisfy lower < upper")
    return lower, upper


def init_memory(bounds, params: HSParams, objective, rng: np.random.Generator) -> list[ContinuousHarmony]:
    """hms random harmonies, each variable uniform within its bounds."""
    lower, upper = _check_bounds(bounds)
    memory = []
    for _ in range(params.hms):
        variables = lower + rng.random(lower.size) * (upper - lower)
        memory.append(ContinuousHarmony(variables=variables, fitness=float(objective(variables))))
    return memory


def improvise(memory: list[ContinuousHarmony], bounds, params: HSParams,
              rng: np.random.Generator) -> np.ndarray:
    """One new harmony: per-variable memory consideration, pitch adjustment,
    or uniform redraw, clamped to bounds."""
    lower, upper = _check_bounds(bounds)
    d = lower.size
    out = np.empty(d)
    for i in range(d):
        if rng.random() <= params.hmcr:
            value = memory[int(rng.integers(len(memory)))].variables[i]
            if rng.random() <= params.par:
                step = rng.random() * params.bw
                value += step if rng.random() < 0.5 else -step
        else:
            value = lower[i] + rng.random() * (upper[i] - lower[i])
        out[i] = min(max(value, lower[i]), upper[i])
    return out


def replace_worst(memory: list[ContinuousHarmony], candidate: ContinuousHarmony) -> bool:
    """Swap out the worst member if the candidate is strictly better; ties keep it."""
    worst = max(range(len(memory)), key=lambda i: memory[i].fitness)
    if candidate.fitness < memory[worst].fitness:
        memory[worst] = candidate
        return True
    return False


def optimize(objective, bounds, params: HSParams) -> tuple[ContinuousHarmony, list[float]]:
    """Run ni improvisations; returns the best harmony ever seen and the
    per-improvisation best-so-far trajectory."""
    rng = np.random.default_rng(params.seed)
    memory = init_memory(bounds, params, objective, rng)
    best = min(memory, key=lambda h: h.fitness)
    best = ContinuousHarmony(variables=best.variables.copy(), fitness=best.fitness)
    trajectory = []
    for _ in range(params.ni):
        variables = improvise(memory, bounds, params, rng)
        candidate = ContinuousHarmony(variables=variables, fitness=float(objective(variables)))
        replace_worst(memory, candidate)
        if candidate.fitness < best.fitness:
            best = ContinuousHarmony(variables=candidate.variables.copy(), fitness=candidate.fitness)
        trajectory.append(best.fitness)
    return best, trajectory


def sphere(x: np.ndarray) -> float:
    return float(np.dot(x, x))


def rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


BENCHMARKS = {"sphere": sphere, "rosenbrock": rosenbrock}
