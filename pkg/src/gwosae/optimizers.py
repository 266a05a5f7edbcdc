"""Population-based black-box minimizers behind one shared run contract.

The primary algorithm is the Grey Wolf Optimizer: candidate solutions move
toward the three best solutions found so far (alpha, beta, delta).  For each
wolf X and each leader L the update draws fresh random vectors r1, r2 and
computes

    A = 2a * r1 - a          C = 2 * r2
    D_L = |C * X_L - X|      X_L' = X_L - A * D_L

and the new position is the average of the three X_L', clamped to the search
box.  The scalar ``a`` decreases linearly from ``a_start`` (default 2) toward
``a_end`` (default 0) over the iteration budget.

PSO, GA and ABC are the canonical textbook variants, provided as budget
comparable baselines; all four share the same trace contract: best-so-far
fitness per iteration (non-increasing), final best position, wall time and
the number of objective evaluations spent.

Objective functions must be pure.  A NaN objective value is treated as +inf
fitness so a pathological candidate survives but never leads.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Rng
from .errors import ConfigError

ALGORITHMS = ("gwo", "pso", "ga", "abc")


@dataclass(frozen=True)
class SearchSpace:
    """Box-bounded search space; the same [lo, hi] for every coordinate."""

    dim: int
    lo: float = -20.0
    hi: float = 20.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"search dimension must be >= 1, got {self.dim}")
        if not self.lo < self.hi:
            raise ConfigError(f"search box must satisfy lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class OptimizerConfig:
    """Shared optimizer settings plus per-algorithm overrides.

    ``algorithm_params`` keys (all real-valued, every one optional):

    * gwo: ``a_start`` (2.0), ``a_end`` (0.0)
    * pso: ``inertia`` (0.729), ``cognitive`` (1.49445), ``social`` (1.49445),
      ``velocity_clamp`` (0.5, fraction of box width)
    * ga: ``crossover_rate`` (0.9), ``mutation_rate`` (1/dim),
      ``mutation_sigma`` (0.05, fraction of box width), ``tournament_size`` (3),
      ``elitism`` (1)
    * abc: ``limit`` (0.6 * population_size * dim)
    """

    population_size: int = 30
    max_iterations: int = 500
    seed: int = 0
    algorithm: str = "gwo"
    algorithm_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.population_size < 4:
            raise ConfigError(
                f"population_size must be >= 4 (three leaders plus at least one "
                f"follower), got {self.population_size}"
            )
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; valid: {', '.join(ALGORITHMS)}"
            )

    def param(self, name: str, default: float) -> float:
        return float(self.algorithm_params.get(name, default))


@dataclass
class Wolf:
    """One candidate solution: a position and its objective value."""

    position: np.ndarray
    fitness: float


@dataclass
class RunTrace:
    """Per-iteration record of one optimizer run."""

    best_fitness_per_iteration: np.ndarray
    best_position: np.ndarray
    wall_time: float
    evaluations: int


@dataclass
class GwoState:
    """Mutable state of one GWO run between steps."""

    positions: np.ndarray  # population_size x dim
    fitness: np.ndarray  # population_size
    alpha: Wolf
    beta: Wolf
    delta: Wolf
    a_coef: float
    iteration: int
    rng: Rng
    evaluations: int

    @property
    def population(self) -> list[Wolf]:
        return [Wolf(p.copy(), float(f)) for p, f in zip(self.positions, self.fitness)]


def _evaluate(f, positions: np.ndarray) -> np.ndarray:
    """Evaluate each row; NaN objective values become +inf fitness."""
    fits = np.empty(positions.shape[0])
    for i in range(positions.shape[0]):
        v = float(f(positions[i]))
        fits[i] = math.inf if math.isnan(v) else v
    return fits


def _a_schedule(cfg: OptimizerConfig, iteration: int) -> float:
    a_start = cfg.param("a_start", 2.0)
    a_end = cfg.param("a_end", 0.0)
    frac = min(iteration / cfg.max_iterations, 1.0)
    return a_start - (a_start - a_end) * frac


def gwo_init(space: SearchSpace, cfg: OptimizerConfig, f) -> GwoState:
    """Draw the initial pack uniformly in the box and rank the leaders.

    Leaders are the three fittest members; ties break toward the lower
    population index.
    """
    if cfg.algorithm != "gwo":
        raise ConfigError(f"gwo_init called with algorithm {cfg.algorithm!r}")
    rng = Rng(cfg.seed)
    positions = rng.uniform(space.lo, space.hi, cfg.population_size * space.dim).reshape(
        cfg.population_size, space.dim
    )
    fitness = _evaluate(f, positions)
    order = np.argsort(fitness, kind="stable")
    leaders = [Wolf(positions[i].copy(), float(fitness[i])) for i in order[:3]]
    return GwoState(
        positions=positions,
        fitness=fitness,
        alpha=leaders[0],
        beta=leaders[1],
        delta=leaders[2],
        a_coef=_a_schedule(cfg, 0),
        iteration=0,
        rng=rng,
        evaluations=cfg.population_size,
    )


def _offer_leaders(state: GwoState, position: np.ndarray, fitness: float):
    """Greedy top-3 insertion; strict comparisons keep earlier incumbents on ties."""
    if fitness < state.alpha.fitness:
        state.delta = state.beta
        state.beta = state.alpha
        state.alpha = Wolf(position.copy(), fitness)
    elif fitness < state.beta.fitness:
        state.delta = state.beta
        state.beta = Wolf(position.copy(), fitness)
    elif fitness < state.delta.fitness:
        state.delta = Wolf(position.copy(), fitness)


def gwo_step(state: GwoState, space: SearchSpace, cfg: OptimizerConfig, f) -> GwoState:
    """Advance the pack one iteration in place and return the state.

    All random draws happen serially in population-index order (per wolf:
    r1 then r2 for alpha, beta, delta in turn), so results do not depend on
    how the subsequent fitness evaluations are scheduled.
    """
    pop, dim = state.positions.shape
    a = state.a_coef
    draws = state.rng.random((pop, 3, 2, dim))
    coef_a = 2.0 * a * draws[:, :, 0, :] - a
    coef_c = 2.0 * draws[:, :, 1, :]
    leaders = np.stack(
        [state.alpha.position, state.beta.position, state.delta.position]
    )  # 3 x dim
    dist = np.abs(coef_c * leaders[None, :, :] - state.positions[:, None, :])
    pulled = leaders[None, :, :] - coef_a * dist
    new_positions = pulled.mean(axis=1)
    np.clip(new_positions, space.lo, space.hi, out=new_positions)

    fitness = _evaluate(f, new_positions)
    state.positions = new_positions
    state.fitness = fitness
    for i in range(pop):
        _offer_leaders(state, new_positions[i], float(fitness[i]))
    state.evaluations += pop
    state.iteration += 1
    state.a_coef = _a_schedule(cfg, state.iteration)
    return state


def _run_gwo(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    start = time.perf_counter()
    state = gwo_init(space, cfg, f)
    best = np.empty(cfg.max_iterations)
    for t in range(cfg.max_iterations):
        gwo_step(state, space, cfg, f)
        best[t] = state.alpha.fitness
    return RunTrace(
        best_fitness_per_iteration=best,
        best_position=state.alpha.position.copy(),
        wall_time=time.perf_counter() - start,
        evaluations=state.evaluations,
    )


def _run_pso(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    """Global-best PSO with inertia weight and velocity clamping.

    Evaluations: population_size * (1 + max_iterations).
    """
    start = time.perf_counter()
    rng = Rng(cfg.seed)
    pop, dim = cfg.population_size, space.dim
    w = cfg.param("inertia", 0.729)
    c1 = cfg.param("cognitive", 1.49445)
    c2 = cfg.param("social", 1.49445)
    vmax = cfg.param("velocity_clamp", 0.5) * (space.hi - space.lo)

    x = rng.uniform(space.lo, space.hi, pop * dim).reshape(pop, dim)
    v = np.zeros((pop, dim))
    fit = _evaluate(f, x)
    pbest = x.copy()
    pbest_fit = fit.copy()
    g = int(np.argmin(pbest_fit))
    gbest = pbest[g].copy()
    gbest_fit = float(pbest_fit[g])

    best = np.empty(cfg.max_iterations)
    for t in range(cfg.max_iterations):
        draws = rng.random((pop, 2, dim))
        v = w * v + c1 * draws[:, 0, :] * (pbest - x) + c2 * draws[:, 1, :] * (gbest - x)
        np.clip(v, -vmax, vmax, out=v)
        x = x + v
        np.clip(x, space.lo, space.hi, out=x)
        fit = _evaluate(f, x)
        improved = fit < pbest_fit
        pbest[improved] = x[improved]
        pbest_fit[improved] = fit[improved]
        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest = pbest[g].copy()
            gbest_fit = float(pbest_fit[g])
        best[t] = gbest_fit
    return RunTrace(
        best_fitness_per_iteration=best,
        best_position=gbest,
        wall_time=time.perf_counter() - start,
        evaluations=pop * (1 + cfg.max_iterations),
    )


def _run_ga(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    """Real-coded generational GA: tournament selection, uniform crossover,
    Gaussian mutation, single-slot elitism.

    Evaluations: population_size + max_iterations * (population_size - elitism);
    elite fitness is carried over instead of re-evaluated.
    """
    start = time.perf_counter()
    rng = Rng(cfg.seed)
    pop, dim = cfg.population_size, space.dim
    cr = cfg.param("crossover_rate", 0.9)
    mr = cfg.param("mutation_rate", 1.0 / dim)
    sigma = cfg.param("mutation_sigma", 0.05) * (space.hi - space.lo)
    k = int(cfg.param("tournament_size", 3))
    n_elite = int(cfg.param("elitism", 1))
    if not 1 <= k <= pop:
        raise ConfigError(f"tournament_size must be in [1, population_size], got {k}")
    if not 0 <= n_elite < pop:
        raise ConfigError(f"elitism must be in [0, population_size), got {n_elite}")

    x = rng.uniform(space.lo, space.hi, pop * dim).reshape(pop, dim)
    fit = _evaluate(f, x)
    evaluations = pop
    order = np.argsort(fit, kind="stable")
    gbest = x[order[0]].copy()
    gbest_fit = float(fit[order[0]])

    def tournament():
        idx = rng.choice_without_replacement(pop, k)
        return x[idx[np.argmin(fit[idx])]]

    best = np.empty(cfg.max_iterations)
    for t in range(cfg.max_iterations):
        children = np.empty((pop, dim))
        elite_order = np.argsort(fit, kind="stable")[:n_elite]
        children[:n_elite] = x[elite_order]
        for i in range(n_elite, pop):
            p1 = tournament()
            p2 = tournament()
            if rng.random() < cr:
                mask = rng.random(dim) < 0.5
                child = np.where(mask, p1, p2)
            else:
                child = p1.copy()
            mut = rng.random(dim) < mr
            if mut.any():
                child = child.copy()
                child[mut] += sigma * rng.normal(int(mut.sum()))
            children[i] = child
        np.clip(children, space.lo, space.hi, out=children)
        child_fit = np.empty(pop)
        child_fit[:n_elite] = fit[elite_order]
        child_fit[n_elite:] = _evaluate(f, children[n_elite:])
        evaluations += pop - n_elite
        x, fit = children, child_fit
        i_best = int(np.argmin(fit))
        if fit[i_best] < gbest_fit:
            gbest = x[i_best].copy()
            gbest_fit = float(fit[i_best])
        best[t] = gbest_fit
    return RunTrace(
        best_fitness_per_iteration=best,
        best_position=gbest,
        wall_time=time.perf_counter() - start,
        evaluations=evaluations,
    )


def _abc_quality(fit: np.ndarray) -> np.ndarray:
    """Karaboga's minimization quality transform for roulette selection."""
    return np.where(fit >= 0, 1.0 / (1.0 + fit), 1.0 + np.abs(fit))


def _run_abc(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    """Artificial Bee Colony with population_size // 2 food sources.

    Each iteration runs one employed and one onlooker pass (one single-
    coordinate neighbor move each, greedy accept) and retires at most one
    exhausted source per iteration.  Evaluations:
    SN + max_iterations * 2 * SN + number_of_scout_replacements,
    with SN = population_size // 2.
    """
    start = time.perf_counter()
    rng = Rng(cfg.seed)
    sn, dim = cfg.population_size // 2, space.dim
    limit = cfg.param("limit", 0.6 * cfg.population_size * dim)

    x = rng.uniform(space.lo, space.hi, sn * dim).reshape(sn, dim)
    fit = _evaluate(f, x)
    trials = np.zeros(sn, dtype=int)
    evaluations = sn
    i_best = int(np.argmin(fit))
    gbest = x[i_best].copy()
    gbest_fit = float(fit[i_best])

    def neighbor_move(i: int):
        nonlocal evaluations
        k = int(rng.integers(0, sn - 1))
        if k >= i:
            k += 1
        j = int(rng.integers(0, dim))
        phi = float(rng.uniform(-1.0, 1.0, 1)[0])
        cand = x[i].copy()
        cand[j] = min(max(cand[j] + phi * (x[i][j] - x[k][j]), space.lo), space.hi)
        cand_fit = _evaluate(f, cand[None, :])[0]
        evaluations += 1
        if cand_fit < fit[i]:
            x[i] = cand
            fit[i] = cand_fit
            trials[i] = 0
        else:
            trials[i] += 1

    best = np.empty(cfg.max_iterations)
    for t in range(cfg.max_iterations):
        for i in range(sn):
            neighbor_move(i)
        quality = _abc_quality(fit)
        cum = np.cumsum(quality / quality.sum())
        for _ in range(sn):
            i = min(int(np.searchsorted(cum, rng.random())), sn - 1)
            neighbor_move(i)
        i_tired = int(np.argmax(trials))
        if trials[i_tired] > limit:
            x[i_tired] = rng.uniform(space.lo, space.hi, dim)
            fit[i_tired] = _evaluate(f, x[i_tired][None, :])[0]
            trials[i_tired] = 0
            evaluations += 1
        i_best = int(np.argmin(fit))
        if fit[i_best] < gbest_fit:
            gbest = x[i_best].copy()
            gbest_fit = float(fit[i_best])
        best[t] = gbest_fit
    return RunTrace(
        best_fitness_per_iteration=best,
        best_position=gbest,
        wall_time=time.perf_counter() - start,
        evaluations=evaluations,
    )


def run_baseline(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    """Run one of the baseline algorithms (pso, ga, abc)."""
    if cfg.algorithm == "pso":
        return _run_pso(space, cfg, f)
    if cfg.algorithm == "ga":
        return _run_ga(space, cfg, f)
    if cfg.algorithm == "abc":
        return _run_abc(space, cfg, f)
    raise ConfigError(f"run_baseline cannot dispatch algorithm {cfg.algorithm!r}")


def run(space: SearchSpace, cfg: OptimizerConfig, f) -> RunTrace:
    """Minimize ``f`` over the box with the configured algorithm.

    The trace is a pure function of (space, cfg, f) when f is pure; only
    ``wall_time`` varies between repeated runs.
    """
    if cfg.algorithm == "gwo":
        return _run_gwo(space, cfg, f)
    return run_baseline(space, cfg, f)
