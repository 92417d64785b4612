"""Binary PSO baseline with sigmoid transfer, sharing the search fitness.

Particles start as perturbations of the input mask (one exact copy included,
so the global best can never fall below the input). Velocities follow the
standard inertia + cognitive + social update with linear inertia decay; each
bit is resampled to 1 with probability sigmoid(velocity).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import DocTermMatrix
from .heuristic import (
    ChangeSchedule,
    FeatureMask,
    FitnessFn,
    HeuristicError,
    RngStream,
    change_count,
    generate_neighbor,
)


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    w_start: float = 0.9
    w_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    v_max: float = 6.0
    max_iterations: int = 100
    schedule: ChangeSchedule = field(default_factory=ChangeSchedule)
    budget_seconds: float = 600.0
    seed: int = 0


@dataclass
class Particle:
    position: FeatureMask
    velocity: np.ndarray
    pbest_mask: FeatureMask
    pbest_fitness: float


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    gbest_fitness: float
    elapsed_ms: float


@dataclass
class PsoTrace:
    records: list[IterationRecord] = field(default_factory=list)
    termination: str = "max-iterations"  # max-iterations | budget
    elapsed_seconds: float = 0.0


@dataclass
class PsoSnapshot:
    particles: list[Particle]
    gbest_mask: FeatureMask
    gbest_fitness: float
    iteration: int
    elapsed_seconds: float
    trace: PsoTrace


def sigmoid(v: float) -> float:
    if v >= 0:
        z = math.exp(-v)
        return 1.0 / (1.0 + z)
    z = math.exp(v)
    return z / (1.0 + z)


def _init_swarm(
    input_mask: FeatureMask, config: PsoConfig, rng: RngStream, fitness: FitnessFn
) -> list[Particle]:
    m = input_mask.universe
    change = change_count(0, input_mask.popcount, config.schedule)
    particles = []
    for i in range(config.swarm_size):
        if i == 0:
            mask = input_mask
        else:
            mask = generate_neighbor(input_mask, change, rng.child("init", i))
        velocity = rng.child("vel", i).generator().uniform(-1.0, 1.0, size=m)
        f = fitness(mask)
        particles.append(
            Particle(position=mask, velocity=velocity, pbest_mask=mask, pbest_fitness=f)
        )
    return particles


def pso_select(
    matrix: DocTermMatrix,
    input_mask: FeatureMask,
    config: PsoConfig,
    fitness: FitnessFn | None = None,
    resume: PsoSnapshot | None = None,
    on_iteration=None,
) -> tuple[FeatureMask, PsoTrace]:
    if input_mask.popcount < 1:
        raise HeuristicError("input mask must select at least one feature")
    if fitness is None:
        fitness = FitnessFn(matrix, classifier="nb", seed=config.seed)
    rng = RngStream(config.seed)

    if resume is not None:
        particles = resume.particles
        gbest_mask, gbest_fitness = resume.gbest_mask, resume.gbest_fitness
        start_iter = resume.iteration
        trace = resume.trace
        already_elapsed = resume.elapsed_seconds
    else:
        particles = _init_swarm(input_mask, config, rng.child("swarm"), fitness)
        best = max(range(len(particles)), key=lambda i: (particles[i].pbest_fitness, -i))
        gbest_mask = particles[best].pbest_mask
        gbest_fitness = particles[best].pbest_fitness
        start_iter = 0
        trace = PsoTrace()
        already_elapsed = 0.0

    start = time.monotonic()
    elapsed = lambda: already_elapsed + (time.monotonic() - start)

    out_of_budget = False
    for it in range(start_iter, config.max_iterations):
        if elapsed() >= config.budget_seconds:
            out_of_budget = True
            break
        frac = it / max(config.max_iterations - 1, 1)
        w = config.w_start + (config.w_end - config.w_start) * frac
        gbest_bits = gbest_mask.to_array().astype(float)
        for i, p in enumerate(particles):
            gen = rng.child("iter", it).child("particle", i).generator()
            x = p.position.to_array().astype(float)
            pb = p.pbest_mask.to_array().astype(float)
            r1 = gen.random(len(x))
            r2 = gen.random(len(x))
            v = w * p.velocity + config.c1 * r1 * (pb - x) + config.c2 * r2 * (gbest_bits - x)
            np.clip(v, -config.v_max, config.v_max, out=v)
            probs = 1.0 / (1.0 + np.exp(-v))
            new_bits = gen.random(len(x)) < probs
            p.velocity = v
            p.position = FeatureMask.from_array(new_bits)
            f = fitness(p.position)  # empty positions score 0.0 by convention
            if f > p.pbest_fitness:
                p.pbest_mask = p.position
                p.pbest_fitness = f
        # gbest reduction at the iteration barrier, in particle-index order
        for p in particles:
            if p.pbest_fitness > gbest_fitness:
                gbest_fitness = p.pbest_fitness
                gbest_mask = p.pbest_mask
        trace.records.append(IterationRecord(it + 1, gbest_fitness, elapsed() * 1000.0))
        if on_iteration is not None:
            on_iteration(
                PsoSnapshot(
                    particles=particles,
                    gbest_mask=gbest_mask,
                    gbest_fitness=gbest_fitness,
                    iteration=it + 1,
                    elapsed_seconds=elapsed(),
                    trace=trace,
                )
            )

    trace.termination = "budget" if out_of_budget else "max-iterations"
    trace.elapsed_seconds = elapsed()
    return gbest_mask, trace
