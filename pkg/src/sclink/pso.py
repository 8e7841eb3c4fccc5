"""Global-best particle swarm optimization over a bounded box.

Maximizes the objective. Velocity clamping plus boundary reflection
keep every particle inside the box; the swarm owns a single seeded
generator, so a run is bit-reproducible for a fixed seed and
configuration.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SwarmConfig:
    bounds: np.ndarray                 # (dim, 2) low/high
    particle_count: int = 30
    iteration_cap: int = 150
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    seed: int = 0
    velocity_clamp_frac: float = 0.2

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        object.__setattr__(self, "bounds", b)
        if b.shape[1] != 2 or np.any(~np.isfinite(b)):
            raise ValueError("bounds must be a finite (dim, 2) array")
        if np.any(b[:, 1] <= b[:, 0]):
            raise ValueError("each bound must satisfy low < high")
        if self.particle_count < 2:
            raise ValueError("need at least 2 particles")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("PSO coefficients must be positive")
        b.setflags(write=False)

    @property
    def dim(self):
        return self.bounds.shape[0]


@dataclass(frozen=True)
class OptimizeResult:
    best_position: np.ndarray
    best_fitness: float
    trace: np.ndarray                  # per-iteration global best
    evaluations: int


def _reflect(x, v, lo, hi):
    """Reflect positions at the box walls, flipping the velocity there."""
    for _ in range(4):  # a particle can overshoot a thin box repeatedly
        below = x < lo
        above = x > hi
        if not (below.any() or above.any()):
            break
        x = np.where(below, 2 * lo - x, x)
        x = np.where(above, 2 * hi - x, x)
        v = np.where(below | above, -v, v)
    np.clip(x, lo, hi, out=x)
    return x, v


def optimize(objective, config, initial_candidates=None):
    """Run the swarm; returns the best candidate, fitness and best-trace.

    ``initial_candidates`` (optional, (k, dim)) replace the first k
    random particles, e.g. to seed with a known-good configuration.
    A candidate scoring -inf is treated as infeasible and discarded.
    """
    rng = np.random.default_rng(config.seed)
    lo = config.bounds[:, 0]
    hi = config.bounds[:, 1]
    span = hi - lo
    n, d = config.particle_count, config.dim

    x = lo + span * rng.random((n, d))
    if initial_candidates is not None:
        cand = np.atleast_2d(np.asarray(initial_candidates, dtype=float))
        k = min(cand.shape[0], n)
        x[:k] = np.clip(cand[:k], lo, hi)
    v = np.zeros((n, d))
    v_max = config.velocity_clamp_frac * span

    fitness = np.array([objective(xi) for xi in x], dtype=float)
    evaluations = n
    pbest_x = x.copy()
    pbest_f = fitness.copy()
    g = int(np.argmax(pbest_f))
    gbest_x = pbest_x[g].copy()
    gbest_f = float(pbest_f[g])

    trace = np.empty(config.iteration_cap)
    for it in range(config.iteration_cap):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        v = (config.inertia * v
             + config.cognitive * r1 * (pbest_x - x)
             + config.social * r2 * (gbest_x - x))
        np.clip(v, -v_max, v_max, out=v)
        x = x + v
        x, v = _reflect(x, v, lo, hi)

        fitness = np.array([objective(xi) for xi in x], dtype=float)
        evaluations += n
        improved = fitness > pbest_f
        pbest_x[improved] = x[improved]
        pbest_f[improved] = fitness[improved]
        g = int(np.argmax(pbest_f))
        if pbest_f[g] > gbest_f:
            gbest_f = float(pbest_f[g])
            gbest_x = pbest_x[g].copy()
        trace[it] = gbest_f

    return OptimizeResult(best_position=gbest_x, best_fitness=gbest_f,
                          trace=trace, evaluations=evaluations)


def trace_to_tsv(result, path):
    with open(path, "w") as fh:
        fh.write("# sclink pso trace v1\n")
        fh.write("iteration\tbest_fitness\n")
        for i, f in enumerate(result.trace):
            fh.write(f"{i}\t{f!r}\n")
        fh.write("# best_position: " +
                 ",".join(repr(v) for v in result.best_position) + "\n")
