"""Jump-diffusion paths with oracle integrated variance.

The continuous part is advanced by Euler-Maruyama on a fine grid of
``substeps`` points per observation interval.  Jumps are applied at their
exact times: the sub-step containing a jump is split and its Brownian
increment is subdivided with a Brownian bridge, so the total Brownian
increment over the sub-step does not depend on whether it was split.

Randomness is drawn from per-trial Philox streams derived from
``(master_seed, trial)``; a trial simulated alone or inside a batch gives
the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pathdata import SampledPath

__all__ = [
    "DiffusionSpec",
    "JumpSpec",
    "SimulatedPath",
    "SimulationError",
    "draw_compound_poisson",
    "draw_neyman_scott",
    "root_quadratic_model",
    "simulate",
    "simulate_batch",
    "sine_squared_model",
    "trial_seed",
]

DEFAULT_SUBSTEPS = 20


class SimulationError(ArithmeticError):
    """The simulated state became non-finite."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class DiffusionSpec:
    """``dX = drift(X) dt + diffusion(X) dW``; both callables must accept arrays."""

    drift: Callable[[np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray], np.ndarray]
    x0: float = 1.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def spot_variance(self, x):
        a = self.diffusion(np.asarray(x, dtype=float))
        return a * a


def root_quadratic_model(theta: float = 0.2, sigma: float = 1.0, eta: float = 3.0,
                         x0: float = 1.0) -> DiffusionSpec:
    """``dX = theta X dt + (sigma + eta X**2)**(1/4) dW``; spot variance ``sqrt(sigma + eta X**2)``."""
    if sigma < 0 or eta < 0:
        raise ValueError("sigma and eta must be non-negative")

    def drift(x):
        return theta * x

    if eta == 0.0:
        a0 = sigma ** 0.25

        def diffusion(x):
            return np.full_like(x, a0)
    else:
        def diffusion(x):
            return np.sqrt(np.sqrt(sigma + eta * x * x))

    return DiffusionSpec(drift, diffusion, x0, "root-quadratic",
                         {"theta": theta, "sigma": sigma, "eta": eta})


def sine_squared_model(theta: float = 0.2, sigma: float = 1.0, eta: float = 5.0,
                       x0: float = 1.0) -> DiffusionSpec:
    """``dX = theta X dt + (sigma + eta sin(X)**2) dW``."""

    def drift(x):
        return theta * x

    def diffusion(x):
        s = np.sin(x)
        return sigma + eta * s * s

    return DiffusionSpec(drift, diffusion, x0, "sine-squared",
                         {"theta": theta, "sigma": sigma, "eta": eta})


@dataclass(frozen=True)
class JumpSpec:
    """Finite-activity jump process.

    kind is ``"none"``, ``"compound-poisson"`` (``lam``, ``mu``, ``nu``) or
    ``"neyman-scott"`` (``lam0``, ``lam_c``, ``mean_disp``, ``nu_j``).  A
    ``mean_disp`` of ``None`` means the observation step ``T / n``.

    ``feedback`` says whether a jump enters the state that drives drift and
    diffusion.  By default compound-Poisson jumps do and Neyman-Scott jumps
    are added to an independent continuous path.
    """

    kind: str = "none"
    lam: float = 0.0
    mu: float = 0.0
    nu: float = 0.0
    lam0: float = 0.0
    lam_c: float = 0.0
    mean_disp: float | None = None
    nu_j: float = 0.0
    feedback: bool | None = None

    def __post_init__(self):
        if self.kind not in ("none", "compound-poisson", "neyman-scott"):
            raise ValueError(f"unknown jump kind {self.kind!r}")
        for name in ("lam", "nu", "lam0", "lam_c", "nu_j"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.mean_disp is not None and self.mean_disp < 0:
            raise ValueError("mean_disp must be non-negative")

    @property
    def feeds_state(self) -> bool:
        if self.feedback is not None:
            return self.feedback
        return self.kind != "neyman-scott"

    def draw(self, T: float, rng: np.random.Generator, h: float) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "compound-poisson":
            return draw_compound_poisson(self.lam, self.mu, self.nu, T, rng)
        if self.kind == "neyman-scott":
            disp = h if self.mean_disp is None else self.mean_disp
            return draw_neyman_scott(self.lam0, self.lam_c, disp, self.nu_j, T, rng)
        return np.empty(0), np.empty(0)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def draw_compound_poisson(lam: float, mu: float, nu: float, T: float, seed):
    """Jump times and sizes of a compound Poisson process on ``[0, T]``.

    Count ~ Poisson(lam T), times i.i.d. uniform (returned sorted), sizes N(mu, nu**2).
    """
    if lam < 0 or nu < 0:
        raise ValueError("lam and nu must be non-negative")
    rng = _as_rng(seed)
    count = rng.poisson(lam * T)
    times = np.sort(rng.uniform(0.0, T, size=count))
    sizes = rng.normal(mu, nu, size=count)
    return times, sizes


def draw_neyman_scott(lam0: float, lam_c: float, mean_disp: float, nu_j: float,
                      T: float, seed):
    """Marked Neyman-Scott cluster process on ``[0, T]``.

    Centres ~ Poisson(lam0 T) uniform on ``[0, T]``; each centre ``c`` has
    Poisson(lam_c) children at ``c - v`` with ``v`` exponential of mean
    ``mean_disp``.  Children outside ``[0, T]`` are discarded.  Sizes are
    N(0, nu_j**2).
    """
    if min(lam0, lam_c, mean_disp, nu_j) < 0:
        raise ValueError("parameters must be non-negative")
    rng = _as_rng(seed)
    centres = rng.uniform(0.0, T, size=rng.poisson(lam0 * T))
    counts = rng.poisson(lam_c, size=centres.size)
    parents = np.repeat(centres, counts)
    times = parents - rng.exponential(mean_disp, size=parents.size)
    times = np.sort(times[(times >= 0.0) & (times <= T)])
    sizes = rng.normal(0.0, nu_j, size=times.size)
    return times, sizes


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    """Independent stream for one Monte Carlo trial."""
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),))


@dataclass(frozen=True, eq=False)
class SimulatedPath:
    observed: SampledPath
    theta_true: float
    gamma_true: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    seed: object = None
    fine_spot_variance: np.ndarray | None = field(default=None, repr=False)


@dataclass
class _BatchResult:
    values: np.ndarray          # (batch, n + 1)
    theta: np.ndarray
    gamma: np.ndarray
    jumps: list                 # per trial (times, sizes)
    failed: dict                # trial position -> failure time
    fine_var: np.ndarray | None


def _bridge_pieces(dw: float, dt: float, cuts: Sequence[float], rng) -> list[float]:
    """Split a Brownian increment ``dw`` over ``[0, dt]`` at the ordered ``cuts``."""
    pieces = []
    t0, w0 = 0.0, 0.0
    for c in cuts:
        rest = dt - t0
        if rest <= 0.0:
            pieces.append(0.0)
            continue
        frac = (c - t0) / rest
        var = (c - t0) * (dt - c) / rest
        w = w0 + frac * (dw - w0) + math.sqrt(max(var, 0.0)) * rng.standard_normal()
        pieces.append(w - w0)
        t0, w0 = c, w
    pieces.append(dw - w0)
    return pieces


def simulate_batch(spec: DiffusionSpec, jumps: JumpSpec, n: int, T: float, seeds,
                   substeps: int = DEFAULT_SUBSTEPS, keep_fine: bool = False) -> _BatchResult:
    """Simulate one path per seed, vectorised across the batch."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not T > 0:
        raise ValueError("T must be positive")
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    seeds = [s if isinstance(s, np.random.SeedSequence) else np.random.SeedSequence(s)
             for s in seeds]
    batch = len(seeds)
    steps = n * substeps
    dt = T / steps
    sqdt = math.sqrt(dt)

    dW = np.empty((steps, batch))
    bridge_rngs, jump_list = [], []
    events: dict[int, list] = {}
    for b, ss in enumerate(seeds):
        s_brown, s_jump, s_bridge = ss.spawn(3)
        dW[:, b] = np.random.Generator(np.random.Philox(s_brown)).standard_normal(steps) * sqdt
        times, sizes = jumps.draw(T, np.random.Generator(np.random.Philox(s_jump)), T / n)
        jump_list.append((times, sizes))
        bridge_rngs.append(np.random.Generator(np.random.Philox(s_bridge)))
        for tau, size in zip(times, sizes):
            i = min(int(tau / dt), steps - 1)
            events.setdefault(i, []).append((b, tau, size))

    feed = jumps.feeds_state and jumps.kind != "none"
    x = np.full(batch, float(spec.x0))
    values = np.empty((batch, n + 1))
    values[:, 0] = x
    acc_var = np.zeros(batch)
    acc_var2 = np.zeros(batch)
    fine_var = np.empty((batch, steps)) if keep_fine else None
    failed: dict[int, float] = {}
    drift, diffusion = spec.drift, spec.diffusion

    # blow-ups are detected below and reported, so silence numpy's own warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            a = diffusion(x)
            var = a * a
            acc_var += var
            acc_var2 += var * var
            if keep_fine:
                fine_var[:, i] = var
            x_new = x + drift(x) * dt + a * dW[i]
            if feed and i in events:
                for b, tau, size in _group_events(events[i]):
                    x_new[b] = _split_step(spec, x[b], dW[i, b], i * dt, dt, tau, size,
                                           bridge_rngs[b])
            x = x_new
            if (i + 1) % substeps == 0:
                j = (i + 1) // substeps
                values[:, j] = x
                bad = ~np.isfinite(x)
                if bad.any():
                    for b in np.flatnonzero(bad):
                        failed.setdefault(int(b), j * T / n)
                    x = np.where(bad, 0.0, x)  # keep the rest of the batch numerically quiet

    if not feed and jumps.kind != "none":
        grid = np.arange(n + 1) * (T / n)
        for b, (times, sizes) in enumerate(jump_list):
            if times.size:
                cum = np.concatenate(([0.0], np.cumsum(sizes)))
                values[b] += cum[np.searchsorted(times, grid, side="right")]

    theta = T * acc_var / steps
    gamma = 2.0 * T * T * acc_var2 / steps
    for b in failed:
        values[b] = np.nan
        theta[b] = gamma[b] = np.nan
    return _BatchResult(values, theta, gamma, jump_list, failed, fine_var)


def _group_events(evts):
    """Per trial, the jumps falling in one sub-step, in time order."""
    by_trial: dict[int, list] = {}
    for b, tau, size in evts:
        by_trial.setdefault(b, []).append((tau, size))
    for b, items in by_trial.items():
        items.sort()
        yield b, [t for t, _ in items], [s for _, s in items]


def _split_step(spec, x0, dw, t_start, dt, taus, sizes, rng):
    cuts = [min(max(tau - t_start, 0.0), dt) for tau in taus]
    pieces = _bridge_pieces(dw, dt, cuts, rng)
    bounds = [0.0] + cuts + [dt]
    x = np.array([x0])
    for k, piece in enumerate(pieces):
        h = bounds[k + 1] - bounds[k]
        x = x + spec.drift(x) * h + spec.diffusion(x) * piece
        if k < len(sizes):
            x = x + sizes[k]
    return x[0]


def simulate(spec: DiffusionSpec, jumps: JumpSpec, n: int, T: float = 1.0, seed=0,
             substeps: int = DEFAULT_SUBSTEPS, keep_fine: bool = True) -> SimulatedPath:
    """Simulate one path and its oracle ``Theta`` and ``Gamma``.

    ``Theta`` is the left Riemann sum of the spot variance along the fine
    (jump-inclusive when jumps feed the state) trajectory, and
    ``Gamma = 2 T * sum(spot_variance**2) dt``.

    Raises
    ------
    SimulationError
        If the state becomes non-finite; ``err.time`` is the first
        observation time at which this was detected.
    """
    res = simulate_batch(spec, jumps, n, T, [seed], substeps, keep_fine)
    if res.failed:
        t = res.failed[0]
        raise SimulationError(f"simulated state became non-finite by t = {t:g}", t)
    times, sizes = res.jumps[0]
    return SimulatedPath(
        observed=SampledPath(res.values[0], T),
        theta_true=float(res.theta[0]),
        gamma_true=float(res.gamma[0]),
        jump_times=times,
        jump_sizes=sizes,
        seed=seed,
        fine_spot_variance=None if res.fine_var is None else res.fine_var[0],
    )
