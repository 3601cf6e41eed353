"""Single-site Markov chains for finite-volume Gibbs kernels."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Mapping

import numpy as np

from .config import PLANAR, PLUS, SCALAR, SpinConfiguration, homogeneous, wrap_angle
from .couplings import CouplingModel, InteractionKernel
from .estimates import Estimate, estimate
from .hamiltonian import BoundarySpec, LatticeSystem
from .lattice import ORIGIN, SiteSet, even_sublattice
from .rng import CounterRNG, stream_key

Observable = Callable[[LatticeSystem], float]


@dataclass(frozen=True)
class ChainSpec:
    sweeps: int = 10_000
    burn_in: int = 1_000
    seed: int = 0
    proposal_width: float = math.pi / 2
    thinning: int = 1

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.thinning < 1:
            raise ValueError("thinning must be positive")
        if not 0 < self.proposal_width <= math.pi:
            raise ValueError("proposal_width must lie in (0, pi]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def with_seed(self, seed: int) -> "ChainSpec":
        return ChainSpec(self.sweeps, self.burn_in, seed % 2 ** 64, self.proposal_width, self.thinning)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ChainSpec":
        return cls(
            int(d.get("sweeps", 10_000)),
            int(d.get("burn_in", 1_000)),
            int(d.get("seed", 0)),
            float(d.get("proposal_width", math.pi / 2)),
            int(d.get("thinning", 1)),
        )


# -- single-site updates -------------------------------------------------------


def heat_bath_probability(beta: float, h: float) -> float:
    """``P(sigma = +1) = 1 / (1 + exp(-2 beta h))``."""
    x = 2.0 * beta * h
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def heat_bath_update_ising(system: LatticeSystem, site, beta: float, rng: CounterRNG) -> int:
    if system.kind != SCALAR:
        raise ValueError("heat-bath update needs scalar spins")
    h = system.local_field(site)
    new = 1 if rng.random() < heat_bath_probability(beta, h) else -1
    system.set_value(site, new)
    return new


def metropolis_acceptance(beta: float, dE: float) -> float:
    return 1.0 if dE <= 0 else math.exp(-beta * dE)


def metropolis_update_rotator(system: LatticeSystem, site, beta: float, width: float, rng: CounterRNG) -> float:
    if system.kind != PLANAR:
        raise ValueError("Metropolis rotator update needs planar spins")
    old = system.value_at(site)
    proposal = wrap_angle(old + (2.0 * rng.random() - 1.0) * width)
    dE = system.energy_delta(site, old, proposal)
    if rng.random() < metropolis_acceptance(beta, dE):
        system.set_value(site, proposal)
        return proposal
    return old


# -- observables ---------------------------------------------------------------


def site_observable(site) -> Observable:
    """sigma at ``site`` (sin theta for planar spins)."""

    def f(system: LatticeSystem) -> float:
        return system.vertical_at(site)

    f.__name__ = f"site{tuple(site)}"
    return f


def block_observable(half_width: int) -> Observable:
    """Mean of sigma (sin theta) over the centred box ``Box(half_width)``."""

    def f(system: LatticeSystem) -> float:
        c = system.grid.half_width
        sl = slice(c - half_width, c + half_width + 1)
        return float(system.vertical_grid()[sl, sl].mean())

    f.__name__ = f"block{half_width}"
    return f


def magnetization(system: LatticeSystem) -> float:
    """Mean of sigma (sin theta) over the free sites."""
    v = system.vertical_grid()
    return float(v[system.sites[:, 0], system.sites[:, 1]].mean())


def constant_one(system: LatticeSystem) -> float:
    return 1.0


# -- chains ---------------------------------------------------------------------


@dataclass
class ChainResult:
    estimates: dict[str, Estimate]
    series: dict[str, np.ndarray]
    acceptance: float
    final: SpinConfiguration


def sample(
    system: LatticeSystem,
    beta: float,
    spec: ChainSpec,
    observables: Mapping[str, Observable],
) -> ChainResult:
    """Run ``burn_in + sweeps`` sweeps on ``system`` in place."""
    key = stream_key(spec.seed)
    per_sweep = system.draws_per_sweep
    n_rec = spec.sweeps // spec.thinning
    series = {name: np.empty(n_rec) for name in observables}
    accepted = 0
    attempted = 0
    t = 0
    for _ in range(spec.burn_in):
        system.sweep(beta, key, t * per_sweep, spec.proposal_width)
        t += 1
    r = 0
    for s in range(spec.sweeps):
        accepted += system.sweep(beta, key, t * per_sweep, spec.proposal_width)
        attempted += system.n_free
        t += 1
        if (s + 1) % spec.thinning == 0 and r < n_rec:
            for name, f in observables.items():
                series[name][r] = f(system)
            r += 1
    estimates = {name: estimate(x) for name, x in series.items()}
    acc = accepted / attempted if attempted else 1.0
    return ChainResult(estimates, series, acc, system.configuration())


def run_chain(
    region: SiteSet | None,
    init: SpinConfiguration,
    bc: BoundarySpec,
    model: CouplingModel,
    kernel: InteractionKernel,
    beta: float,
    spec: ChainSpec,
    observables: Mapping[str, Observable],
    backend: str | None = None,
) -> dict[str, Estimate]:
    system = LatticeSystem(init, bc, model, kernel, region, backend=backend)
    return sample(system, beta, spec, observables).estimates


def run_many(jobs: list[Callable[[], object]], workers: int = 1) -> list:
    """Run independent jobs, returning results in submission order.

    Kernels release the GIL, so a thread pool overlaps chains.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


# -- constrained systems ----------------------------------------------------------


def constrained_system(
    frozen_even: SpinConfiguration,
    model: CouplingModel,
    kernel: InteractionKernel,
    far_field: str = PLUS,
    backend: str | None = None,
) -> LatticeSystem:
    """The decorated-lattice system: even sites other than the origin pinned.

    Free sites are the invisible sites of the window plus the origin; they
    start from the maximal configuration, as does the far field outside the
    window (``far_field="free"`` removes it).
    """
    box = frozen_even.box
    even = even_sublattice(box).mask.copy()
    even[box.index(ORIGIN)] = False
    if frozen_even.frozen.any() and not np.array_equal(frozen_even.frozen, even):
        missing = even & ~frozen_even.frozen
        if missing.any():
            raise ValueError("frozen assignment does not cover every even site except the origin")
    init = homogeneous(box, model.kind, PLUS)
    init.values[even] = frozen_even.values[even]
    init.frozen = even
    return LatticeSystem(init, BoundarySpec(far_field), model, kernel, backend=backend)


def constrained_plus_magnetization(
    frozen_even: SpinConfiguration,
    beta: float,
    model: CouplingModel,
    kernel: InteractionKernel,
    spec: ChainSpec,
    observable: Observable | None = None,
    far_field: str = PLUS,
    backend: str | None = None,
) -> Estimate:
    """Origin magnetisation of the constrained system on ``Box(frozen_even.L)``.

    Finite-volume stand-in for the plus-selected constrained measure on the
    invisible sites plus the origin, with the even sites frozen.
    """
    system = constrained_system(frozen_even, model, kernel, far_field, backend)
    obs = observable or site_observable(ORIGIN)
    return sample(system, beta, spec, {"origin": obs}).estimates["origin"]
