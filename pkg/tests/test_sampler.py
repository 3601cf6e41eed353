import math

import numpy as np
import pytest
from scipy import stats

from decimation_mc.config import alternating_ising, homogeneous
from decimation_mc.couplings import CouplingModel, build_kernel
from decimation_mc.decimation import preimage_freeze
from decimation_mc.hamiltonian import FREE, BoundarySpec, LatticeSystem
from decimation_mc.lattice import ORIGIN, Box, Site
from decimation_mc.oracle import clock_quadrature_rotator, enumerate_ising, rectangle_system
from decimation_mc.rng import CounterRNG
from decimation_mc.sampler import (
    ChainSpec,
    constant_one,
    constrained_plus_magnetization,
    constrained_system,
    heat_bath_probability,
    heat_bath_update_ising,
    metropolis_acceptance,
    metropolis_update_rotator,
    run_chain,
    run_many,
    sample,
    site_observable,
)

NN = CouplingModel("NN")
NNK = build_kernel(NN, 1)


def test_heat_bath_probability():
    assert heat_bath_probability(0.7, 0.0) == 0.5
    assert heat_bath_probability(0.5, 2.0) == pytest.approx(1 / (1 + math.exp(-2)), rel=1e-15)
    assert heat_bath_probability(1e3, 10.0) == 1.0
    assert heat_bath_probability(1e3, -10.0) == 0.0


def test_metropolis_acceptance():
    assert metropolis_acceptance(2.0, -1.0) == 1.0
    assert metropolis_acceptance(0.0, 5.0) == 1.0
    assert metropolis_acceptance(1.0, 2.0) == pytest.approx(math.exp(-2))


def test_chain_spec_validation():
    for kw in (dict(sweeps=0), dict(burn_in=-1), dict(thinning=0), dict(proposal_width=4.0), dict(seed=-1)):
        with pytest.raises(ValueError):
            ChainSpec(**kw)
    s = ChainSpec(100, 10, 5)
    assert ChainSpec.from_dict(s.to_dict()) == s


def test_single_site_updates_match_closed_form():
    s = LatticeSystem(homogeneous(Box(0), "scalar", "plus"), BoundarySpec("plus"), NN, NNK)
    rng = CounterRNG(3)
    ups = sum(heat_bath_update_ising(s, ORIGIN, 0.2, rng) == 1 for _ in range(20_000))
    p = heat_bath_probability(0.2, 4.0)
    assert abs(ups / 20_000 - p) < 4 * math.sqrt(p * (1 - p) / 20_000)


def test_rotator_beta_zero_is_uniform():
    m = CouplingModel("V2", alpha1=3.0)
    s = LatticeSystem(homogeneous(Box(0), "planar", "plus"), BoundarySpec("plus"), m, build_kernel(m, 2))
    rng = CounterRNG(5)
    thetas = np.array([metropolis_update_rotator(s, ORIGIN, 0.0, math.pi, rng) for _ in range(20_000)])
    assert stats.kstest((thetas + math.pi) / (2 * math.pi), "uniform").pvalue > 1e-3


def test_constant_observable_exact():
    s = rectangle_system(NN, NNK, 3, 3, "plus")
    e = sample(s, 0.4, ChainSpec(200, 10, 1), {"one": constant_one}).estimates["one"]
    assert e.mean == 1.0 and e.std_error == 0.0


def test_deterministic_reruns():
    init = homogeneous(Box(2), "scalar", "plus")
    spec = ChainSpec(300, 20, 42)
    a = run_chain(None, init, BoundarySpec("plus"), NN, NNK, 0.4, spec, {"o": site_observable(ORIGIN)})
    b = run_chain(None, init, BoundarySpec("plus"), NN, NNK, 0.4, spec, {"o": site_observable(ORIGIN)})
    assert a == b


def test_backends_give_identical_chains():
    init = homogeneous(Box(2), "scalar", "plus")
    spec = ChainSpec(200, 20, 7)
    obs = {"o": site_observable(ORIGIN)}
    a = run_chain(None, init, BoundarySpec("plus"), NN, NNK, 0.4, spec, obs, backend="numba")
    b = run_chain(None, init, BoundarySpec("plus"), NN, NNK, 0.4, spec, obs, backend="numpy")
    assert a == b


def test_nn_free_3x3_matches_enumeration():
    s = rectangle_system(NN, NNK, 3, 3, FREE)
    exact = enumerate_ising(s, beta=0.2).expectations["site(1,1)"]
    assert exact == 0.0
    e = sample(s, 0.2, ChainSpec(20_000, 500, 9), {"o": site_observable(Site(1, 1))}).estimates["o"]
    assert abs(e.mean - exact) < 3 * e.std_error


def test_two_site_rotator_matches_clock_oracle():
    m = CouplingModel("V1", kappa=0.5, beta=1.0)
    s = rectangle_system(m, build_kernel(m, 1), 1, 2, "plus")
    exact = clock_quadrature_rotator(s, beta=1.0).expectations["sin site(0,0)"]
    e = sample(s, 1.0, ChainSpec(40_000, 500, 4, proposal_width=1.5), {"o": site_observable(ORIGIN)}).estimates["o"]
    assert abs(e.mean - exact) < 3 * e.std_error


def test_run_many_keeps_order():
    jobs = [lambda k=k: k * k for k in range(10)]
    assert run_many(jobs, 1) == run_many(jobs, 4) == [k * k for k in range(10)]


# -- constrained systems ------------------------------------------------------


def test_constrained_beta_zero_centered():
    frozen = preimage_freeze(alternating_ising(Box(2)), Box(4))
    e = constrained_plus_magnetization(frozen, 0.0, NN, NNK, ChainSpec(4000, 100, 3))
    assert abs(e.mean) < 3 * e.std_error + 1e-12


def test_constrained_all_plus_ordered_and_exact():
    frozen = preimage_freeze(homogeneous(Box(1), "scalar", "plus"), Box(2))
    system = constrained_system(frozen, NN, NNK)
    assert system.n_free == 17
    exact = enumerate_ising(system, beta=1.0).expectations["site(0,0)"]
    e = constrained_plus_magnetization(frozen, 1.0, NN, NNK, ChainSpec(20_000, 500, 8))
    assert e.mean > 0.9
    assert abs(e.mean - exact) < 3 * e.std_error + 1e-3


def test_alternating_decorated_free_far_field_symmetric():
    # every even site pinned (origin included): the invisible system is flip symmetric
    from decimation_mc.decimation import alternating_decorated_system

    system = alternating_decorated_system(NN, NNK, 2)
    obs = {"a": site_observable(Site(1, 0)), "b": site_observable(Site(1, 1))}
    est = sample(system, 0.8, ChainSpec(20_000, 500, 6), obs).estimates
    for e in est.values():
        assert abs(e.mean) < 3 * e.std_error


def test_constrained_origin_feels_frozen_neighbours():
    # with the origin free, its four neighbours each see one frozen -1
    frozen = preimage_freeze(alternating_ising(Box(2)), Box(4))
    system = constrained_system(frozen, NN, NNK, far_field=FREE)
    mask = system.present & ~system.free
    fields = dict(zip(system.free_sites(), system.fields_from(mask)))
    assert [fields[s] for s in (Site(1, 0), Site(-1, 0), Site(0, 1), Site(0, -1))] == [-1.0] * 4


def test_constrained_rejects_incomplete_freeze():
    frozen = preimage_freeze(alternating_ising(Box(2)), Box(4))
    frozen.frozen[frozen.box.index(Site(2, 2))] = False
    frozen.frozen[frozen.box.index(Site(1, 1))] = True
    with pytest.raises(ValueError):
        constrained_system(frozen, NN, NNK)
