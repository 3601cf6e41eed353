"""Monte Carlo and exact tools for decimated Ising and planar-rotator measures."""

__version__ = "0.1.0"

from .config import SpinConfiguration, alternating_ising, alternating_rotator, compare, homogeneous
from .couplings import CouplingModel, InteractionKernel, build_kernel, coupling, tail_mass
from .decimation import GapReport, bad_vs_good_scan, decimate, discontinuity_probe, preimage_freeze
from .estimates import Estimate
from .hamiltonian import BoundarySpec, LatticeSystem, annulus_size, bc_energy_difference, total_energy
from .lattice import Box, Site, SiteSet
from .oracle import ExactResult, clock_quadrature_rotator, enumerate_ising, onsager_reference
from .sampler import ChainSpec, run_chain

__all__ = [
    "BoundarySpec",
    "Box",
    "ChainSpec",
    "CouplingModel",
    "Estimate",
    "ExactResult",
    "GapReport",
    "InteractionKernel",
    "LatticeSystem",
    "Site",
    "SiteSet",
    "SpinConfiguration",
    "alternating_ising",
    "alternating_rotator",
    "annulus_size",
    "bad_vs_good_scan",
    "bc_energy_difference",
    "build_kernel",
    "clock_quadrature_rotator",
    "compare",
    "coupling",
    "decimate",
    "discontinuity_probe",
    "enumerate_ising",
    "homogeneous",
    "onsager_reference",
    "preimage_freeze",
    "run_chain",
    "tail_mass",
    "total_energy",
]
