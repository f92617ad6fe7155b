"""Casimir free energy of a dielectric half-space and a metal slab across an electrolyte.

The ions enter through a nonlocal longitudinal permittivity; at zero
frequency they turn the metal's TM reflection into -1, so the interaction
stays attractive at every separation.
"""
__version__ = "0.1.0"

from .electrolyte import ElectrolyteGap, kinematics
from .engine import (
    EnergyBreakdown,
    LayerStack,
    QuadratureSpec,
    free_energy_n,
    free_energy_zero_long,
    free_energy_zero_tm,
    hamaker,
    logdet_roundtrip,
    total_free_energy,
)
from .materials import Material, MaterialError, eval_material, load_material, shipped_material
from .quadrature import ConvergenceError
from .quantities import CONSTANTS, matsubara, matsubara_xi1
from .reflection import ReflectionError, half_space_block, slab_block, zero_freq_metal


def default_stack(separation=100e-9, debye_length=100e-9, thickness=50e-9, gold="gold_drude", temperature=300.0):
    """Silica / salted water / gold slab with the shipped material data."""
    gap = ElectrolyteGap(shipped_material("water"), debye_length, temperature=temperature)
    return LayerStack(shipped_material("silica"), gap, separation, shipped_material(gold), thickness)


__all__ = [
    "CONSTANTS",
    "ConvergenceError",
    "ElectrolyteGap",
    "EnergyBreakdown",
    "LayerStack",
    "Material",
    "MaterialError",
    "QuadratureSpec",
    "ReflectionError",
    "default_stack",
    "eval_material",
    "free_energy_n",
    "free_energy_zero_long",
    "free_energy_zero_tm",
    "half_space_block",
    "hamaker",
    "kinematics",
    "load_material",
    "logdet_roundtrip",
    "matsubara",
    "matsubara_xi1",
    "shipped_material",
    "slab_block",
    "total_free_energy",
    "zero_freq_metal",
]
