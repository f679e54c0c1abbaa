"""Exterior bi-duals, characteristic ideals and Euler/Stark systems over finite group rings."""

from .ring import RingDescriptor, GroupRingElement, CharacterSpec, gr_mul, involution, idempotent, teichmuller
from .linalg import howell_form, kernel, solve, expand_scalars, Lattice
from .modules import (
    PresentedModule,
    ModuleMap,
    IdealHandle,
    CartesianSquare,
    dual,
    exterior_power,
    exterior_bidual,
    cartesian_map,
    fitting_ideal,
    annihilator,
    characteristic_ideal,
    ideal_compare,
)
from .stickelberger import stickelberger_element, partial_zeta_zero, flat_projection, build_window, modified_p_adic_L
from .kolyvagin import kolyvagin_class, derivative_operator, theta_ideal
from .stark import SelmerDatum, StarkSystem, stark_solve, rank_reduction, regulator, synthetic_datum, toy_datum, validate_selmer_datum

__version__ = "0.1.0"

__all__ = [
    "RingDescriptor",
    "GroupRingElement",
    "CharacterSpec",
    "gr_mul",
    "involution",
    "idempotent",
    "teichmuller",
    "howell_form",
    "kernel",
    "solve",
    "expand_scalars",
    "Lattice",
    "PresentedModule",
    "ModuleMap",
    "IdealHandle",
    "CartesianSquare",
    "dual",
    "exterior_power",
    "exterior_bidual",
    "cartesian_map",
    "fitting_ideal",
    "annihilator",
    "characteristic_ideal",
    "ideal_compare",
    "stickelberger_element",
    "partial_zeta_zero",
    "flat_projection",
    "build_window",
    "modified_p_adic_L",
    "kolyvagin_class",
    "derivative_operator",
    "theta_ideal",
    "SelmerDatum",
    "StarkSystem",
    "stark_solve",
    "rank_reduction",
    "regulator",
    "synthetic_datum",
    "toy_datum",
    "validate_selmer_datum",
]
