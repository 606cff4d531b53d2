"""Pseudospectral solver and analysis toolkit for the SQG front equation."""

from .spectral_core import (
    FourierGrid,
    RealField,
    SpectralField,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    sobolev_norm,
    z_norm,
)
from .symbols import SymbolQuery, coeff_c, coeff_d, t_symbol_closed, t_symbol_quadrature
from .nonlinearity import NonlinearityConfig, full_nonlinearity
from .evolution import SimConfig, SimState, run

__version__ = "0.1.0"

__all__ = [
    "FourierGrid",
    "RealField",
    "SpectralField",
    "apply_multiplier",
    "forward_transform",
    "inverse_transform",
    "sobolev_norm",
    "z_norm",
    "SymbolQuery",
    "coeff_c",
    "coeff_d",
    "t_symbol_closed",
    "t_symbol_quadrature",
    "NonlinearityConfig",
    "full_nonlinearity",
    "SimConfig",
    "SimState",
    "run",
]
