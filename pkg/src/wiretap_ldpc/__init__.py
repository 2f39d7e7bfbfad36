"""LDPC code design for the Gaussian wiretap channel with coset coding."""

from .analysis import SnrPoint, biawgn_capacity, phi, phi_inv
from .degdist import DegreeDistribution, WiretapCodeSpec, frank_rate

__all__ = [
    "SnrPoint",
    "biawgn_capacity",
    "phi",
    "phi_inv",
    "DegreeDistribution",
    "WiretapCodeSpec",
    "frank_rate",
]

__version__ = "0.1.0"
