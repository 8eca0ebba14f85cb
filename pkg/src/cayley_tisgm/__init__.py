"""Translation-invariant splitting Gibbs measures of the coupled Ising-Potts model on Cayley trees."""

from .model import ModelParams

__all__ = ["ModelParams"]
__version__ = "0.1.0"
