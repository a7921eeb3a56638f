"""Numerical laboratory for commutators of weighted (Bessel-type) Riesz
transforms on the upper half-space: explicit kernels, Nystrom spectra, and
weak-Schatten / Weyl-law diagnostics."""

__version__ = "0.1.0"

from .special import ModelConstants, ModelParams, model_constants

__all__ = ["ModelConstants", "ModelParams", "model_constants", "__version__"]
