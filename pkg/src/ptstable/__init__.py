"""Numerics for p-tempered alpha-stable distributions parameterized by their
Rosinski measure."""
from .errors import (DomainError, InsufficientSamplesError, InvalidMeasureError,
                     MomentInfiniteError, NotProperError, ParseError, PTStableError,
                     UnsupportedParameterError)
from .measure import (Atom, Grid, Pareto, PowerLaw, Ray, RosinskiMeasure, SpectralForm,
                      TSParams, from_spectral, is_proper, tempering_function, to_spectral,
                      validate)
from .special_fn import (KernelParams, StableDensityOrder, gamma_upper, kernel_k,
                         kernel_mellin, stable_density)

__version__ = "0.1.0"

from . import charfn, levy, moments, rv, sim, transforms  # noqa: E402
