"""projkit: alternating projections between closed sets, with diagnostics.

The subpackages split as follows: :mod:`~projkit.geometry` (vectors, angles,
building blocks), :mod:`~projkit.sets` and :mod:`~projkit.fourier` and
:mod:`~projkit.spirals` (sets with projections), :mod:`~projkit.engine`
(drivers and traces), :mod:`~projkit.diagnostics` (separability, Hölder
probe, rate fits), :mod:`~projkit.gallery` (named fixtures) and
:mod:`~projkit.cli`.
"""
from .diagnostics import (
    DEFAULT_OMEGA_GRID,
    HolderParams,
    HolderReport,
    RateFit,
    SeparabilityEstimate,
    angle_quotient,
    estimate_separability,
    fit_rate,
    four_point_check,
    holder_probe,
    loja_constant,
    loja_to_omega,
    omega_to_loja,
    predicted_rate,
    three_point_check,
    three_point_ell,
)
from .engine import CONVERGED, MAX_ITER, STALLED, StopRule, Trace, alternate, averaged_projections, gerchberg_saxton
from .errors import *  # noqa: F401,F403
from .fourier import FourierMagnitudeSet, SupportSet, dft, idft
from .gallery import ExperimentSpec, Expected, example, fixture_names, run_gallery, run_spec
from .geometry import BuildingBlock, as_vector, cos_angle, make_block, versine
from .sets import (
    AffineSubspace,
    DiagonalSet,
    EpigraphSet,
    FiniteSet,
    FullSpace,
    HalfSpace,
    ProductSet,
    ProjectableSet,
    Sector,
)

__version__ = "0.1.0"
