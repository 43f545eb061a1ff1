"""Random domino tilings of rectangular Aztec diamonds.

Exact samplers for the uniform and q-weighted measures on tilings, and an
independent analytic toolkit (limit densities, frozen-boundary curves,
height-function law of large numbers, CLT covariances) so the two sides
cross-validate each other.
"""

from .combinatorics import (
    DomainSpec,
    SignatureSequence,
    VGrid,
    boundary_signature,
    delta_count,
    enumerate_tilings,
    height_function,
    horizontal_domino_count,
    paths_from_vgrid,
    sequence_to_vgrid,
    validate_sequence,
    vgrid_to_sequence,
)
from .errors import GuardError, NumericalError
from .sampler import (
    RngStream,
    SamplerConfig,
    count_tilings,
    sample_batch,
    sample_tiling,
    tiling_weight,
)
from .schur import BetaWeight, dim, pr_prob, st_prob

__version__ = "0.1.0"
