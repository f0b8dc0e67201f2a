"""lgpairs: coincidence-rate simulator for spatially entangled photon pairs
analyzed in the Laguerre-Gauss mode basis."""

__version__ = "0.1.0"

from .modes import (  # noqa: F401
    ComplexRadialField,
    ModeIndex,
    QuadratureRule,
    laguerre,
    lg_radial,
    make_quadrature,
    make_segmented_quadrature,
    overlap_conj,
    overlap_plain,
)
from .source import (  # noqa: F401
    SchmidtSpectrum,
    SourceParams,
    optimal_waist,
    phase_matching_b,
    schmidt_k,
    schmidt_k_azimuthal,
    schmidt_k_radial,
    schmidt_number_from_spectrum,
    spdc_weight,
)
from .detection import (  # noqa: F401
    DecompositionResult,
    DetectionConfig,
    OpticsConfig,
    decompose,
    detection_field_raw,
    effective_detection_field,
    mask_phase,
    pixelate,
    reweight,
    to_working_plane,
)
from .correlate import (  # noqa: F401
    CoincidenceMatrix,
    CorrelationStats,
    azimuthal_matrix,
    coincidence_amplitude,
    diagonal_participation,
    radial_matrix,
    schmidt_estimate,
    w_metric,
    waist_sweep,
)
