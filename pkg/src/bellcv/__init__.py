"""Bell tests for continuous variables via click-conditioned homodyne detection
of a two-mode squeezed vacuum."""
from .analytic import (
    argmax_r,
    bell_ch,
    bell_chsh,
    bell_result,
    coefficients,
    correlation_e,
    p_joint_click,
    p_plus_plus,
    sweep,
    threshold_r,
)
from .errors import (
    BellCVError,
    DegenerateConditioning,
    DimensionOverflow,
    GridTooCoarse,
    InternalInconsistency,
    NoCrossing,
    RangeError,
    TruncationTooCoarse,
)
from .model import BellResult, ClosedFormCoefficients, ExperimentParams, PhaseQuad, standard_phases, validate_params

__version__ = "0.1.0"
