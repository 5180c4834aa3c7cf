"""Time-resolved Hong-Ou-Mandel interference of filtered Gaussian pulses."""

__version__ = "0.1.0"

from .coincidence import (
    CoincidenceQuery,
    erf,
    hom_probability,
    joint_probability,
    marginal_probability,
    no_interference_probability,
    windowed_probability,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    HomError,
    TruncationError,
    UnitarityError,
    UnsupportedConfigurationError,
    UnsupportedInputError,
)
from .fock_state import FockInput, OutputTerm, coincidence_amplitude_11, expand_output
from .pulse_algebra import (
    BeamSplitter,
    ExperimentGeometry,
    GaussianEnvelope,
    convolve_filter_pulse,
    envelope_eval,
    validate_splitter,
)

