"""Single-parameter template matching for time series."""

from .core import (
    AlphaEstimate,
    NormalizedSequence,
    Template,
    TimeSeries,
    alpha_estimate,
    alpha_normalized,
    cross_correlation_oracle,
    detection_threshold,
    normalization_factor,
    normalize,
)
from .detection import (
    SynthesisSpec,
    coverage_experiment,
    gaussian_noise,
    inject,
    limit_template,
    periodic_surrogate,
    synthesize,
)
from .errors import (
    ContractError,
    DegenerateSequenceError,
    DegenerateTemplateError,
    ParseError,
    TemplateTooLongError,
    UnsupportedFormatError,
)
from .ingest import SeriesFile, read_series, write_curves, write_series
from .matcher import AlphaProfile, MatchCurve, alpha_profile, count_matches, match_curve
from .selection import (
    DiscriminationReport,
    PartitionSet,
    SelectedTemplate,
    discriminate,
    minimal_discriminative_length,
    partition,
    select_template,
)

__version__ = "0.1.0"
