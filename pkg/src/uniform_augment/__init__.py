"""Search-free image augmentation: uniform sampling over a fixed transform space."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AppliedOp,
    AppliedRecord,
    AugmentationSpace,
    SampledOp,
    TransformId,
    TransformSpec,
    apply_chain,
    augment,
    load_space,
    map_magnitude,
    preset,
    sample_ops,
    validate_space,
)
from .errors import ConfigError, ContractError, DecodeError, InputError  # noqa: E402
from .rng import RngStream, derive_stream  # noqa: E402
