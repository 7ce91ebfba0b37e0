"""Seeded coarse-to-fine autoregressive image toy with training-free style
alignment, image-set consistency metrics, and an analysis harness."""

from .align import (
    ScheduleFunction,
    ValueHook,
    inject_values,
    pivotal_interpolate,
    replace_initial,
    schedule_value,
)
from .analysis import AblationRow, ScheduleRow, StepTrace, ablation_grid, schedule_grid, trace_run
from .engine import GenerationResult, generate, generate_pair
from .metrics import (
    ConsistencyReport,
    FeatureDescriptor,
    RgbHistogram,
    chi_square,
    describe,
    dual_consistency,
    object_relevancy,
    rgb_histogram,
    style_consistency,
)
from .model import (
    Architecture,
    TransformerWeights,
    build_weights,
    decode,
    embed_text,
    forward_step,
    load_weights,
    sample_residual,
    save_weights,
    sos_features,
)
from .pyramid import BinaryQuantizer, Pyramid, accumulate, quantize, resize_for_step, up
from .types import (
    ConfigError,
    FeatureMap,
    GenerationConfig,
    InterventionConfig,
    PromptEmbedding,
    ResidualMap,
    batch_slice,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "AblationRow",
    "Architecture",
    "BinaryQuantizer",
    "ConfigError",
    "ConsistencyReport",
    "FeatureDescriptor",
    "FeatureMap",
    "GenerationConfig",
    "GenerationResult",
    "InterventionConfig",
    "PromptEmbedding",
    "Pyramid",
    "ResidualMap",
    "RgbHistogram",
    "ScheduleFunction",
    "ScheduleRow",
    "StepTrace",
    "TransformerWeights",
    "ValueHook",
    "ablation_grid",
    "accumulate",
    "batch_slice",
    "build_weights",
    "chi_square",
    "decode",
    "describe",
    "dual_consistency",
    "embed_text",
    "forward_step",
    "generate",
    "generate_pair",
    "inject_values",
    "load_weights",
    "object_relevancy",
    "pivotal_interpolate",
    "quantize",
    "replace_initial",
    "resize_for_step",
    "rgb_histogram",
    "sample_residual",
    "save_weights",
    "schedule_grid",
    "schedule_value",
    "sos_features",
    "style_consistency",
    "trace_run",
    "up",
    "validate_config",
]
