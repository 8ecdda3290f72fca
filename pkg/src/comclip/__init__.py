"""comclip - training-free compositional image-text matching."""

from comclip.composition import (
    ComposedScorer,
    CompositionConfig,
    CompositionResult,
    SubimageConfig,
    WeightingMode,
    baseline_score,
    comclip_score,
)
from comclip.core import ComCLIP, RunConfig, load_run_config
from comclip.encoders import CachedBackend, EmbeddingCache, EncoderBackend, MockBackend
from comclip.errors import ComclipError
from comclip.parsing import ParsedSentence, parse_svo_llm, parse_svo_rule_based
from comclip.reports import ConsoleReporter, CSVReporter, HTMLReporter, JSONReporter

__version__ = "0.1.0"

__all__ = [
    "CSVReporter",
    "CachedBackend",
    "ComCLIP",
    "ComclipError",
    "ComposedScorer",
    "CompositionConfig",
    "CompositionResult",
    "ConsoleReporter",
    "EmbeddingCache",
    "EncoderBackend",
    "HTMLReporter",
    "JSONReporter",
    "MockBackend",
    "ParsedSentence",
    "RunConfig",
    "SubimageConfig",
    "WeightingMode",
    "baseline_score",
    "comclip_score",
    "load_run_config",
    "parse_svo_llm",
    "parse_svo_rule_based",
]
