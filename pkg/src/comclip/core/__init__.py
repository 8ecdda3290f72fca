"""Run configuration and orchestration."""

from comclip.core.config import RunConfig, load_run_config
from comclip.core.runner import ComCLIP, GroundedSubimages

__all__ = ["ComCLIP", "GroundedSubimages", "RunConfig", "load_run_config"]
