"""Verifiable rewards and trajectory metrics for manipulation answers."""

from ._core import RlvrError, __version__, advantages, metrics, parse, score_batch

__all__ = ["RlvrError", "__version__", "advantages", "metrics", "parse", "score_batch"]
