"""Eye-perspective rendering simulator."""

from ._core import (
    ConfigError,
    canny,
    daltonize,
    hue_segment,
    misalignment,
    render,
    resolve_config,
    select,
    set_thread_count,
    simulate_cvd,
    sweep,
)

__all__ = [
    "ConfigError",
    "canny",
    "daltonize",
    "hue_segment",
    "misalignment",
    "render",
    "resolve_config",
    "select",
    "set_thread_count",
    "simulate_cvd",
    "sweep",
]
