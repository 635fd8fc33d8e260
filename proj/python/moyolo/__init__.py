# Copyright (C) 2026 moyolo contributors
# SPDX-License-Identifier: Apache-2.0
#

"""Python bindings for the moyolo core library."""

from ._moyolo import (
    BoundingBox,
    ConfigError,
    IdentityAllocator,
    InvariantViolation,
    ParseError,
    PixelBox,
    Thresholds,
    TrackBox,
    Tracks,
    config_keys,
    evaluate,
    format_config,
    format_results,
    giou,
    giou_with_gradient,
    hungarian,
    iou,
    load_gt,
    parse_gt_text,
    parse_results_text,
    plan_propagation,
    write_synthetic_dataset,
)

__all__ = [
    "BoundingBox",
    "ConfigError",
    "IdentityAllocator",
    "InvariantViolation",
    "ParseError",
    "PixelBox",
    "Thresholds",
    "TrackBox",
    "Tracks",
    "config_keys",
    "evaluate",
    "format_config",
    "format_results",
    "giou",
    "giou_with_gradient",
    "hungarian",
    "iou",
    "load_gt",
    "parse_gt_text",
    "parse_results_text",
    "plan_propagation",
    "write_synthetic_dataset",
]
