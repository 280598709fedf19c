"""Synthetic shelf world: geometry, rendering, detector/tracker/embedder
stand-ins, noise injection, protocol experiments and the interactive
session engine."""

from .world import (
    FRAME_HEIGHT,
    FRAME_WIDTH,
    CameraPose,
    ProductTruth,
    ShelfProduct,
    ShelfSpec,
    SyntheticFrame,
    default_shelf,
    project_shelf,
)
from .noise import NoiseModel, ZERO_NOISE, DEFAULT_NOISE, synthetic_detect
from .synthetic import (
    RenderedImageSource,
    SyntheticDetector,
    SyntheticEmbedder,
    SyntheticHandProvider,
    SyntheticTracker,
    build_shelf_references,
    reference_image,
)

__all__ = [
    "FRAME_HEIGHT",
    "FRAME_WIDTH",
    "CameraPose",
    "ProductTruth",
    "ShelfProduct",
    "ShelfSpec",
    "SyntheticFrame",
    "default_shelf",
    "project_shelf",
    "NoiseModel",
    "ZERO_NOISE",
    "DEFAULT_NOISE",
    "synthetic_detect",
    "RenderedImageSource",
    "SyntheticDetector",
    "SyntheticEmbedder",
    "SyntheticHandProvider",
    "SyntheticTracker",
    "build_shelf_references",
    "reference_image",
]
