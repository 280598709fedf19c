"""Assistive shelf-product retrieval engine: catalog search, visual matching,
tracking, spatial guidance and touch correction, plus a synthetic shelf
simulator that replays the evaluation protocols."""

__version__ = "0.1.0"
