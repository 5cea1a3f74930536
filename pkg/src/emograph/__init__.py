"""Emotion co-occurrence graphs and graph-generated multi-label classifiers."""

__version__ = "0.1.0"
