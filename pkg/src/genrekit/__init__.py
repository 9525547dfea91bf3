"""Music genre classification toolkit: audio features, from-scratch classifiers, evaluation."""

__version__ = "0.1.0"
