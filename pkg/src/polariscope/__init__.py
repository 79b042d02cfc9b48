"""polariscope: party-labeled politician embeddings and polarization metrics."""

__version__ = "0.1.0"
