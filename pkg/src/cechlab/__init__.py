"""Random Čech complexes on the flat torus and the round sphere."""

__version__ = "0.1.0"
