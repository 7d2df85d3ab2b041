"""stateiso: simulation toolkit for quantum state isomorphism problems."""

__version__ = "0.1.0"
