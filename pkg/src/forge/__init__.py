"""Exact and numerical verification engine for a family of flat rank-2
connections with dihedral monodromy and the Garnier solutions they induce."""

__version__ = "0.1.0"
