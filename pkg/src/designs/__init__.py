"""
Package des circuits de référence (Conv, Gaus, AES, routeur NoC).
"""
from src.designs.registry import REFERENCE_SCALE, build_design, build_stimulus, oracle_output

__all__ = ["REFERENCE_SCALE", "build_design", "build_stimulus", "oracle_output"]
