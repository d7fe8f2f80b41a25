"""
码层 - 双线性型空间、MRD 码构造、自同构群
"""
from .bilinear_space import AutTriple, BilinearSpace, Form, StdTuple, get_space
from .mrd_codes import CodeSpec, build_phi, build_twisted, gabidulin_eval, puncture_code, verify_mrd

__all__ = [
    "AutTriple",
    "BilinearSpace",
    "Form",
    "StdTuple",
    "get_space",
    "CodeSpec",
    "build_phi",
    "build_twisted",
    "gabidulin_eval",
    "puncture_code",
    "verify_mrd",
]
