"""
代数层 - 有限域塔、有限域线性代数、q^k-循环矩阵
"""
from .field_tower import ZERO, Field, FieldSpec, make_field, solve_power_equation
from .linalg import GroundField, Mat, gl_array, gl_iter, gl_order
from .circulant import CirculantModel, CircSpec, SpaceParams, circulant_model

__all__ = [
    "ZERO",
    "Field",
    "FieldSpec",
    "make_field",
    "solve_power_equation",
    "GroundField",
    "Mat",
    "gl_array",
    "gl_iter",
    "gl_order",
    "CirculantModel",
    "CircSpec",
    "SpaceParams",
    "circulant_model",
]
