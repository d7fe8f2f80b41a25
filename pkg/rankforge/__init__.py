"""
rankforge

有限域塔、q^k-循环矩阵与秩度量码（Φ、扭曲 Gabidulin 码及其打孔）的构造、
MRD 验证与自同构群计算。
"""

__version__ = "0.1.0"
