"""
rankforge 测试套件
"""
