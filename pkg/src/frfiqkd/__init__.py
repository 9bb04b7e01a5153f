"""
FRFI-QKD - Fully Reference-Frame-Independent QKD toolkit

完全参考系无关量子密钥分发的密钥率计算与仿真工具
"""

__version__ = "0.1.0"
