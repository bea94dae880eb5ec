"""
FM Eval - 二值前景圖評估工具組

以 E-measure（Enhanced-alignment measure）為核心，並包含 F_β、IoU、Fbw 等傳統量測，
以及用來比較量測好壞的 meta-measure 基準測試工具。
"""

__version__ = "1.0.0"
__author__ = "FM Eval Team"
__description__ = "二值前景圖評估與 meta-measure 基準測試工具"
