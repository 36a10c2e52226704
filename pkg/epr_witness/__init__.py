"""EPR Witness - 가우시안 EPR 상태의 얽힘 증인 (HBT 간섭, Stokes 파라미터, 호모다인 검출)"""

__version__ = "1.0.0"
