"""Plus-space cusp forms, their twisted central L-values, and resonator
statistics over fundamental-discriminant families."""

from . import arith, dseries, halfint, lfun, modforms, qseries, resonance

__version__ = "0.1.0"
__all__ = ["arith", "dseries", "halfint", "lfun", "modforms", "qseries",
           "resonance"]
