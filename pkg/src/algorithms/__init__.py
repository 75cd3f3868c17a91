"""IA アルゴリズム（NN / RNN / 従来型）"""

from .baseline import MinLeakageIa, run_min_leakage_ia
from .nn import NnIa
from .rnn import RnnIa

__all__ = ["MinLeakageIa", "NnIa", "RnnIa", "run_min_leakage_ia"]
