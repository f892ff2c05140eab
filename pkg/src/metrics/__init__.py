"""
Hungarian-matched accuracy and normalized mutual information.
"""

from src.metrics.hungarian import hungarian
from src.metrics.scores import ContingencyTable, acc, contingency_table, nmi

__all__ = ["hungarian", "ContingencyTable", "contingency_table", "acc", "nmi"]
