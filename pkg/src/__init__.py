"""
Source package for PVC-MC: partial multi-view clustering.

Pipeline modules live in subpackages (data, nn, objectives, impute, training,
clustering, metrics, experiment); MCP tools live under `src.tools`.
"""
