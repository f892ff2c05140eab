"""
MCP tool modules for PVC-MC.

experiment_ops holds the FastMCP tools registered by server.py: sweeps,
single training runs, label evaluation and synthetic data.
"""
