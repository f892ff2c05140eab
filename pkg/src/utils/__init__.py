"""
Utility modules for PVC-MC (logging, errors, config validation).
"""
