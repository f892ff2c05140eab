"""
Configuration package for PVC-MC.

Runtime settings from the environment, experiment config files and the
report template.
"""
