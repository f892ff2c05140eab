"""
Markdown report template for experiment sweeps.

Rows are metrics, columns are paired fractions, cells are "mean±std" at
four decimals. The file carries no timestamps or wall times so that two runs
of the same config render byte-identical reports.
"""

REPORT_TEMPLATE = """# PVC-MC experiment report

- Dataset: {DATASET}
- Clusters: {N_CLUSTERS}
- Repeats per paired fraction: {REPEATS}
- Base seed: {BASE_SEED}
- Hyperparameters: {HYPERPARAMETERS}

## Results (mean±std over repeats)

{RESULTS_TABLE}

## Final view weights (mean over repeats)

{WEIGHTS_TABLE}

## Decisions in effect

{DECISIONS}
"""

CELL_FORMAT = "{mean:.4f}±{std:.4f}"
FAILED_FORMAT = "FAILED({reason})"


def get_report_template() -> str:
    """Returns the markdown report template."""
    return REPORT_TEMPLATE


__all__ = ["REPORT_TEMPLATE", "CELL_FORMAT", "FAILED_FORMAT", "get_report_template"]
