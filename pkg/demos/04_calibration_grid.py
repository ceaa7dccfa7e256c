"""A small calibration run: rejection rates and KS distances per cell.

Set VARIATA_THREADS to use more workers; the table does not change.
"""
from variata import ExperimentGrid, run_grid, summarize

if __name__ == "__main__":
    grid = ExperimentGrid(scms=("M3", "M5"), sizes=(500, 2000), reps=10)
    summary = summarize(run_grid(grid), grid.alpha)
    cols = ["scm", "n", "interaction", "label", "rejection_rate", "ks_distance", "errors"]
    print(summary.frame()[cols].to_string(index=False))
