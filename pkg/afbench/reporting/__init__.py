from afbench.reporting.figures import plot_confusion, plot_spectrogram_triptych, plot_sweep
from afbench.reporting.tables import (
    load_report,
    merge_reports,
    render_html,
    render_markdown,
    write_report,
)

__all__ = [
    "load_report",
    "merge_reports",
    "plot_confusion",
    "plot_spectrogram_triptych",
    "plot_sweep",
    "render_html",
    "render_markdown",
    "write_report",
]
