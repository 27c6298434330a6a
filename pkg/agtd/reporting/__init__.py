from .render import FORMATS, SCHEMAS, Report, load_report, render_all, render_report, report_frame, to_report

__all__ = [
    "FORMATS",
    "SCHEMAS",
    "Report",
    "load_report",
    "render_all",
    "render_report",
    "report_frame",
    "to_report",
]
