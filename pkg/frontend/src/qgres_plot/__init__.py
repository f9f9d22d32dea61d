from .panels import PanelError, PanelSpec, load_spec, read_report, read_trajectory, render_panels

__all__ = [
    "PanelError",
    "PanelSpec",
    "load_spec",
    "read_report",
    "read_trajectory",
    "render_panels",
]

__version__ = "0.1.0"
