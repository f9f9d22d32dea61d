"""qgres-plot: render trajectory panel images from a JSON spec.

    qgres-plot --panels spec.json --out figs/
"""

from __future__ import annotations

import argparse
import sys

from .panels import PanelError, load_spec, render_panels


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qgres-plot",
        description="Render resonance-trajectory panels to PNG files.")
    parser.add_argument("--panels", required=True, metavar="FILE",
                        help="JSON panel spec; data paths resolve relative to it")
    parser.add_argument("--out", required=True, metavar="DIR",
                        help="directory for the rendered images")
    parser.add_argument("--dpi", type=int, default=150)
    opts = parser.parse_args(argv)

    import matplotlib

    matplotlib.use("Agg")
    try:
        spec = load_spec(opts.panels)
        paths, (t_min, t_max) = render_panels(spec, opts.out, dpi=opts.dpi)
    except PanelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    print(f"shared t range: [{t_min:g}, {t_max:g}]", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
