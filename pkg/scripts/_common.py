"""Shared helpers for the figure scripts."""

import argparse
from pathlib import Path


def parser(doc):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--out", type=Path, default=Path("figures"), help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-plot", action="store_true", help="write CSV only")
    return p


def pyplot(args):
    """``matplotlib.pyplot`` with a file backend, or ``None`` when unavailable or disabled."""
    if args.no_plot:
        return None
    try:
        import matplotlib
    except ImportError:
        print("matplotlib not installed; writing CSV only")
        return None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt
