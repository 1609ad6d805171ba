"""CSV tables and minimal SVG polyline plots."""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np


def write_table(path, columns: Sequence[str], data: np.ndarray) -> None:
    data = np.asarray(data, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(columns))
        for row in data:
            w.writerow([repr(float(v)) for v in row])


def read_table(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_svg_polyline(path, x, y, xlabel: str = "x", ylabel: str = "y",
                       width: int = 480, height: int = 360, pad: int = 40) -> None:
    """Unstyled polyline with the two axis labels."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    px = pad + (x - x0) * sx
    py = height - pad - (y - y0) * sy
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<polyline fill="none" stroke="black" points="{pts}"/>\n'
        f'<text x="{width / 2:.0f}" y="{height - 8}">{xlabel}</text>\n'
        f'<text x="8" y="{height / 2:.0f}">{ylabel}</text>\n'
        "</svg>\n"
    )
    with open(path, "w") as fh:
        fh.write(svg)
