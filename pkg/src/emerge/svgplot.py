"""Minimal deterministic SVG line charts: mean curve with a std band."""
from __future__ import annotations

from .analysis import GroupSignature

_MARGIN_L = 46.0
_MARGIN_R = 12.0
_MARGIN_T = 28.0
_MARGIN_B = 30.0


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_signature_svg(
    sig: GroupSignature,
    title: str = "",
    width: int = 720,
    height: int = 280,
    comment: str | None = None,
) -> str:
    mean = sig.mean_curve
    std = sig.std_curve
    upper = mean + std
    lower = mean - std
    y_min = float(lower.min())
    y_max = float(upper.max())
    if y_max <= y_min:
        y_min -= 1.0
        y_max += 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    n = sig.length

    def sx(i: int) -> float:
        return _MARGIN_L + (plot_w * i / (n - 1) if n > 1 else plot_w / 2)

    def sy(v: float) -> float:
        return _MARGIN_T + plot_h * (1.0 - (v - y_min) / (y_max - y_min))

    band_pts = [f"{_fmt(sx(i))},{_fmt(sy(float(upper[i])))}" for i in range(n)]
    band_pts += [f"{_fmt(sx(i))},{_fmt(sy(float(lower[i])))}" for i in range(n - 1, -1, -1)]
    mean_pts = [f"{_fmt(sx(i))},{_fmt(sy(float(mean[i])))}" for i in range(n)]

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if comment:
        parts.append(f"<!-- {comment} -->")
    parts += [
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<polygon points="{" ".join(band_pts)}" fill="#a6cbe3" fill-opacity="0.55" stroke="none"/>',
        f'<polyline points="{" ".join(mean_pts)}" fill="none" stroke="#1f5f8b" stroke-width="1.6"/>',
        f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(_MARGIN_T)}" x2="{_fmt(_MARGIN_L)}" '
        f'y2="{_fmt(height - _MARGIN_B)}" stroke="#444444" stroke-width="1"/>',
        f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(height - _MARGIN_B)}" '
        f'x2="{_fmt(width - _MARGIN_R)}" y2="{_fmt(height - _MARGIN_B)}" '
        f'stroke="#444444" stroke-width="1"/>',
        f'<text x="{_fmt(_MARGIN_L - 6)}" y="{_fmt(sy(y_max - pad))}" font-size="10" '
        f'font-family="sans-serif" text-anchor="end">{_fmt(y_max - pad)}</text>',
        f'<text x="{_fmt(_MARGIN_L - 6)}" y="{_fmt(sy(y_min + pad))}" font-size="10" '
        f'font-family="sans-serif" text-anchor="end">{_fmt(y_min + pad)}</text>',
        f'<text x="{_fmt(_MARGIN_L)}" y="{_fmt(height - _MARGIN_B + 14)}" font-size="10" '
        'font-family="sans-serif">0</text>',
        f'<text x="{_fmt(width - _MARGIN_R)}" y="{_fmt(height - _MARGIN_B + 14)}" '
        f'font-size="10" font-family="sans-serif" text-anchor="end">{n - 1}</text>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(_MARGIN_L)}" y="18" font-size="12" font-family="sans-serif" '
            f'font-weight="bold">{title} (n={sig.n_members})</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
