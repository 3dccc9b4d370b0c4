"""Two-decimal number formatting shared by prompts and output serialization."""

from __future__ import annotations


def fmt_num(value: float) -> str:
    """Render a number with exactly two decimals, normalizing -0.00 to 0.00."""
    rounded = round(float(value), 2) + 0.0
    return f"{rounded:.2f}"
