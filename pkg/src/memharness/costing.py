"""Convert measured resources and token usage into USD.

Occupancy charges (RAM, storage) are billed as GB-hours over the phase
duration; compute as vCPU-hours; network per GB transferred; tokens per
1k at model-specific rates. The default price sheet ships as a bundled
JSON config and every figure can be overridden.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingPrice
from .telemetry import CLOUD, EDGE, MetricsTable

CATEGORIES = ("compute", "ram", "storage", "network", "tokens")

# AWS Fargate us-east-1 style defaults; token prices are placeholders
# meant to be overridden per deployed model.
DEFAULT_PRICING = {
    "vcpu_per_hour": 0.04048,
    "ram_gb_per_hour": 0.004445,
    "storage_gb_per_hour": 0.000109,
    "network_per_gb": 0.09,
    "token_prices": {
        "mock-answerer": {"input_per_1k": 0.0, "output_per_1k": 0.0},
        "default": {"input_per_1k": 0.00015, "output_per_1k": 0.0006},
    },
}


@dataclass(frozen=True)
class PricingModel:
    vcpu_per_hour: float
    ram_gb_per_hour: float
    storage_gb_per_hour: float
    network_per_gb: float
    token_prices: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("vcpu_per_hour", "ram_gb_per_hour", "storage_gb_per_hour", "network_per_gb"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def token_price(self, model: str) -> dict:
        if model in self.token_prices:
            return self.token_prices[model]
        if "default" in self.token_prices:
            return self.token_prices["default"]
        raise MissingPrice(model)

    @classmethod
    def from_dict(cls, data: dict) -> "PricingModel":
        merged = {**DEFAULT_PRICING, **data}
        merged["token_prices"] = {
            **DEFAULT_PRICING["token_prices"],
            **data.get("token_prices", {}),
        }
        return cls(**merged)

    @classmethod
    def default(cls) -> "PricingModel":
        return cls.from_dict({})


def load_pricing(path: str | Path | None) -> PricingModel:
    if path is None:
        return PricingModel.default()
    return PricingModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class CostBreakdown:
    """USD per (tier, category); tiers are cloud and edge."""

    cells: dict = field(default_factory=dict)

    def cell(self, tier: str, category: str) -> float:
        return self.cells.get((tier, category), 0.0)

    def add(self, tier: str, category: str, usd: float) -> None:
        if usd < 0:
            raise ValueError("cost cells must be non-negative")
        self.cells[(tier, category)] = self.cells.get((tier, category), 0.0) + usd

    def tier_total(self, tier: str) -> float:
        return sum(v for (t, _), v in self.cells.items() if t == tier)

    @property
    def grand_total(self) -> float:
        return sum(self.cells.values())

    def as_dict(self) -> dict:
        return {
            "cells": {f"{tier}/{cat}": self.cell(tier, cat) for tier in (CLOUD, EDGE) for cat in CATEGORIES},
            "tier_totals": {tier: self.tier_total(tier) for tier in (CLOUD, EDGE)},
            "grand_total": self.grand_total,
        }


def compute_cost(
    table: MetricsTable,
    usage_by_tier: dict[str, dict[str, tuple[int, int]]],
    pricing: PricingModel,
) -> CostBreakdown:
    """Price a metrics table.

    `usage_by_tier` maps tier -> model -> (prompt_tokens, completion_tokens).
    """
    breakdown = CostBreakdown()
    for tier in (CLOUD, EDGE):
        breakdown.add(tier, "compute", 0.0)
        breakdown.add(tier, "ram", 0.0)
        breakdown.add(tier, "storage", 0.0)
        breakdown.add(tier, "network", 0.0)
        breakdown.add(tier, "tokens", 0.0)

    for row in table.rows:
        hours = row.duration_minutes / 60.0
        breakdown.add(row.tier, "compute", row.cpu_minutes / 60.0 * pricing.vcpu_per_hour)
        breakdown.add(row.tier, "ram", row.ram_mb / 1024.0 * hours * pricing.ram_gb_per_hour)
        breakdown.add(row.tier, "storage", row.disk_mb / 1024.0 * hours * pricing.storage_gb_per_hour)
        breakdown.add(row.tier, "network", row.network_mb / 1024.0 * pricing.network_per_gb)

    for tier, by_model in usage_by_tier.items():
        for model, (prompt_tokens, completion_tokens) in by_model.items():
            price = pricing.token_price(model)
            usd = (
                prompt_tokens / 1000.0 * price["input_per_1k"]
                + completion_tokens / 1000.0 * price["output_per_1k"]
            )
            breakdown.add(tier, "tokens", usd)
    return breakdown


def tco_compare(a: CostBreakdown, b: CostBreakdown) -> dict:
    """Relative deltas (b - a) / a per tier/category and in total.

    Positive means b costs more. A zero base yields None (undefined),
    never infinity.
    """

    def delta(base: float, other: float):
        if base == 0.0:
            return None
        return (other - base) / base

    return {
        "per_cell": {
            f"{tier}/{cat}": delta(a.cell(tier, cat), b.cell(tier, cat))
            for tier in (CLOUD, EDGE)
            for cat in CATEGORIES
        },
        "per_tier": {tier: delta(a.tier_total(tier), b.tier_total(tier)) for tier in (CLOUD, EDGE)},
        "total": delta(a.grand_total, b.grand_total),
    }


def cost_chart_svg(breakdowns: dict[str, CostBreakdown], floor_usd: float = 1e-6) -> str:
    """Grouped bar chart of tier/category costs on a log value axis."""
    import math

    names = list(breakdowns)
    bars = []
    for name in names:
        for tier in (CLOUD, EDGE):
            for cat in CATEGORIES:
                bars.append((name, tier, cat, breakdowns[name].cell(tier, cat)))
    top = max((v for *_, v in bars), default=floor_usd)
    top = max(top, floor_usd * 10)
    log_floor, log_top = math.log10(floor_usd), math.log10(top)

    width, height, margin = 900, 360, 50
    plot_h = height - 2 * margin
    bar_w = (width - 2 * margin) / max(len(bars), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{margin}" y="20" font-size="14">cost per tier and category (USD, log scale)</text>',
    ]
    colors = {CLOUD: "#4878cf", EDGE: "#ee854a"}
    for i, (name, tier, cat, value) in enumerate(bars):
        frac = 0.0
        if value > floor_usd:
            frac = (math.log10(value) - log_floor) / (log_top - log_floor)
        h = max(1.0, frac * plot_h)
        x = margin + i * bar_w
        y = height - margin - h
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w * 0.8:.1f}" height="{h:.1f}" '
            f'fill="{colors[tier]}"><title>{name} {tier}/{cat}: ${value:.6f}</title></rect>'
        )
        parts.append(
            f'<text x="{x + bar_w * 0.4:.1f}" y="{height - margin + 12}" font-size="7" '
            f'text-anchor="middle">{cat}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
