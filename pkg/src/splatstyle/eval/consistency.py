"""Multi-view consistency scoring over rendered frame sequences.

Frames t and t-1 measure short-range agreement, frames t and t-7 long-range
(gaps configurable for clips shorter than the canonical 16 frames). Each
pair warps the earlier frame into the later one and scores masked RMSE over
pixels that are both covered by the warp and opaque in the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch

from ..core.cameras import CameraModel
from ..renderer import RenderOutput
from .warping import ALPHA_VALID, warp_by_depth


@dataclass
class PairScore:
    target: int
    source: int
    rmse: float
    valid_fraction: float


@dataclass
class ConsistencyReport:
    short_pairs: list[PairScore]
    long_pairs: list[PairScore]
    short_gap: int
    long_gap: int

    @property
    def short_range(self) -> float | None:
        return _mean_over_covered(self.short_pairs)

    @property
    def long_range(self) -> float | None:
        return _mean_over_covered(self.long_pairs)

    def to_dict(self) -> dict:
        return {
            "short_gap": self.short_gap,
            "long_gap": self.long_gap,
            "short_range_rmse": self.short_range,
            "long_range_rmse": self.long_range,
            "short_pairs": [vars(p) for p in self.short_pairs],
            "long_pairs": [vars(p) for p in self.long_pairs],
        }


def _mean_over_covered(pairs: list["PairScore"]) -> float | None:
    """Range mean over pairs that had any overlap (empty pairs score nan)."""
    covered = [p.rmse for p in pairs if not math.isnan(p.rmse)]
    if not covered:
        return None
    return sum(covered) / len(covered)


def masked_rmse(warped: torch.Tensor, target: torch.Tensor,
                mask: torch.Tensor) -> tuple[float, float]:
    """RMSE over masked pixels (all channels); returns (rmse, valid fraction)."""
    frac = float(mask.float().mean())
    if not bool(mask.any()):
        return math.nan, 0.0
    diff = (warped - target)[mask]
    return float(torch.sqrt((diff ** 2).mean())), frac


def _score_pair(renders: list[RenderOutput], cams: list[CameraModel],
                t: int, gap: int) -> PairScore:
    src_idx = t - gap
    warped, valid = warp_by_depth(renders[src_idx], cams[src_idx], cams[t])
    mask = valid & (renders[t].alpha > ALPHA_VALID)
    rmse, frac = masked_rmse(warped, renders[t].color, mask)
    return PairScore(target=t, source=src_idx, rmse=rmse, valid_fraction=frac)


def consistency_metric(renders: list[RenderOutput], cams: list[CameraModel],
                       short_gap: int = 1, long_gap: int = 7) -> ConsistencyReport:
    if len(renders) != len(cams):
        raise ValueError(f"{len(renders)} renders for {len(cams)} cameras")
    n = len(renders)
    if n < short_gap + 1:
        raise ValueError(f"need at least {short_gap + 1} frames, got {n}")
    short_pairs = [_score_pair(renders, cams, t, short_gap) for t in range(short_gap, n)]
    long_pairs = []
    if n >= long_gap + 1:
        long_pairs = [_score_pair(renders, cams, t, long_gap) for t in range(long_gap, n)]
    return ConsistencyReport(short_pairs=short_pairs, long_pairs=long_pairs,
                             short_gap=short_gap, long_gap=long_gap)


class MetricRegistry:
    """Named evaluation metrics over (renders, references)."""

    def __init__(self):
        self._metrics: dict[str, object] = {}

    def register(self, name: str, fn) -> None:
        if name in self._metrics:
            raise ValueError(f"metric {name!r} is already registered")
        self._metrics[name] = fn

    def evaluate(self, name: str, renders, refs):
        if name not in self._metrics:
            raise KeyError(f"unknown metric {name!r}; available: "
                           f"{sorted(self._metrics)}")
        return self._metrics[name](renders, refs)

    def names(self) -> list[str]:
        return sorted(self._metrics)


def _rmse_metric(renders, refs) -> float:
    total, count = 0.0, 0
    for out, ref in zip(renders, refs):
        mask = (out.alpha > ALPHA_VALID) if hasattr(out, "alpha") else torch.ones(
            out.color.shape[:2], dtype=torch.bool)
        rmse, _ = masked_rmse(out.color, ref.color if hasattr(ref, "color") else ref, mask)
        if not math.isnan(rmse):
            total += rmse
            count += 1
    return total / max(count, 1)


def _pretrained_scorer_stub(kind: str):
    def stub(renders, refs):
        raise NotImplementedError(
            f"{kind} needs a pretrained scoring model; register a real "
            f"implementation under this name to enable it")
    return stub


def default_registry() -> MetricRegistry:
    registry = MetricRegistry()
    registry.register("masked_rmse", _rmse_metric)
    registry.register("artfid", _pretrained_scorer_stub("artfid"))
    registry.register("artscore", _pretrained_scorer_stub("artscore"))
    return registry
