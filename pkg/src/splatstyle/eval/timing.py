"""Wall-time shape of the stylization pathways.

Three costs worth comparing: a cold reconstruct+stylize, a warm-cache
stylize through the full style branch, and a warm-cache stylize through the
head-only branch. Geometry caching means warm calls skip the frozen branch
entirely, and the head-only variant also skips the copied aggregator, so
cold > full-warm > head-warm should hold whenever the involved forward
passes are non-trivial.
"""

from __future__ import annotations

import copy
import statistics
import time

import torch

from ..backbone.network import Backbone
from ..model import DualBranchModel
from ..style.embedding import StyleEmbedding
from ..style.injector import default_agg_sites, default_head_sites, make_plan


def _timed(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def measure_latency_shape(backbone: Backbone, images, cams, z: StyleEmbedding,
                          repeats: int = 5) -> dict[str, float]:
    """Median seconds for cold / full-warm / head-warm stylization."""
    cfg = backbone.cfg
    full = DualBranchModel(copy.deepcopy(backbone),
                           make_plan(cfg, default_head_sites(cfg), default_agg_sites(cfg),
                                     style_dim=z.dim),
                           variant="full")
    head = DualBranchModel(copy.deepcopy(backbone),
                           make_plan(cfg, default_head_sites(cfg), (), style_dim=z.dim),
                           variant="head_only")

    def cold():
        full.clear_cache()
        with torch.no_grad():
            full.stylize(full.reconstruct(images, cams), z)

    full.clear_cache()
    with torch.no_grad():
        warm_cache_full = full.reconstruct(images, cams)
        warm_cache_head = head.reconstruct(images, cams)

    def full_warm():
        with torch.no_grad():
            full.stylize(warm_cache_full, z)

    def head_warm():
        with torch.no_grad():
            head.stylize(warm_cache_head, z)

    # warm-up pass so first-call allocation noise stays out of the medians
    cold(); full_warm(); head_warm()
    return {
        "cold_reconstruct_stylize_s": _timed(cold, repeats),
        "full_warm_stylize_s": _timed(full_warm, repeats),
        "head_only_warm_stylize_s": _timed(head_warm, repeats),
    }
