"""Additive zero-initialized style conditioning for token tensors.

Each injection site owns one injector: a two-layer projection from the style
space to the token dimension followed by a zero-initialized channel-mixing
map (a 1x1 convolution over tokens is exactly a per-token linear layer).
Because the final map starts at exactly zero, every injector is the identity
until training moves it, so a freshly assembled style branch reproduces its
source network bit for bit.
"""

from __future__ import annotations

import torch
import torch.nn as nn

from ..backbone.config import BackboneConfig
from .embedding import StyleEmbedding


class StyleInjector(nn.Module):
    def __init__(self, style_dim: int, token_dim: int, site: str, seed: int = 0):
        super().__init__()
        self.site = site
        self.style_dim = style_dim
        self.token_dim = token_dim
        self.proj = nn.Sequential(
            nn.Linear(style_dim, token_dim), nn.GELU(), nn.Linear(token_dim, token_dim))
        gen = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for layer in (self.proj[0], self.proj[2]):
                layer.weight.copy_(torch.randn(layer.weight.shape, generator=gen)
                                   * (1.0 / layer.weight.shape[1] ** 0.5))
                layer.bias.zero_()
        self.zero_map = nn.Linear(token_dim, token_dim)
        with torch.no_grad():
            self.zero_map.weight.zero_()
            self.zero_map.bias.zero_()

    def offset(self, z: StyleEmbedding) -> torch.Tensor:
        if z.dim != self.style_dim:
            raise ValueError(f"style embedding dim {z.dim} does not match "
                             f"injector input dim {self.style_dim}")
        return self.zero_map(self.proj(z.vec))

    def forward(self, tokens: torch.Tensor, z: StyleEmbedding) -> torch.Tensor:
        if tokens.shape[-1] != self.token_dim:
            raise ValueError(f"token dim {tokens.shape[-1]} does not match "
                             f"injector token dim {self.token_dim}")
        return tokens + self.offset(z)


def inject(injector: StyleInjector, tokens: torch.Tensor, z: StyleEmbedding) -> torch.Tensor:
    return injector(tokens, z)


class InjectionPlan(nn.Module):
    """One dedicated injector per site.

    ``head_sites`` index the retained layers whose tokens are conditioned on
    the way into the Gaussian head; ``aggregator_sites`` index layers whose
    incoming tokens are conditioned inside the style-branch aggregator
    (site 0 means before the first block).
    """

    def __init__(self, cfg: BackboneConfig, head_layers: tuple[int, ...] | list[int],
                 agg_layers: tuple[int, ...] | list[int], style_dim: int, seed: int = 0):
        super().__init__()
        head_sites = tuple(head_layers)
        agg_sites = tuple(agg_layers)
        if len(set(head_sites)) != len(head_sites) or len(set(agg_sites)) != len(agg_sites):
            raise ValueError("duplicate injection sites")
        for l in head_sites:
            if l not in cfg.head_layers:
                raise ValueError(f"head site {l} is not a retained layer {cfg.head_layers}")
        for l in agg_sites:
            if not 0 <= l < cfg.num_layers:
                raise ValueError(f"aggregator site {l} outside [0, {cfg.num_layers - 1}]")
        self.head_sites = head_sites
        self.aggregator_sites = agg_sites
        self.injectors = nn.ModuleDict()
        for kind, sites in (("head", head_sites), ("agg", agg_sites)):
            for l in sites:
                site = f"{kind}/{l}"
                self.injectors[site.replace("/", "_")] = StyleInjector(
                    style_dim, cfg.token_dim, site=site,
                    seed=seed + 1000 * (kind == "head") + l)

    def injector(self, kind: str, layer: int) -> StyleInjector:
        return self.injectors[f"{kind}_{layer}"]

    def aggregator_hook(self, z: StyleEmbedding):
        """Hook for Aggregator.forward conditioning the configured layers."""
        sites = set(self.aggregator_sites)

        def hook(layer: int, tokens: torch.Tensor) -> torch.Tensor:
            if layer in sites:
                return self.injector("agg", layer)(tokens, z)
            return tokens

        return hook

    def inject_head_tokens(self, tokens: dict[int, torch.Tensor],
                           z: StyleEmbedding) -> dict[int, torch.Tensor]:
        out = {}
        for layer, t in tokens.items():
            if layer in self.head_sites:
                out[layer] = self.injector("head", layer)(t, z)
            else:
                out[layer] = t
        return out


def make_plan(cfg: BackboneConfig, head_layers, agg_layers,
              style_dim: int, seed: int = 0) -> InjectionPlan:
    return InjectionPlan(cfg, head_layers, agg_layers, style_dim, seed)


def default_head_sites(cfg: BackboneConfig) -> tuple[int, ...]:
    """All retained layers, mirroring the full-scale config."""
    return cfg.head_layers


def default_agg_sites(cfg: BackboneConfig) -> tuple[int, ...]:
    """Pre-layer-0 plus the retained intermediate layers."""
    return tuple(sorted({0, *cfg.retained_layers}))
