"""Configuration for the toy feed-forward reconstruction backbone."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class BackboneConfig:
    """Sizes and layout of the aggregator trunk and its prediction heads.

    Defaults are a desk-scale analog of the full-size model (L=24, retained
    layers [4, 11, 17, 23]): six blocks with alternating per-view ("local")
    and all-view ("global") self-attention, retaining blocks {2, 4} plus the
    final block for the heads. All sizes scale up by config alone.
    """

    num_layers: int = 6
    token_dim: int = 128
    patch_size: int = 16
    image_size: int = 64
    retained_layers: tuple[int, ...] = (2, 4)
    num_heads: int = 4
    mlp_ratio: float = 2.0
    sh_degree: int = 0
    max_views: int = 8
    use_gt_cameras: bool = True
    # Per-layer attention pattern; None derives local/global alternation.
    layer_schedule: tuple[str, ...] | None = None
    init_depth: float = 3.0
    init_scale: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.num_layers < 2:
            raise ValueError("num_layers must be >= 2")
        if not self.retained_layers:
            raise ValueError("retained_layers must be non-empty")
        if self.image_size % self.patch_size != 0:
            raise ValueError(
                f"image_size {self.image_size} not divisible by patch_size {self.patch_size}")
        for l in self.retained_layers:
            if not 0 <= l < self.num_layers - 1:
                raise ValueError(f"retained layer {l} outside intermediate range "
                                 f"[0, {self.num_layers - 2}]")
        if self.layer_schedule is not None and len(self.layer_schedule) != self.num_layers:
            raise ValueError("layer_schedule length must equal num_layers")
        if not 0 <= self.sh_degree <= 3:
            raise ValueError(f"sh_degree must be in [0, 3], got {self.sh_degree}")

    @property
    def schedule(self) -> tuple[str, ...]:
        if self.layer_schedule is not None:
            return self.layer_schedule
        return tuple("local" if i % 2 == 0 else "global" for i in range(self.num_layers))

    @property
    def final_layer(self) -> int:
        return self.num_layers - 1

    @property
    def head_layers(self) -> tuple[int, ...]:
        """Retained intermediate layers plus the final layer, sorted."""
        return tuple(sorted(set(self.retained_layers) | {self.final_layer}))

    @property
    def patches_per_side(self) -> int:
        return self.image_size // self.patch_size

    @property
    def tokens_per_view(self) -> int:
        return self.patches_per_side ** 2

    @property
    def sh_coeff_count(self) -> int:
        return (self.sh_degree + 1) ** 2
