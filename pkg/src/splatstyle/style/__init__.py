from .embedding import (
    NEUTRAL_PROMPT,
    StyleEmbedding,
    StyleSignal,
    ToyStyleProvider,
    embed,
    interpolate,
    neutral_embedding,
)
from .injector import (
    InjectionPlan,
    StyleInjector,
    default_agg_sites,
    default_head_sites,
    inject,
    make_plan,
)

__all__ = [
    "NEUTRAL_PROMPT",
    "InjectionPlan",
    "StyleEmbedding",
    "StyleInjector",
    "StyleSignal",
    "ToyStyleProvider",
    "default_agg_sites",
    "default_head_sites",
    "embed",
    "inject",
    "interpolate",
    "make_plan",
    "neutral_embedding",
]
