"""Ergonomic indoor layout generation: scoring, tokenization and sampling."""

from __future__ import annotations

import json
from typing import Any, Dict, List, Sequence

from . import _core
from ._core import GenerationFailure, InputError, MalformedSequence, ParseError

__version__ = _core.__version__

Room = Dict[str, Any]

__all__ = [
    "GenerationFailure",
    "InputError",
    "MalformedSequence",
    "ParseError",
    "categories",
    "codec_for",
    "decode",
    "encode",
    "generate",
    "intersection",
    "nucleus_sample",
    "nucleus_set",
    "render_svg",
    "score",
    "synth_corpus",
]


def categories() -> List[str]:
    """Category names of the built-in taxonomy, indexed by id."""
    return list(_core.categories())


def score(room: Room) -> Dict[str, Any]:
    """Ergonomic score, per-activity costs and the per-object gradient."""
    return json.loads(_core.score(json.dumps(room)))


def intersection(room: Room) -> Dict[str, Any]:
    """Scene intersection loss and its per-object gradient."""
    return json.loads(_core.intersection(json.dumps(room)))


def codec_for(w_min: float, w_max: float, d_min: float, d_max: float, resolution: int = 256) -> Dict[str, Any]:
    """Codec configuration for the built-in taxonomy and the given room bounds."""
    return json.loads(_core.codec_for(w_min, w_max, d_min, d_max, resolution))


def encode(room: Room, codec: Dict[str, Any]) -> List[int]:
    return list(_core.encode(json.dumps(room), json.dumps(codec)))


def decode(tokens: Sequence[int], codec: Dict[str, Any]) -> Room:
    return json.loads(_core.decode(list(tokens), json.dumps(codec)))


def synth_corpus(n: int, room_type: str = "bedroom", seed: int = 0) -> Dict[str, Any]:
    """Synthetic corpus as an interchange document."""
    return json.loads(_core.synth_corpus(n, room_type, seed))


def render_svg(room: Room) -> str:
    return _core.render_svg(json.dumps(room))


def nucleus_set(probs: Sequence[float], p: float = 0.9) -> List[int]:
    return list(_core.nucleus_set(list(probs), p))


def nucleus_sample(probs: Sequence[float], p: float = 0.9, seed: int = 0) -> int:
    return _core.nucleus_sample(list(probs), p, seed)


def generate(
    checkpoint: str,
    n: int,
    seed: int = 0,
    top_p: float = 0.9,
    collision_checks: bool = True,
    threads: int = 0,
) -> Dict[str, Any]:
    """Samples `n` scenes from a trained checkpoint."""
    return json.loads(_core.generate(checkpoint, n, seed, top_p, collision_checks, threads))
