"""Spatial-language answers for navigation and correction.

Two backends share one answer type: a deterministic geometric reasoner
that derives phrases straight from frame/grid coordinates, and an
optional remote multimodal-model client that sends a templated prompt
plus the frame to a chat-completion endpoint and parses the short-form
reply.  The remote path always falls back to the geometric one rather
than blocking a session.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import os
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

from .guidance import (
    H_ZONE_NAMES,
    V_ZONE_NAMES,
    CorrectionAdvice,
    CorrectionMode,
    ZoneGrid,
    correction_phrase,
    hop_vector,
    zone_of,
)

log = logging.getLogger(__name__)

ENV_URL = "SHELF_REASONER_URL"
ENV_KEY = "SHELF_REASONER_KEY"
ENV_MODEL = "SHELF_REASONER_MODEL"

DEFAULT_TIMEOUT_S = 10.0
MAX_RETRIES = 2


class QueryKind(Enum):
    NAVIGATION = "navigation"
    CORRECTION = "correction"


class AnswerSource(Enum):
    GEOMETRIC = "geometric"
    REMOTE = "remote"


class TargetUnknown(LookupError):
    """Navigation query lacks a usable target bounding box."""


class CellUnknown(LookupError):
    """Correction query lacks the touched or target cell."""


class EndpointError(ConnectionError):
    """The remote endpoint failed after retries."""


class UnparseableReply(ValueError):
    """The model reply contains no single admissible phrase."""


@dataclass(frozen=True)
class SpatialQuery:
    kind: QueryKind
    target_name: str
    frame_size: tuple[int, int] = (1280, 720)
    target_bbox: tuple[float, float, float, float] | None = None
    target_cell: tuple[int, int] | None = None
    touched_name: str | None = None
    touched_cell: tuple[int, int] | None = None
    image: np.ndarray | None = None

    def __post_init__(self):
        if self.kind is QueryKind.CORRECTION and self.touched_cell is None:
            raise ValueError("correction queries must carry the touched cell")
        if self.kind is QueryKind.NAVIGATION and self.touched_cell is not None:
            raise ValueError("navigation queries must not carry a touched cell")


@dataclass(frozen=True)
class ReasonerAnswer:
    text: str
    parsed: tuple[str, str] | CorrectionAdvice
    source: AnswerSource


def geometric_navigate(query: SpatialQuery) -> ReasonerAnswer:
    """Zone phrase from the target bbox center, e.g. "far right, lower"."""
    if query.target_bbox is None:
        raise TargetUnknown(f"no bounding box for {query.target_name!r}")
    x, y, w, h = query.target_bbox
    center = (x + w / 2.0, y + h / 2.0)
    zone = zone_of(center, ZoneGrid(*query.frame_size))
    return ReasonerAnswer(text=f"{zone[0]}, {zone[1]}", parsed=zone, source=AnswerSource.GEOMETRIC)


def geometric_correct(query: SpatialQuery) -> ReasonerAnswer:
    """Correction phrase from touched/target shelf cells."""
    if query.target_cell is None or query.touched_cell is None:
        raise CellUnknown("correction needs both touched and target cells")
    advice = correction_phrase(hop_vector(query.touched_cell, query.target_cell))
    return ReasonerAnswer(text=advice.phrase, parsed=advice, source=AnswerSource.GEOMETRIC)


# --- prompt templates -------------------------------------------------------

def load_templates(path: str | None = None) -> dict:
    """Load the versioned prompt template set shipped with the package."""
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    data = resources.files("shelfguide").joinpath("data").joinpath("prompts_v1.json")
    return json.loads(data.read_text(encoding="utf-8"))


def build_prompt(query: SpatialQuery, templates: dict) -> str:
    """Deterministic template fill for the remote model.

    Navigation prompts enumerate all 15 admissible zone labels; correction
    prompts state the fine/coarse hop boundary.  Both embed the template
    set's fixed worked examples, so identical queries produce identical
    prompts byte for byte.
    """
    if query.kind is QueryKind.NAVIGATION:
        spec = templates["navigation"]
        labels = ", ".join(f"{h}, {v}" for h in H_ZONE_NAMES for v in V_ZONE_NAMES)
        body = spec["instruction"].format(target=query.target_name, labels=labels)
    else:
        spec = templates["correction"]
        body = spec["instruction"].format(
            target=query.target_name,
            touched=query.touched_name or "the touched product",
        )
    shots = "\n".join(
        f"Example {i}:\n{shot['situation']}\nAnswer: {shot['answer']}"
        for i, shot in enumerate(spec["examples"], start=1)
    )
    return f"{body}\n\n{shots}\n\nAnswer:"


# --- reply grammar ----------------------------------------------------------

_H_ALT = "far left|far right|left|right|middle"
_V_ALT = "upper|center|lower"
_ZONE_RE = re.compile(rf"\b({_H_ALT})\s*,\s*({_V_ALT})\b")
_NUM = r"(one|two|three|four|1|2|3|4)"
_COL_RE = rf"{_NUM} products? to the (left|right)"
_ROW_RE = rf"{_NUM} products? (up|down)"
_FINE_RE = re.compile(
    rf"\b(?:{_COL_RE}(?:\s*,\s*{_ROW_RE})?|{_ROW_RE})\b"
)
_COARSE_RE = re.compile(r"\bfar (left|right|up|down)\b")
_CONFIRM_RE = re.compile(r"\btarget product reached\b")

_WORD_TO_INT = {"one": 1, "two": 2, "three": 3, "four": 4, "1": 1, "2": 2, "3": 3, "4": 4}


def _canonicalize(text: str) -> str:
    text = text.lower()
    text = text.replace("centre", "center")
    text = re.sub(r"(?<=[a-z])-(?=[a-z])", " ", text)  # "far-left" -> "far left"
    return re.sub(r"\s+", " ", text)


def parse_reply(text: str) -> tuple[str, str] | CorrectionAdvice:
    """Extract the single admissible phrase from a model reply.

    Case-insensitive; tolerates surrounding prose and a few synonyms.
    Raises UnparseableReply unless exactly one zone label, hop phrase,
    coarse descriptor or confirmation remains.
    """
    canon = _canonicalize(text)

    matches: list[tuple[int, int, object]] = []
    taken: list[tuple[int, int]] = []

    def claim(pattern: re.Pattern, build) -> None:
        for m in pattern.finditer(canon):
            span = m.span()
            if any(s < span[1] and span[0] < e for s, e in taken):
                continue
            taken.append(span)
            matches.append((span[0], span[1], build(m)))

    claim(_ZONE_RE, lambda m: (m.group(1), m.group(2)))
    claim(_FINE_RE, lambda m: _fine_advice(m))
    claim(_CONFIRM_RE, lambda m: CorrectionAdvice(CorrectionMode.CONFIRMED, (0, 0), "Target product reached"))
    claim(_COARSE_RE, lambda m: CorrectionAdvice(CorrectionMode.COARSE, None, f"far {m.group(1)}"))

    if len(matches) != 1:
        raise UnparseableReply(
            f"expected exactly one admissible phrase, found {len(matches)} in {text!r}"
        )
    return matches[0][2]


def _fine_advice(m: re.Match) -> CorrectionAdvice:
    col_n, col_dir, row_n, row_dir, solo_n, solo_dir = m.groups()
    d_col = 0
    d_row = 0
    if col_n:
        d_col = _WORD_TO_INT[col_n] * (-1 if col_dir == "left" else 1)
    if row_n:
        d_row = _WORD_TO_INT[row_n] * (-1 if row_dir == "up" else 1)
    if solo_n:
        d_row = _WORD_TO_INT[solo_n] * (-1 if solo_dir == "up" else 1)
    return correction_phrase((d_col, d_row))


# --- remote client ----------------------------------------------------------

@dataclass(frozen=True)
class EndpointConfig:
    url: str
    model: str
    api_key: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S

    @classmethod
    def from_env(cls) -> "EndpointConfig | None":
        url = os.environ.get(ENV_URL)
        if not url:
            return None
        return cls(
            url=url,
            model=os.environ.get(ENV_MODEL, "gpt-4o-mini"),
            api_key=os.environ.get(ENV_KEY),
        )


def _encode_png(image: np.ndarray) -> str:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def remote_reason(
    prompt: str,
    image: np.ndarray,
    endpoint: EndpointConfig,
    client=None,
) -> ReasonerAnswer:
    """POST prompt + frame to an OpenAI-compatible multimodal endpoint.

    Retries transient failures up to twice, then raises EndpointError;
    replies that defeat the grammar raise UnparseableReply.
    """
    import httpx

    body = {
        "model": endpoint.model,
        "messages": [
            {
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt},
                    {
                        "type": "image_url",
                        "image_url": {"url": f"data:image/png;base64,{_encode_png(image)}"},
                    },
                ],
            }
        ],
    }
    headers = {}
    if endpoint.api_key:
        headers["Authorization"] = f"Bearer {endpoint.api_key}"

    own_client = client is None
    client = client or httpx.Client(timeout=endpoint.timeout_s)
    try:
        last_error: Exception | None = None
        for _ in range(1 + MAX_RETRIES):
            try:
                resp = client.post(endpoint.url, json=body, headers=headers)
                resp.raise_for_status()
                reply = resp.json()["choices"][0]["message"]["content"]
                return ReasonerAnswer(
                    text=reply, parsed=parse_reply(reply), source=AnswerSource.REMOTE
                )
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                if isinstance(exc, UnparseableReply):
                    raise
                last_error = exc
        raise EndpointError(f"remote reasoner failed after retries: {last_error}")
    finally:
        if own_client:
            client.close()


class GeometricReasoner:
    """Pure-geometry reasoner; the evaluation default."""

    def navigate(self, query: SpatialQuery) -> ReasonerAnswer:
        return geometric_navigate(query)

    def correct(self, query: SpatialQuery) -> ReasonerAnswer:
        return geometric_correct(query)


class RemoteReasoner:
    """Remote-model reasoner with guaranteed geometric fallback."""

    def __init__(self, endpoint: EndpointConfig, templates: dict | None = None, client=None):
        self.endpoint = endpoint
        self.templates = templates if templates is not None else load_templates()
        self.client = client
        self._fallback = GeometricReasoner()

    def navigate(self, query: SpatialQuery) -> ReasonerAnswer:
        return self._ask(query, self._fallback.navigate)

    def correct(self, query: SpatialQuery) -> ReasonerAnswer:
        return self._ask(query, self._fallback.correct)

    def _ask(self, query: SpatialQuery, fallback) -> ReasonerAnswer:
        image = query.image
        if image is None:
            log.warning("remote reasoner query has no image; using geometric answer")
            return fallback(query)
        prompt = build_prompt(query, self.templates)
        try:
            return remote_reason(prompt, image, self.endpoint, client=self.client)
        except (EndpointError, UnparseableReply) as exc:
            log.warning("remote reasoner failed (%s); using geometric answer", exc)
            return fallback(query)
