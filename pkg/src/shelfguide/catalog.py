"""Shopping-list resolution: normalize a product request, fuzzy-filter the
catalog stage by stage (brand, name, optional quantity) and rank what
survives.

The catalog is a newline-delimited UTF-8 file of JSON records with keys
`barcode`, `brand`, `product_name`, optional `quantity` and `image_urls`.
Text is normalized once at load time and kept alongside the raw form.
"""

from __future__ import annotations

import io
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np

BRAND_THRESHOLD = 0.60
NAME_THRESHOLD = 0.65
SHORTLIST_CHOICES = 3


class EmptyShortlist(LookupError):
    """No catalog entry survived every filter stage."""


class SelectionAborted(RuntimeError):
    """The selection callback declined every offered candidate."""


class NoUsableImages(LookupError):
    """The entry has no reference image that can be fetched and decoded."""


class SourceUnavailable(ConnectionError):
    """The image source failed in a retryable way (network, missing file)."""


def normalize_text(raw: str) -> str:
    """Lowercase, Unicode-normalize, strip punctuation, collapse whitespace.

    The result is a single-space-joined token sequence, so tokens are
    recoverable with `.split(" ")`.  Idempotent.
    """
    text = unicodedata.normalize("NFKC", raw).lower()
    text = unicodedata.normalize("NFKC", text)
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text)
    return " ".join(cleaned.split())


def _levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def fuzzy_similarity(a: str, b: str) -> float:
    """Token-sort Levenshtein ratio between two normalized strings.

    Tokens are sorted alphabetically and rejoined before the edit
    distance is taken, so word order never counts against a match:
    1 - distance / max(len).  The raw (unsorted) distance is also tried
    and the better of the two wins; a typo in a token's first letter
    reshuffles the sort order, and the raw form keeps such inputs from
    being scored as wholesale rewrites.  Symmetric, and exactly 1.0 iff
    the token-sorted forms agree.
    """
    sa = " ".join(sorted(a.split()))
    sb = " ".join(sorted(b.split()))
    if sa == sb:
        return 1.0
    longest = max(len(sa), len(sb))
    distance = min(_levenshtein(sa, sb), _levenshtein(a, b))
    return 1.0 - distance / longest


_DIGIT_ALPHA_BOUNDARY = re.compile(r"(?<=\d)(?=[a-z])|(?<=[a-z])(?=\d)")


def quantity_tokens(raw: str) -> frozenset[str]:
    """Tokenize a quantity string, splitting glued number/unit pairs.

    "12oz" and "12 oz" produce the same tokens; unit conversions are
    deliberately out of scope.
    """
    spaced = _DIGIT_ALPHA_BOUNDARY.sub(" ", normalize_text(raw))
    return frozenset(spaced.split())


@dataclass(frozen=True)
class ProductQuery:
    """A user's product request: brand, name, optional quantity."""

    brand: str
    name: str
    quantity: str | None = None

    def __post_init__(self):
        if not normalize_text(self.brand) or not normalize_text(self.name):
            raise ValueError("brand and name must be non-empty after normalization")

    @property
    def brand_norm(self) -> str:
        return normalize_text(self.brand)

    @property
    def name_norm(self) -> str:
        return normalize_text(self.name)


@dataclass(frozen=True)
class CatalogEntry:
    barcode: str
    brand: str
    name: str
    quantity: str | None = None
    image_refs: tuple[str, ...] = ()
    brand_norm: str = field(init=False)
    name_norm: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "brand_norm", normalize_text(self.brand))
        object.__setattr__(self, "name_norm", normalize_text(self.name))


@dataclass(frozen=True)
class Shortlist:
    """Filter survivors ranked by non-increasing aggregate score."""

    candidates: tuple[tuple[CatalogEntry, float], ...]
    selected: int | None = None

    def __len__(self) -> int:
        return len(self.candidates)

    def entries(self) -> list[CatalogEntry]:
        return [entry for entry, _ in self.candidates]


def load_catalog(path: str | Path) -> list[CatalogEntry]:
    """Read a newline-delimited JSON catalog file."""
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad catalog record: {exc}") from exc
            barcode = str(rec["barcode"])
            if barcode in seen:
                raise ValueError(f"{path}:{lineno}: duplicate barcode {barcode}")
            seen.add(barcode)
            entries.append(
                CatalogEntry(
                    barcode=barcode,
                    brand=rec["brand"],
                    name=rec["product_name"],
                    quantity=rec.get("quantity"),
                    image_refs=tuple(rec.get("image_urls", ())),
                )
            )
    return entries


def save_catalog(entries: Sequence[CatalogEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            rec = {
                "barcode": entry.barcode,
                "brand": entry.brand,
                "product_name": entry.name,
            }
            if entry.quantity is not None:
                rec["quantity"] = entry.quantity
            rec["image_urls"] = list(entry.image_refs)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def filter_catalog(query: ProductQuery, entries: Sequence[CatalogEntry]) -> Shortlist:
    """Run the staged filter pipeline and rank the survivors.

    Brand similarity >= 0.60 first, then name similarity >= 0.65, then
    (only when the query carries one) the quantity token filter.  The
    aggregate score is the mean of the per-stage similarities actually
    applied; ties break lexicographically by barcode.
    """
    use_quantity = query.quantity is not None
    query_qty = quantity_tokens(query.quantity) if use_quantity else frozenset()

    ranked = []
    for entry in entries:
        brand_sim = fuzzy_similarity(query.brand_norm, entry.brand_norm)
        if brand_sim < BRAND_THRESHOLD:
            continue
        name_sim = fuzzy_similarity(query.name_norm, entry.name_norm)
        if name_sim < NAME_THRESHOLD:
            continue
        stage_sims = [brand_sim, name_sim]
        if use_quantity:
            entry_qty = quantity_tokens(entry.quantity or "")
            if not query_qty <= entry_qty:
                continue
            stage_sims.append(1.0)
        score = sum(stage_sims) / len(stage_sims)
        ranked.append((entry, score))

    if not ranked:
        raise EmptyShortlist(
            f"no catalog entry matched brand={query.brand!r} name={query.name!r}"
        )
    ranked.sort(key=lambda pair: (-pair[1], pair[0].barcode))
    return Shortlist(candidates=tuple(ranked))


ChoiceProvider = Callable[[Sequence[CatalogEntry]], "int | None"]


def resolve_product(shortlist: Shortlist, choice_provider: ChoiceProvider) -> CatalogEntry:
    """Pick the final entry: auto-select a lone candidate, otherwise offer
    the top three to the callback."""
    if len(shortlist) == 0:
        raise EmptyShortlist("cannot resolve an empty shortlist")
    if len(shortlist) == 1:
        return shortlist.candidates[0][0]
    offered = shortlist.entries()[:SHORTLIST_CHOICES]
    choice = choice_provider(offered)
    if choice is None or not 0 <= choice < len(offered):
        raise SelectionAborted("no candidate accepted")
    return offered[choice]


class ImageSource(Protocol):
    def fetch(self, entry: CatalogEntry) -> list[np.ndarray]:
        """Fetch and decode every usable reference image for `entry`."""
        ...


def fetch_reference_images(entry: CatalogEntry, source: ImageSource) -> list[np.ndarray]:
    """Fetch the entry's reference images, failing the trial when none are
    usable."""
    if not entry.image_refs:
        raise NoUsableImages(f"{entry.barcode}: entry lists no reference images")
    images = source.fetch(entry)
    if not images:
        raise NoUsableImages(f"{entry.barcode}: no reference image could be decoded")
    return images


def _decode_image(data: bytes) -> np.ndarray:
    from PIL import Image

    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"))


class FixtureImageSource:
    """Reads reference images from `<root>/<barcode>/<basename(ref)>`.

    Mirrors remote URLs on disk by their basename, which keeps fixtures
    and live catalogs interchangeable.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def fetch(self, entry: CatalogEntry) -> list[np.ndarray]:
        images = []
        for ref in entry.image_refs:
            path = self.root / entry.barcode / Path(ref.split("/")[-1]).name
            try:
                data = path.read_bytes()
            except FileNotFoundError:
                continue
            except OSError as exc:
                raise SourceUnavailable(f"cannot read {path}: {exc}") from exc
            images.append(_decode_image(data))
        return images


class HttpImageSource:
    """Fetches reference images over HTTP.

    Refs are used verbatim when they are absolute URLs; otherwise they
    are expanded through `url_template`, which may reference `{barcode}`
    and `{filename}`.
    """

    def __init__(self, url_template: str | None = None, timeout: float = 10.0, client=None):
        import httpx

        self.url_template = url_template
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)

    def fetch(self, entry: CatalogEntry) -> list[np.ndarray]:
        import httpx

        images = []
        for ref in entry.image_refs:
            if ref.startswith(("http://", "https://")):
                url = ref
            elif self.url_template:
                url = self.url_template.format(barcode=entry.barcode, filename=ref)
            else:
                continue
            try:
                resp = self._client.get(url)
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                raise SourceUnavailable(f"GET {url} failed: {exc}") from exc
            images.append(_decode_image(resp.content))
        return images
