"""Shelf geometry, camera model and frame synthesis.

The shelf front is the world plane z = 0: x runs along the shelf width
(centered on 0), y runs up from the bottom tier base.  The camera sits
on an arc of radius r at the given azimuth, level with the middle of the
product extent, looking at the shelf center; pan/tilt offsets support
the close-range sweep protocol.  Products render as flat front-face
rectangles carrying three horizontal color stripes, which is exactly the
structure the banded histogram matcher keys on.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field
from functools import cached_property
from math import cos, radians, sin, tan

import numpy as np

from ..inventory import SHELF_PRESENTATION, shelf_items

FRAME_WIDTH = 1280
FRAME_HEIGHT = 720
HFOV_DEG = 84.0
FOCAL_PX = (FRAME_WIDTH / 2.0) / tan(radians(HFOV_DEG / 2.0))
CAMERA_HEIGHT_M = 0.48  # chest-strap mount, level with the shelf's mid extent

BACKGROUND_RGB = (38, 38, 42)
HAND_RGB = (224, 172, 105)
HAND_RADIUS_PX = 9

# Physical footprint (width, height) in meters per size class.
SIZE_CLASSES = {
    "small": (0.07, 0.11),
    "medium": (0.10, 0.14),
    "large": (0.13, 0.16),
}

PACKAGING_CLASSES = ("box", "bottle", "can")


_STRIPE_VALUES = (0.95, 0.72, 0.50)  # brightness encodes stripe position


def stripe_palette(index: int, count: int = 18) -> np.ndarray:
    """Three stripe colors for product `index`, each unique shelf-wide.

    Hue separates products; brightness separates the top/middle/bottom
    stripes, so any single visible stripe identifies both the product and
    which band of it is showing.  That keeps partially clipped crops
    classifiable.
    """
    base = (index * 360.0 / count) % 360.0
    stripes = []
    for k in range(3):
        hue = (base + 7.0 * k) % 360.0
        r, g, b = colorsys.hsv_to_rgb(hue / 360.0, 0.85, _STRIPE_VALUES[k])
        stripes.append((round(r * 255), round(g * 255), round(b * 255)))
    return np.array(stripes, dtype=np.float64)


@dataclass(frozen=True)
class ShelfProduct:
    barcode: str
    label: str
    size_class: str
    packaging: str
    stripes: tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]

    @property
    def size_m(self) -> tuple[float, float]:
        return SIZE_CLASSES[self.size_class]

    @property
    def stripe_array(self) -> np.ndarray:
        return np.array(self.stripes, dtype=np.float64)


@dataclass(frozen=True)
class ShelfSpec:
    tiers: int = 3
    slots_per_tier: int = 6
    width_m: float = 1.5
    tier_spacing_m: float = 0.4
    products: dict[tuple[int, int], ShelfProduct] = field(default_factory=dict)

    def __post_init__(self):
        expected = {
            (t, s) for t in range(self.tiers) for s in range(self.slots_per_tier)
        }
        if set(self.products) != expected:
            raise ValueError("products must fill exactly tiers x slots cells")
        barcodes = [p.barcode for p in self.products.values()]
        if len(set(barcodes)) != len(barcodes):
            raise ValueError("shelf products must be distinct")

    @property
    def slot_width_m(self) -> float:
        return self.width_m / self.slots_per_tier

    def cells(self) -> list[tuple[int, int]]:
        return sorted(self.products)

    def cell_of(self, barcode: str) -> tuple[int, int]:
        for cell, product in self.products.items():
            if product.barcode == barcode:
                return cell
        raise KeyError(f"barcode {barcode} not on shelf")

    def product_for(self, barcode: str) -> ShelfProduct:
        return self.products[self.cell_of(barcode)]

    def world_rect(self, cell: tuple[int, int]) -> tuple[float, float, float, float]:
        """Front-face rectangle (x_left, y_bottom, width, height) in meters.

        Tier 0 is the top tier; slot 0 is the leftmost as seen from the
        camera side.
        """
        tier, slot = cell
        product = self.products[cell]
        w, h = product.size_m
        x_center = -self.width_m / 2.0 + (slot + 0.5) * self.slot_width_m
        y_bottom = (self.tiers - 1 - tier) * self.tier_spacing_m
        return x_center - w / 2.0, y_bottom, w, h


def default_shelf() -> ShelfSpec:
    """The 18-product evaluation shelf: 3 tiers x 6 slots."""
    items = shelf_items()
    products = {}
    for idx, item in enumerate(items):
        cell = (idx // 6, idx % 6)
        size_class, packaging = SHELF_PRESENTATION[(item.brand, item.name)]
        palette = stripe_palette(idx)
        products[cell] = ShelfProduct(
            barcode=item.barcode,
            label=f"{item.brand} {item.name}",
            size_class=size_class,
            packaging=packaging,
            stripes=tuple(tuple(int(v) for v in row) for row in palette),
        )
    return ShelfSpec(products=products)


@dataclass(frozen=True)
class CameraPose:
    radius_m: float
    azimuth_deg: float = 0.0
    height_m: float = CAMERA_HEIGHT_M
    pan_deg: float = 0.0  # extra yaw; positive pans toward the shelf's right
    tilt_deg: float = 0.0  # extra pitch; positive tilts up

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("camera radius must be positive")


def camera_basis(pose: CameraPose) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(eye, right, up, forward) unit vectors for a pose."""
    az = radians(pose.azimuth_deg)
    eye = np.array([pose.radius_m * sin(az), pose.height_m, pose.radius_m * cos(az)])
    look = np.array([0.0, pose.height_m, 0.0])
    fwd = _normalize(look - eye)

    if pose.pan_deg:
        fwd = _rotate_y(fwd, -radians(pose.pan_deg))
    if pose.tilt_deg:
        right = _normalize(np.cross(fwd, np.array([0.0, 1.0, 0.0])))
        fwd = _rotate_axis(fwd, right, radians(pose.tilt_deg))

    right = _normalize(np.cross(fwd, np.array([0.0, 1.0, 0.0])))
    up = np.cross(right, fwd)
    return eye, right, up, fwd


def project_points(pose: CameraPose, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pinhole projection; returns pixel coordinates and forward depth."""
    eye, right, up, fwd = camera_basis(pose)
    rel = np.atleast_2d(points) - eye
    x_c = rel @ right
    y_c = rel @ up
    z_c = rel @ fwd
    with np.errstate(divide="ignore", invalid="ignore"):
        u = FRAME_WIDTH / 2.0 + FOCAL_PX * x_c / z_c
        v = FRAME_HEIGHT / 2.0 - FOCAL_PX * y_c / z_c
    return np.stack([u, v], axis=-1), z_c


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _rotate_y(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = cos(angle), sin(angle)
    return np.array([v[0] * c + v[2] * s, v[1], -v[0] * s + v[2] * c])


def _rotate_axis(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    c, s = cos(angle), sin(angle)
    return v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1 - c)


@dataclass(frozen=True)
class ProductTruth:
    """Ground truth for one product in one frame."""

    cell: tuple[int, int]
    barcode: str
    label: str
    quad_px: np.ndarray  # (4, 2) projected corners, tl/tr/br/bl
    bbox: tuple[float, float, float, float] | None  # visible, clipped to frame
    full_bbox: tuple[float, float, float, float] | None
    occlusion_fraction: float
    out_of_view: bool
    frontal_area_px: float  # head-on pixel area at this radius (noise proxy)
    obliquity_deg: float  # pose-level approach angle (noise proxy)

    @property
    def center(self) -> tuple[float, float] | None:
        if self.bbox is None:
            return None
        x, y, w, h = self.bbox
        return (x + w / 2.0, y + h / 2.0)


@dataclass(frozen=True)
class SyntheticFrame:
    """One rendered observation of the shelf plus its ground truth."""

    shelf: ShelfSpec
    pose: CameraPose
    frame_idx: int
    truths: tuple[ProductTruth, ...]
    hand: tuple[float, float] | None = None

    @cached_property
    def image(self) -> np.ndarray:
        return render_frame(self)

    @property
    def size(self) -> tuple[int, int]:
        return (FRAME_WIDTH, FRAME_HEIGHT)

    def visible_truths(self) -> list[ProductTruth]:
        return [t for t in self.truths if not t.out_of_view]

    def truth_for(self, barcode: str) -> ProductTruth:
        for truth in self.truths:
            if truth.barcode == barcode:
                return truth
        raise KeyError(f"barcode {barcode} not in frame")

    def frame_key(self) -> tuple:
        """Stable identity of this observation for seeded noise draws."""
        p = self.pose
        return (p.radius_m, p.azimuth_deg, p.pan_deg, p.tilt_deg, self.frame_idx)


def project_shelf(
    shelf: ShelfSpec,
    pose: CameraPose,
    frame_idx: int = 0,
    hand: tuple[float, float] | None = None,
) -> SyntheticFrame:
    """Project every product's front face into image space.

    Products fully outside the frame (or behind the camera) are marked
    out of view; partially clipped ones keep their visible bbox and an
    occlusion fraction.  Front faces are coplanar, so products never
    occlude each other; clipping is the only occlusion source.
    """
    eye, _, _, _ = camera_basis(pose)
    behind_plane = eye[2] <= 0.0  # product fronts are one-sided

    truths = []
    for cell in shelf.cells():
        product = shelf.products[cell]
        x0, y0, w, h = shelf.world_rect(cell)
        corners = np.array(
            [
                [x0, y0 + h, 0.0],  # top-left
                [x0 + w, y0 + h, 0.0],  # top-right
                [x0 + w, y0, 0.0],  # bottom-right
                [x0, y0, 0.0],  # bottom-left
            ]
        )
        uv, z = project_points(pose, corners)
        frontal_area = (FOCAL_PX * w / pose.radius_m) * (FOCAL_PX * h / pose.radius_m)
        obliquity = abs(pose.azimuth_deg)

        if behind_plane or np.any(z <= 1e-9):
            truths.append(
                ProductTruth(cell, product.barcode, product.label, uv, None, None,
                             1.0, True, frontal_area, obliquity)
            )
            continue

        fx0, fy0 = uv[:, 0].min(), uv[:, 1].min()
        fx1, fy1 = uv[:, 0].max(), uv[:, 1].max()
        full = (fx0, fy0, fx1 - fx0, fy1 - fy0)
        cx0, cy0 = max(fx0, 0.0), max(fy0, 0.0)
        cx1, cy1 = min(fx1, float(FRAME_WIDTH)), min(fy1, float(FRAME_HEIGHT))
        if cx1 <= cx0 or cy1 <= cy0:
            truths.append(
                ProductTruth(cell, product.barcode, product.label, uv, None, full,
                             1.0, True, frontal_area, obliquity)
            )
            continue

        visible = (cx0, cy0, cx1 - cx0, cy1 - cy0)
        full_area = full[2] * full[3]
        occlusion = 1.0 - (visible[2] * visible[3]) / full_area if full_area > 0 else 1.0
        truths.append(
            ProductTruth(cell, product.barcode, product.label, uv, visible, full,
                         occlusion, False, frontal_area, obliquity)
        )
    return SyntheticFrame(shelf=shelf, pose=pose, frame_idx=frame_idx,
                          truths=tuple(truths), hand=hand)


def render_frame(frame: SyntheticFrame) -> np.ndarray:
    """Rasterize the frame: striped product quads over a dark background."""
    from PIL import Image, ImageDraw

    img = Image.new("RGB", (FRAME_WIDTH, FRAME_HEIGHT), BACKGROUND_RGB)
    draw = ImageDraw.Draw(img)

    for truth in frame.truths:
        if truth.out_of_view:
            continue
        product = frame.shelf.products[truth.cell]
        x0, y0, w, h = frame.shelf.world_rect(truth.cell)
        for k in range(3):  # stripe 0 is the top band
            band_top = y0 + h * (3 - k) / 3.0
            band_bottom = y0 + h * (2 - k) / 3.0
            corners = np.array(
                [
                    [x0, band_top, 0.0],
                    [x0 + w, band_top, 0.0],
                    [x0 + w, band_bottom, 0.0],
                    [x0, band_bottom, 0.0],
                ]
            )
            uv, z = project_points(frame.pose, corners)
            if np.any(z <= 1e-9):
                continue
            draw.polygon([tuple(pt) for pt in uv], fill=product.stripes[k])

    if frame.hand is not None:
        hx, hy = frame.hand
        draw.ellipse(
            [hx - HAND_RADIUS_PX, hy - HAND_RADIUS_PX,
             hx + HAND_RADIUS_PX, hy + HAND_RADIUS_PX],
            fill=HAND_RGB,
        )
    return np.asarray(img)
