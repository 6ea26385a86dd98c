"""Tiling, QC filters, magnification-matched crop/resize, and raster plumbing.

Slides are flat RGB rasters with a known micrometers-per-pixel scale.
Physical size is tracked through TileSpec (um, px) pairs so that imagery
produced at one magnification can be re-rastered to match a classifier
trained at another.
"""

from __future__ import annotations

import functools
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage as ndi


@dataclass(frozen=True)
class TileSpec:
    """Square tile geometry: physical width in micrometers, raster width in pixels."""

    um: float
    px: int

    def __post_init__(self):
        if not self.um > 0:
            raise ValueError(f"tile physical width must be positive, got {self.um}")
        if self.px < 8:
            raise ValueError(f"tile raster width must be >= 8 px, got {self.px}")


@dataclass
class QCParams:
    gray_delta: int = 13          # max channel spread (8-bit counts) still "gray"
    gray_frac: float = 0.8        # reject when this share of pixels is gray
    blur_sigma: float = 3.0
    blur_threshold: float = 0.02  # reject when sharpness statistic falls below
    tissue_frac: float = 0.5      # reject when tissue coverage falls below

    def __post_init__(self):
        if not 0 <= self.gray_delta <= 255:
            raise ValueError("gray_delta must be within 0..255")
        for name in ("gray_frac", "tissue_frac"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.blur_sigma <= 0:
            raise ValueError("blur_sigma must be positive")
        if self.blur_threshold <= 0:
            raise ValueError("blur_threshold must be positive")


@dataclass
class QCReport:
    tile_id: str
    gray_fraction: float
    blur_variance: float
    tissue_fraction: float
    accepted: bool
    reject_reasons: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "tile": self.tile_id,
            "gray_fraction": self.gray_fraction,
            "blur_variance": self.blur_variance,
            "tissue_fraction": self.tissue_fraction,
            "accepted": self.accepted,
            "reject_reasons": list(self.reject_reasons),
        }


def _require_rgb8(pixels: np.ndarray) -> np.ndarray:
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) RGB array, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image is empty")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {arr.dtype}")
    return arr


def to_grayscale(pixels: np.ndarray) -> np.ndarray:
    """BT.601 luminance in [0, 1]: (0.299 R + 0.587 G + 0.114 B) / 255."""
    arr = _require_rgb8(pixels).astype(np.float64)
    return (0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]) / 255.0


def luma_histogram(luma: np.ndarray) -> np.ndarray:
    """256-bin histogram of a [0, 1] luminance map (bin = round(luma * 255))."""
    q = np.clip(np.floor(np.asarray(luma) * 255.0 + 0.5), 0, 255).astype(np.int64)
    return np.bincount(q.ravel(), minlength=256)


def otsu_threshold(histogram) -> int:
    """Threshold t in 0..255 maximizing between-class variance w0*w1*(mu0-mu1)^2.

    Class 0 is bins 0..t, class 1 is bins t+1..255. The comparison runs in
    exact integer arithmetic so ties are exact; a tie is broken by the floor
    of the mean of all maximizing thresholds.
    """
    h = np.asarray(histogram)
    if h.shape != (256,):
        raise ValueError("histogram must have exactly 256 bins")
    if np.any(h < 0):
        raise ValueError("histogram counts must be non-negative")
    counts = [int(c) for c in h]
    total = sum(counts)
    if total == 0 or sum(1 for c in counts if c > 0) < 2:
        raise ValueError("degenerate histogram: need at least two populated bins")
    total_sum = sum(i * c for i, c in enumerate(counts))

    # Between-class variance at t is (s0*w1 - s1*w0)^2 / (N^2 * w0 * w1);
    # N^2 is constant, so compare (diff^2, w0*w1) pairs by cross-multiplication.
    best_num, best_den = -1, 1
    best_ts: list[int] = []
    w0 = 0
    s0 = 0
    for t in range(256):
        w0 += counts[t]
        s0 += t * counts[t]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            num, den = 0, 1
        else:
            diff = s0 * w1 - (total_sum - s0) * w0
            num, den = diff * diff, w0 * w1
        lhs = num * best_den
        rhs = best_num * den
        if lhs > rhs:
            best_num, best_den = num, den
            best_ts = [t]
        elif lhs == rhs:
            best_ts.append(t)
    return sum(best_ts) // len(best_ts)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(4.0 * sigma)
    i = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(i * i) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(gray: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with radius ceil(4*sigma) and mirrored edges.

    Mirroring repeats the edge sample (half-sample symmetric), which is what
    makes the filter conserve the map mean exactly.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    arr = np.asarray(gray, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D grayscale map")
    k = _gaussian_kernel(sigma)
    out = ndi.correlate1d(arr, k, axis=0, mode="reflect")
    return ndi.correlate1d(out, k, axis=1, mode="reflect")


_LAPLACIAN4 = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)


def laplacian4(gray: np.ndarray) -> np.ndarray:
    """4-neighbor Laplacian with mirrored edges."""
    arr = np.asarray(gray, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D grayscale map")
    return ndi.correlate(arr, _LAPLACIAN4, mode="reflect")


def blur_variance(gray: np.ndarray, sigma: float) -> float:
    """Sharpness statistic: mean square of the sigma-smoothed Laplacian magnitude.

    The per-pixel field gaussian_blur(|laplacian4(map)|, sigma) is the focus
    field; its second moment is the tile-level score. Defocused content
    collapses the Laplacian magnitude everywhere, so low values mean blur;
    tiles scoring below QCParams.blur_threshold are flagged blurry.
    """
    arr = np.asarray(gray, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError("map must be at least 3x3")
    focus = gaussian_blur(np.abs(laplacian4(arr)), sigma)
    return float(np.mean(focus * focus))


def validate_polygon(poly: np.ndarray) -> np.ndarray:
    """Check a polygon is usable: >= 3 distinct vertices, no self-intersection."""
    pts = np.asarray(poly, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("polygon must be an (n, 2) array of vertices")
    if len(pts) >= 2 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]  # explicit closing vertex is optional
    if len(pts) < 3:
        raise ValueError("polygon needs at least 3 distinct vertices")
    n = len(pts)
    segs = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent segments share an endpoint by design
            if _segments_cross(*segs[i], *segs[j]):
                raise ValueError(f"polygon self-intersects between edges {i} and {j}")
    return pts


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return False


def point_in_polygon(x: float, y: float, poly: np.ndarray) -> bool:
    """Even-odd ray-casting point-in-polygon test."""
    inside = False
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        if (y1 > y) != (y0 > y):
            xi = x0 + (y - y0) / (y1 - y0) * (x1 - x0)
            if x < xi:
                inside = not inside
        x0, y0 = x1, y1
    return inside


@dataclass
class SlideRaster:
    """A slide held in memory as a flat raster plus its physical scale."""

    pixels: np.ndarray
    mpp: float
    rois: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.pixels = _require_rgb8(self.pixels)
        if not self.mpp > 0:
            raise ValueError(f"mpp must be positive, got {self.mpp}")
        self.rois = [validate_polygon(p) for p in self.rois]

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


def load_rois(path: str | Path) -> list[np.ndarray]:
    """ROI file: JSON list of polygons, each a list of [x, y] pixel coordinates."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise ValueError("ROI file must contain a JSON list of polygons")
    return [validate_polygon(np.asarray(p, dtype=np.float64)) for p in doc]


def tile_grid(slide: SlideRaster, spec: TileSpec) -> list[tuple[int, int]]:
    """Non-overlapping tile origins; stride equals the tile span in pixels.

    Tiles lie fully inside the slide. With ROIs present only tiles whose
    center falls inside some polygon are kept. A slide smaller than one tile
    yields an empty list.
    """
    stride = int(spec.um / slide.mpp)
    if stride < 1:
        raise ValueError("tile physical width is below one slide pixel")
    if stride > slide.width or stride > slide.height:
        return []
    origins = [
        (x, y)
        for y in range(0, slide.height - stride + 1, stride)
        for x in range(0, slide.width - stride + 1, stride)
    ]
    if slide.rois:
        half = stride / 2.0
        origins = [
            (x, y)
            for x, y in origins
            if any(point_in_polygon(x + half, y + half, poly) for poly in slide.rois)
        ]
    return origins


def tile_span_px(slide: SlideRaster, spec: TileSpec) -> int:
    return int(spec.um / slide.mpp)


def slide_tissue_threshold(slide: SlideRaster, thumb_stride: int = 16) -> int:
    """Otsu threshold of the slide-level luminance histogram at thumbnail stride."""
    thumb = slide.pixels[::thumb_stride, ::thumb_stride]
    return otsu_threshold(luma_histogram(to_grayscale(thumb)))


def tissue_fraction(pixels: np.ndarray, threshold: int) -> float:
    """Share of pixels in the dark (tissue) Otsu class: quantized luma <= threshold."""
    q = np.clip(np.floor(to_grayscale(pixels) * 255.0 + 0.5), 0, 255)
    return float(np.mean(q <= threshold))


def qc_tile(
    pixels: np.ndarray, params: QCParams, tissue_frac: float, tile_id: str = ""
) -> QCReport:
    """Apply the background, blur, and tissue-coverage filters to one tile."""
    arr = _require_rgb8(pixels)
    spread = arr.max(axis=2).astype(np.int64) - arr.min(axis=2).astype(np.int64)
    gray_fraction = float(np.mean(spread <= params.gray_delta))
    blur = blur_variance(to_grayscale(arr), params.blur_sigma)
    reasons = []
    if gray_fraction >= params.gray_frac:
        reasons.append("grayscale")
    if blur < params.blur_threshold:
        reasons.append("blur")
    if tissue_frac < params.tissue_frac:
        reasons.append("tissue")
    return QCReport(
        tile_id=tile_id,
        gray_fraction=gray_fraction,
        blur_variance=blur,
        tissue_fraction=float(tissue_frac),
        accepted=not reasons,
        reject_reasons=tuple(reasons),
    )


def crop_geometry(src: TileSpec, dst: TileSpec) -> tuple[int, int]:
    """Centered crop side and top-left offset for a src -> dst magnification match.

    Side is round-half-up of dst.um/src.um * src.px; the centering offset
    floors. dst must not be physically wider than src.
    """
    if dst.um > src.um:
        raise ValueError(
            f"cannot crop outward: destination {dst.um} um exceeds source {src.um} um"
        )
    side = int(math.floor(dst.um / src.um * src.px + 0.5))
    side = max(side, 1)
    return side, (src.px - side) // 2


@functools.lru_cache(maxsize=64)
def _resize_axis_plan(n_src: int, n_dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = (np.arange(n_dst) + 0.5) * (n_src / n_dst) - 0.5
    x = np.clip(x, 0.0, n_src - 1.0)
    lo = np.floor(x).astype(np.int64)
    hi = np.minimum(lo + 1, n_src - 1)
    return lo, hi, (x - lo).astype(np.float32)


def _lerp_rows(flat: np.ndarray, n_dst: int) -> np.ndarray:
    """Interpolate axis 0 of a (rows, anything) matrix to n_dst rows."""
    lo, hi, frac = _resize_axis_plan(flat.shape[0], n_dst)
    w1 = frac[:, None]
    return flat[lo] * (np.float32(1.0) - w1) + flat[hi] * w1


def _resize_bilinear(img: np.ndarray, out_px: int) -> np.ndarray:
    """Bilinear resample to out_px x out_px, pixel-center aligned.

    Interpolation runs in single precision (row pass, transpose, column
    pass); equal-size inputs pass through byte-identical.
    """
    h, w = img.shape[:2]
    if h == out_px and w == out_px:
        return img.copy()
    was_uint8 = img.dtype == np.uint8
    channels = img.shape[2] if img.ndim == 3 else 1
    src = img.astype(np.float32).reshape(h, w * channels)
    rows = _lerp_rows(src, out_px)
    pivot = np.ascontiguousarray(rows.reshape(out_px, w, channels).swapaxes(0, 1))
    cols = _lerp_rows(pivot.reshape(w, out_px * channels), out_px)
    out = cols.reshape(out_px, out_px, channels).swapaxes(0, 1)
    if img.ndim == 2:
        out = out.reshape(out_px, out_px)
    if was_uint8:
        return np.floor(np.clip(out, 0, 255) + np.float32(0.5)).astype(np.uint8)
    return out.astype(img.dtype)


def center_crop_resize(pixels: np.ndarray, src: TileSpec, dst: TileSpec) -> np.ndarray:
    """Center-crop to the destination physical width, then resample to dst.px."""
    arr = _require_rgb8(pixels)
    if arr.shape[0] != src.px or arr.shape[1] != src.px:
        raise ValueError(
            f"image is {arr.shape[1]}x{arr.shape[0]} but source spec says {src.px} px square"
        )
    side, offset = crop_geometry(src, dst)
    window = arr[offset : offset + side, offset : offset + side]
    return _resize_bilinear(window, dst.px)


def merge_trio(images: list[np.ndarray]) -> np.ndarray:
    """Concatenate three equal-height rasters left to right."""
    if len(images) != 3:
        raise ValueError(f"expected exactly 3 images, got {len(images)}")
    arrs = [_require_rgb8(im) for im in images]
    heights = {a.shape[0] for a in arrs}
    if len(heights) != 1:
        raise ValueError(f"heights differ: {sorted(a.shape[0] for a in arrs)}")
    return np.concatenate(arrs, axis=1)


def png_encode(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(_require_rgb8(pixels), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_decode(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"could not decode PNG stream: {exc}") from exc


def load_raster(path: str | Path) -> np.ndarray:
    """Read a PNG/TIFF image file into an RGB8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def extract_tiles(
    slide: SlideRaster,
    slide_id: str,
    spec: TileSpec,
    params: QCParams,
    out_dir: str | Path,
) -> list[QCReport]:
    """Tile a slide, QC every tile, and write accepted tiles plus a JSONL index.

    Accepted tiles land as <slide>_<x>_<y>.png resampled to spec.px; the index
    <slide>_index.jsonl records the QC outcome for every grid position.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threshold = slide_tissue_threshold(slide)
    span = tile_span_px(slide, spec)
    reports = []
    with (out / f"{slide_id}_index.jsonl").open("w", encoding="utf-8") as index:
        for x, y in tile_grid(slide, spec):
            raw = slide.pixels[y : y + span, x : x + span]
            tile = _resize_bilinear(raw, spec.px)
            report = qc_tile(
                tile, params, tissue_fraction(tile, threshold), f"{slide_id}_{x}_{y}"
            )
            reports.append(report)
            if report.accepted:
                (out / f"{report.tile_id}.png").write_bytes(png_encode(tile))
            index.write(json.dumps({"x": x, "y": y, **report.to_json()}) + "\n")
    return reports
