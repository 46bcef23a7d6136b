"""Point sets with sample values: loading, validation and bounding geometry.

Three on-disk formats are understood:

* ``csv``: one row per point, ``d`` coordinate columns followed by one value
  column, comma separated. Lines starting with ``#`` are skipped.
* ``xyz``: the same column convention, whitespace separated.
* ``pgm``: portable graymap (P2 ASCII or P5 binary, maxval <= 65535). Pixel
  ``(i, j)`` (column ``i``, row ``j``) of a ``W x H`` image becomes the point
  ``((i + 0.5) / W, (j + 0.5) / H)`` with value ``gray / maxval``.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

EPS_BOX = 1e-12


class PointSetError(ValueError):
    """Base class for point set errors."""


class ParseError(PointSetError):
    """Raised when an input file does not parse under its declared format."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PointSetError):
    """Raised when parsed data violates the point set invariants."""


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim(self):
        return self.lower.shape[0]

    @property
    def edges(self):
        return self.upper - self.lower

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)


@dataclass
class PointSet:
    """Distinct data sites in R^d with one real sample value per site.

    Parameters
    ----------
    coords : array_like, shape (N, d)
        Site coordinates. A 1D array is read as N sites in one dimension.
    values : array_like, shape (N,)
        Sample values.
    image_shape : tuple of int, optional
        ``(H, W)`` when the points are the pixel centers of an image in
        row-major order. Used to write per-pixel outputs back as images.
    """

    coords: np.ndarray
    values: np.ndarray
    image_shape: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise ValidationError("coords must have shape (N, d) with d >= 1")
        if coords.shape[0] == 0:
            raise ValidationError("point set is empty")
        if coords.shape[0] != values.shape[0]:
            raise ValidationError(
                f"{coords.shape[0]} sites but {values.shape[0]} values")
        if not np.all(np.isfinite(coords)):
            raise ValidationError("non-finite coordinate")
        if not np.all(np.isfinite(values)):
            raise ValidationError("non-finite sample value")
        dup = _first_duplicate(coords)
        if dup is not None:
            raise ValidationError(
                f"duplicate coordinates at rows {dup[0]} and {dup[1]}")
        self.coords = coords
        self.values = values

    @property
    def dim(self):
        return self.coords.shape[1]

    @property
    def count(self):
        return self.coords.shape[0]

    def __len__(self):
        return self.count

    def permuted(self, perm):
        """Return the point set with rows reordered as ``rows[perm]``."""
        perm = np.asarray(perm)
        return PointSet(self.coords[perm], self.values[perm])

    def with_values(self, values):
        out = PointSet.__new__(PointSet)
        out.coords = self.coords
        out.values = np.asarray(values, dtype=np.float64).reshape(self.count)
        out.image_shape = self.image_shape
        return out


def _first_duplicate(coords):
    order = np.lexsort(coords.T[::-1])
    srt = coords[order]
    same = np.all(srt[1:] == srt[:-1], axis=1)
    if not same.any():
        return None
    k = int(np.argmax(same))
    a, b = sorted((int(order[k]), int(order[k + 1])))
    return a, b


# ---------------------------------------------------------------------------
# loading and saving


def load_points(path, format=None, dim=None):
    """Load a :class:`PointSet` from ``path``.

    ``format`` defaults to the file extension. ``dim`` is required for csv
    and xyz input and ignored for pgm (always 2).
    """
    if format is None:
        format = os.path.splitext(str(path))[1].lstrip(".").lower()
    format = format.lower()
    if format == "pgm":
        with open(path, "rb") as fh:
            return read_pgm(fh.read())
    if format not in ("csv", "xyz"):
        raise ValueError(f"unknown point format {format!r}")
    if dim is None or dim < 1:
        raise ValueError("dim >= 1 is required for csv/xyz input")
    with open(path, "r") as fh:
        text = fh.read()
    return parse_table(text, dim, delimiter="," if format == "csv" else None)


def parse_table(text, dim, delimiter=","):
    """Parse csv (``delimiter=','``) or whitespace separated text."""
    ncols = dim + 1
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=delimiter,
                          comments="#", ndmin=2, dtype=np.float64)
        if data.size and data.shape[1] != ncols:
            raise ValueError
    except ValueError:
        _locate_parse_error(text, ncols, delimiter)
        raise ParseError("malformed table")
    if data.shape[0] == 0 or data.size == 0:
        raise ValidationError("point set is empty")
    return PointSet(data[:, :dim], data[:, dim])


def _locate_parse_error(text, ncols, delimiter):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split(delimiter)
        if len(fields) != ncols:
            raise ParseError(
                f"expected {ncols} columns, found {len(fields)}", lineno)
        for f in fields:
            try:
                float(f)
            except ValueError:
                raise ParseError(f"cannot parse {f.strip()!r} as a number",
                                 lineno) from None


def save_points(ps, path, format="csv"):
    """Write ``ps`` as csv or xyz with round-trip exact float formatting."""
    table = np.column_stack([ps.coords, ps.values])
    delim = "," if format == "csv" else " "
    np.savetxt(path, table, fmt="%.17g", delimiter=delim)


def read_pgm(data):
    """Parse P2/P5 graymap bytes into a gridded :class:`PointSet`."""
    tokens = []
    pos = 0
    n = len(data)
    # header: magic, width, height, maxval, with '#' comments
    while len(tokens) < 4:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ParseError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported PGM magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("malformed PGM header") from None
    if width < 1 or height < 1:
        raise ValidationError("empty image")
    if not 0 < maxval <= 65535:
        raise ParseError(f"maxval {maxval} outside 1..65535")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos) \
            if len(data) - pos >= count * np.dtype(dtype).itemsize else None
        if raw is None:
            raise ParseError("truncated PGM raster")
        gray = raw.astype(np.float64)
    else:
        body = data[pos:].split()
        if len(body) < count:
            raise ParseError("truncated PGM raster")
        try:
            gray = np.array([int(t) for t in body[:count]], dtype=np.float64)
        except ValueError:
            raise ParseError("non-integer PGM sample") from None
    if np.any(gray > maxval):
        raise ParseError("PGM sample exceeds maxval")
    return image_to_points(gray.reshape(height, width) / maxval)


def image_to_points(image):
    """Map a (H, W) array to pixel-center points in the unit square."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    jj, ii = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    coords = np.column_stack([(ii.ravel() + 0.5) / w, (jj.ravel() + 0.5) / h])
    ps = PointSet(coords, image.ravel())
    ps.image_shape = (h, w)
    return ps


def write_pgm(path, image, maxval=255):
    """Write a (H, W) array of integers in [0, maxval] as binary PGM."""
    image = np.asarray(image)
    h, w = image.shape
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    pixels = np.clip(np.rint(image), 0, maxval).astype(dtype)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(pixels.tobytes())


# ---------------------------------------------------------------------------
# geometry


def bounding_box(ps, eps_box=EPS_BOX):
    """Smallest cube containing all sites, centered on their tight hull.

    The longest hull edge is kept exactly; the other axes are widened
    symmetrically to the same length so that dyadic subdivision produces
    congruent cells. A degenerate hull is widened to edge ``eps_box``
    (relative to the coordinate magnitude when that exceeds 1, so the box
    stays wider than the floating-point spacing).
    """
    coords = ps.coords if isinstance(ps, PointSet) else np.atleast_2d(ps)
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    edges = hi - lo
    edge = float(edges.max())
    if edge <= 0.0:
        edge = eps_box * max(1.0, float(np.abs(coords).max()))
    lower = np.empty_like(lo)
    upper = np.empty_like(hi)
    for m in range(lo.shape[0]):
        if edges[m] == edge:
            lower[m], upper[m] = lo[m], hi[m]
        else:
            c = 0.5 * (lo[m] + hi[m])
            lower[m] = min(c - 0.5 * edge, lo[m])
            upper[m] = lower[m] + edge
            if upper[m] < hi[m]:
                lower[m] = hi[m] - edge
                upper[m] = hi[m]
    return AxisBox(lower, upper)


def uniformity_stats(ps, tree=None):
    """Separation radius and a fill distance estimate.

    The separation radius is half the minimum pairwise distance, found
    exactly with a k-d tree. The fill distance is estimated as the largest
    distance from a leaf-cell center of ``tree`` (built with unit leaf
    capacity if not given) to its nearest site.
    """
    if ps.count < 2:
        raise ValueError("uniformity_stats needs at least two points")
    kd = cKDTree(ps.coords)
    dist, _ = kd.query(ps.coords, k=2)
    separation = 0.5 * float(dist[:, 1].min())
    if tree is None:
        from .tree import build_tree
        tree = build_tree(ps, leaf_capacity=1)
    leaves = tree.leaves()
    centers = tree.box_lower(leaves) + 0.5 * tree.cell_edge(leaves)[:, None]
    fill_dist, _ = kd.query(centers, k=1)
    fill = float(fill_dist.max())
    return {"fill_distance_estimate": fill,
            "separation_radius": separation,
            "ratio": fill / separation}
