"""Traversability maps built by clustering a raw intensity image.

A mission region is described by a single-channel intensity grid (values in
[0, 1], one value per square cell). Unsupervised clustering splits the
intensities into k groups; the lowest-centroid group is coastal area, the
highest is open water, anything in between is uncertain terrain whose
traversability is only known as a probability.

Cell convention: ``values[row, col]`` where ``col`` indexes x and ``row``
indexes y, both increasing. A point (x, y) in metres falls into cell
``(int(y // cell_size), int(x // cell_size))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Traversability labels.
COAST = 0
WATER = 1
UNCERTAIN = 2

# Traversability cell values for the two certain classes. Uncertain cells get
# a per-cell probability drawn from the configured band.
COAST_VALUE = 0.0
WATER_VALUE = 1.0

# Default uncertain-traversability band (lo, hi]; the wide variant (0, 0.8]
# is selected through configuration.
DEFAULT_BAND = (0.0, 0.03)


@dataclass
class IntensityGrid:
    """Raw single-channel map image on a square-cell grid."""

    width: int
    height: int
    cell_size: float
    values: np.ndarray  # shape (height, width), float in [0, 1]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"(height, width) = ({self.height}, {self.width})"
            )
        if self.width <= 0 or self.height <= 0:
            raise ValueError("grid must be nonempty")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")

    @property
    def extent(self) -> tuple[float, float]:
        """(x_max, y_max) in metres; the grid spans [0, x_max) x [0, y_max)."""
        return (self.width * self.cell_size, self.height * self.cell_size)


@dataclass
class ClusterModel:
    """Result of k-means on the intensity values."""

    k: int
    centroids: np.ndarray        # (k,) sorted ascending
    inertia: float               # final sum of squared distances
    objective_trace: list[float] = field(default_factory=list)

    def assign(self, values: np.ndarray) -> np.ndarray:
        """Nearest-centroid label for each value (labels index `centroids`)."""
        v = np.asarray(values, dtype=float)
        return np.abs(v[..., None] - self.centroids).argmin(axis=-1)


@dataclass
class TraversabilityGrid:
    """Classified map: coast cells are 0, water cells are 1, uncertain cells
    carry a probability from the configured band."""

    width: int
    height: int
    cell_size: float
    values: np.ndarray   # (height, width) float
    labels: np.ndarray   # (height, width) int8, COAST/WATER/UNCERTAIN

    @property
    def extent(self) -> tuple[float, float]:
        return (self.width * self.cell_size, self.height * self.cell_size)

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        return (int(y // self.cell_size), int(x // self.cell_size))

    def in_bounds(self, x: float, y: float) -> bool:
        ex, ey = self.extent
        return 0.0 <= x < ex and 0.0 <= y < ey

    def value_at(self, x: float, y: float) -> float:
        if not self.in_bounds(x, y):
            raise ValueError(f"point ({x}, {y}) outside grid extent {self.extent}")
        r, c = self.cell_index(x, y)
        return float(self.values[r, c])

    def is_water(self, x: float, y: float) -> bool:
        if not self.in_bounds(x, y):
            return False
        r, c = self.cell_index(x, y)
        return int(self.labels[r, c]) == WATER

    def values_at_batch(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorised value lookup; out-of-bounds points read as coast (0)."""
        ex, ey = self.extent
        inb = (x >= 0.0) & (x < ex) & (y >= 0.0) & (y < ey)
        c = np.clip((x // self.cell_size).astype(int), 0, self.width - 1)
        r = np.clip((y // self.cell_size).astype(int), 0, self.height - 1)
        out = self.values[r, c]
        return np.where(inb, out, COAST_VALUE)


def cluster_map(values: np.ndarray, k: int, rng: np.random.Generator,
                max_iter: int = 50) -> ClusterModel:
    """k-means (Lloyd iterations, k-means++ seeding) over scalar intensities.

    Parameters
    ----------
    values : array of intensities (any shape, flattened internally).
    k : number of clusters, k >= 1. k = 1 degenerates to the global mean.
    rng : generator driving the seeding; same seed gives the same model.

    Raises
    ------
    ValueError if k exceeds the number of distinct intensity values, which
    would force an empty cluster.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot cluster an empty grid")
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct = np.unique(v)
    if k > distinct.size:
        raise ValueError(
            f"k = {k} exceeds the {distinct.size} distinct intensity values; "
            "a cluster would be empty"
        )
    if k == 1:
        mu = float(v.mean())
        inertia = float(((v - mu) ** 2).sum())
        return ClusterModel(k=1, centroids=np.array([mu]), inertia=inertia,
                            objective_trace=[inertia])

    centroids = _kmeans_pp_init(v, k, rng)
    trace: list[float] = []
    labels = np.zeros(v.size, dtype=int)
    for _ in range(max_iter):
        d = np.abs(v[:, None] - centroids[None, :])
        new_labels = d.argmin(axis=1)
        inertia = float((d[np.arange(v.size), new_labels] ** 2).sum())
        trace.append(inertia)
        # Recompute means; an empty cluster keeps its centroid so the
        # objective stays monotone.
        for j in range(k):
            members = v[new_labels == j]
            if members.size:
                centroids[j] = members.mean()
        if np.array_equal(new_labels, labels) and len(trace) > 1:
            break
        labels = new_labels

    order = np.argsort(centroids)
    centroids = centroids[order]
    d = np.abs(v[:, None] - centroids[None, :])
    inertia = float((d.min(axis=1) ** 2).sum())
    return ClusterModel(k=k, centroids=centroids, inertia=inertia,
                        objective_trace=trace)


def _kmeans_pp_init(v: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding on scalars; avoids duplicate seeds."""
    centroids = [v[rng.integers(v.size)]]
    for _ in range(k - 1):
        d2 = np.min(np.abs(v[:, None] - np.array(centroids)[None, :]), axis=1) ** 2
        total = d2.sum()
        if total <= 0.0:
            # All remaining mass sits on chosen points; pick any unused value.
            unused = np.setdiff1d(np.unique(v), np.array(centroids))
            centroids.append(unused[0])
            continue
        probs = d2 / total
        idx = rng.choice(v.size, p=probs)
        centroids.append(v[idx])
    return np.array(centroids, dtype=float)


def classify_grid(model: ClusterModel, grid: IntensityGrid,
                  band: tuple[float, float] = DEFAULT_BAND,
                  rng: np.random.Generator | None = None) -> TraversabilityGrid:
    """Turn a clustered intensity grid into a traversability grid.

    Cells in the lowest-centroid cluster become coast (value 0), cells in the
    highest become water (value 1) and every other cluster is uncertain: each
    uncertain cell gets one uniform draw from the band (lo, hi], made at
    classification time from `rng` so the map is reproducible.
    """
    lo, hi = band
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"band must satisfy 0 <= lo < hi <= 1, got {band}")
    if rng is None:
        rng = np.random.default_rng(0)

    labels_k = model.assign(grid.values)
    labels = np.full(grid.values.shape, UNCERTAIN, dtype=np.int8)
    labels[labels_k == 0] = COAST
    labels[labels_k == model.k - 1] = WATER
    if model.k == 1:
        labels[:] = WATER

    values = np.where(labels == WATER, WATER_VALUE, COAST_VALUE)
    uncertain = labels == UNCERTAIN
    n_unc = int(uncertain.sum())
    if n_unc:
        # hi - U[0, hi - lo) lands in (lo, hi].
        draws = hi - rng.uniform(0.0, hi - lo, size=n_unc)
        values = values.astype(float)
        values[uncertain] = draws
    return TraversabilityGrid(
        width=grid.width, height=grid.height, cell_size=grid.cell_size,
        values=values.astype(float), labels=labels,
    )


def synthetic_intensity_map(width: int, height: int, cell_size: float,
                            rng: np.random.Generator,
                            n_land_blobs: int = 4,
                            blob_radius_cells: tuple[float, float] = (0.08, 0.2),
                            fringe_cells: float = 2.0) -> IntensityGrid:
    """Generate a map image with separable water / fringe / land intensities.

    Water reads bright (~0.9), land blobs dark (~0.1) and a fringe ring around
    each blob mid-grey (~0.5), so a k = 3 clustering recovers the three
    classes. Blob radii are given as fractions of the smaller grid dimension.
    """
    yy, xx = np.mgrid[0:height, 0:width]
    values = rng.normal(0.9, 0.02, size=(height, width))
    scale = min(width, height)
    land = np.zeros((height, width), dtype=bool)
    fringe = np.zeros((height, width), dtype=bool)
    for _ in range(n_land_blobs):
        cx = rng.uniform(0, width)
        cy = rng.uniform(0, height)
        r = rng.uniform(*blob_radius_cells) * scale
        d = np.hypot(xx - cx, yy - cy)
        land |= d <= r
        fringe |= (d > r) & (d <= r + fringe_cells)
    fringe &= ~land
    values[fringe] = rng.normal(0.5, 0.03, size=int(fringe.sum()))
    values[land] = rng.normal(0.1, 0.02, size=int(land.sum()))
    return IntensityGrid(width=width, height=height, cell_size=cell_size,
                         values=np.clip(values, 0.0, 1.0))


def save_grid_csv(grid: IntensityGrid | TraversabilityGrid, path) -> None:
    """Write a grid as row-major CSV with a `# width height cell_size` header."""
    with open(path, "w") as fh:
        fh.write(f"# {grid.width} {grid.height} {grid.cell_size!r}\n")
        for row in grid.values:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_grid_csv(path, band: tuple[float, float] = DEFAULT_BAND) -> TraversabilityGrid:
    """Read a grid written by `save_grid_csv`.

    Labels are reconstructed from the values: 0 is coast, 1 is water and
    anything else is uncertain.
    """
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# width height cell_size' header")
        parts = header[1:].split()
        if len(parts) != 3:
            raise ValueError(f"{path}: malformed header {header!r}")
        width, height = int(parts[0]), int(parts[1])
        cell_size = float(parts[2])
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if values.shape != (height, width):
        raise ValueError(
            f"{path}: data shape {values.shape} does not match header "
            f"({height}, {width})"
        )
    labels = np.full(values.shape, UNCERTAIN, dtype=np.int8)
    labels[values == COAST_VALUE] = COAST
    labels[values == WATER_VALUE] = WATER
    return TraversabilityGrid(width=width, height=height, cell_size=cell_size,
                              values=values, labels=labels)
