"""Online-phase position estimators over a fingerprint database.

Three estimators are provided:

* subarea-gated 3-nearest-neighbor with inverse-distance weighting,
* a plain global k-nearest-neighbor centroid baseline,
* a Gaussian radial-basis-function regression baseline.

Each has a stateless functional form plus a scikit-learn style wrapper
class with fit/predict and get_params/set_params support; tracking mode
restricts the candidate search to the previously identified subarea and
its edge-sharing neighbors.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import (
    FingerprintDatabase,
    InvalidInputError,
    NoOverlapError,
    NumericalError,
    ReferencePoint,
    RssVector,
    StaleStateError,
    UnlocatableError,
    rss_distance,
)
from .geometry import Point, Rect
from .segmentation import box_distance, matches_feature

METHOD_3NNF = "3NNF"
METHOD_KNN = "KNN"
METHOD_RBF = "RBF"


@dataclass(frozen=True)
class EstimationResult:
    """One position estimate with its provenance.

    neighbors lists the selected reference points as (id, rss distance),
    ascending; candidate_count is filled by tracking-mode searches.
    """

    position: Point
    subarea: str | None
    neighbors: tuple[tuple[str, float], ...]
    method: str
    fallback_used: bool
    candidate_count: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.position[0]) and math.isfinite(self.position[1])):
            raise InvalidInputError("estimated position must be finite")
        dists = [d for _, d in self.neighbors]
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise InvalidInputError("neighbors must be sorted by ascending distance")


def as_vector(value: RssVector | Mapping[str, float]) -> RssVector:
    """Input validation helper: accept a vector or a plain readings mapping."""
    if isinstance(value, RssVector):
        return value
    if isinstance(value, Mapping):
        return RssVector(dict(value))
    raise InvalidInputError(f"expected an RSS vector or mapping, got {type(value).__name__}")


def _comparable_members(
    points: Iterable[ReferencePoint], v: RssVector
) -> list[tuple[float, str, ReferencePoint]]:
    """(distance, id, point) for every point sharing a beacon with v, sorted."""
    out = []
    for rp in points:
        try:
            out.append((rss_distance(v, rp.vector), rp.id, rp))
        except NoOverlapError:
            continue
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def _mean_member_distance(db: FingerprintDatabase, subarea_id: str, v: RssVector) -> float:
    dists = [d for d, _, _ in _comparable_members(db.members_of(subarea_id), v)]
    return sum(dists) / len(dists) if dists else math.inf


def identify_subarea(
    db: FingerprintDatabase,
    v: RssVector,
    margin: float = 2.0,
    among: Sequence[str] | None = None,
) -> tuple[str, bool]:
    """Pick the subarea whose feature explains v.

    A single margin-inflated match wins outright. Otherwise fall back to
    the smallest box distance, breaking ties by smaller mean distance to
    member vectors, then by id. Returns (subarea_id, fallback_used).
    """
    pool = db.subareas if among is None else [s for s in db.subareas if s.id in set(among)]
    if not pool:
        raise InvalidInputError("database has no subareas to identify against")
    comparable = [s for s in pool if set(v.readings) & set(s.feature.ranges)]
    if not comparable:
        raise UnlocatableError("query shares no beacon with any subarea feature")
    matches = [s for s in comparable if matches_feature(v, s.feature, margin)]
    if len(matches) == 1:
        return matches[0].id, False
    best = min(
        comparable,
        key=lambda s: (box_distance(v, s.feature), _mean_member_distance(db, s.id, v), s.id),
    )
    return best.id, True


def _weighted_position(
    selected: Sequence[tuple[float, str, ReferencePoint]], delta: float
) -> Point:
    if selected[0][0] == 0.0:
        return selected[0][2].position  # exact fingerprint hit
    weights = [1.0 / (d + delta) for d, _, _ in selected]
    total = sum(weights)
    x = sum(w * rp.position[0] for w, (_, _, rp) in zip(weights, selected)) / total
    y = sum(w * rp.position[1] for w, (_, _, rp) in zip(weights, selected)) / total
    return (x, y)


def estimate_3nnf(
    db: FingerprintDatabase,
    v: RssVector | Mapping[str, float],
    margin: float = 2.0,
    delta: float = 1e-6,
) -> EstimationResult:
    """Two-stage estimate: identify the subarea, then inverse-distance
    average the 3 nearest member fingerprints (fewer if the subarea is
    smaller). A zero-distance member is returned exactly.
    """
    v = as_vector(v)
    sid, fallback = identify_subarea(db, v, margin)
    members = db.members_of(sid)
    if not members:
        raise InvalidInputError(f"identified subarea {sid!r} has no reference points")
    ranked = _comparable_members(members, v)
    if not ranked:
        raise UnlocatableError(f"query shares no beacon with members of subarea {sid!r}")
    selected = ranked[:3]
    return EstimationResult(
        position=_weighted_position(selected, delta),
        subarea=sid,
        neighbors=tuple((rid, d) for d, rid, _ in selected),
        method=METHOD_3NNF,
        fallback_used=fallback,
    )


def estimate_knn(
    db: FingerprintDatabase, v: RssVector | Mapping[str, float], k: int = 2
) -> EstimationResult:
    """Global k-nearest centroid baseline, no subarea gating."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    v = as_vector(v)
    ranked = _comparable_members(db.reference_points, v)
    if len(ranked) < k:
        raise InvalidInputError(f"need {k} comparable reference points, have {len(ranked)}")
    selected = ranked[:k]
    x = sum(rp.position[0] for _, _, rp in selected) / k
    y = sum(rp.position[1] for _, _, rp in selected) / k
    return EstimationResult(
        position=(x, y),
        subarea=None,
        neighbors=tuple((rid, d) for d, rid, _ in selected),
        method=METHOD_KNN,
        fallback_used=False,
    )


def median_nn_distance(db: FingerprintDatabase) -> float:
    """Median over reference points of the distance to their nearest peer."""
    nearest = []
    for rp in db.reference_points:
        best = math.inf
        for other in db.reference_points:
            if other.id == rp.id:
                continue
            try:
                best = min(best, rss_distance(rp.vector, other.vector))
            except NoOverlapError:
                continue
        if math.isfinite(best):
            nearest.append(best)
    if not nearest:
        raise InvalidInputError("database has no comparable reference point pairs")
    return float(statistics.median(nearest))


def estimate_tracked(
    db: FingerprintDatabase,
    v: RssVector | Mapping[str, float],
    previous: EstimationResult,
    margin: float = 2.0,
    delta: float = 1e-6,
    reacquisition_threshold: float | None = None,
) -> EstimationResult:
    """Estimate with the search narrowed around the previous subarea.

    Candidates are the previous subarea plus subareas sharing an edge
    with it. When even the best candidate is farther than the
    re-acquisition threshold (default 3x the database's median
    nearest-neighbor distance), the full estimator runs instead and the
    result is flagged. candidate_count always reports the narrowed size.
    """
    v = as_vector(v)
    if previous.subarea is None:
        raise InvalidInputError("previous estimate carries no subarea")
    try:
        prev = db.get_subarea(previous.subarea)
    except KeyError:
        raise StaleStateError(f"subarea {previous.subarea!r} no longer exists") from None
    candidate_ids = [
        s.id
        for s in db.subareas
        if s.id == prev.id or s.region.shares_edge(prev.region)
    ]
    candidate_points = [rp for rp in db.reference_points if rp.subarea in set(candidate_ids)]
    count = len(candidate_points)
    threshold = (
        reacquisition_threshold
        if reacquisition_threshold is not None
        else 3.0 * median_nn_distance(db)
    )
    ranked = _comparable_members(candidate_points, v)
    if not ranked or ranked[0][0] > threshold:
        full = estimate_3nnf(db, v, margin, delta)
        return replace(full, fallback_used=True, candidate_count=count)
    sid, fallback = identify_subarea(db, v, margin, among=candidate_ids)
    selected = _comparable_members(db.members_of(sid), v)[:3]
    return EstimationResult(
        position=_weighted_position(selected, delta),
        subarea=sid,
        neighbors=tuple((rid, d) for d, rid, _ in selected),
        method=METHOD_3NNF,
        fallback_used=fallback,
        candidate_count=count,
    )


# -- RBF baseline ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RbfModel:
    """Gaussian-kernel regression from RSS space to floor coordinates.

    One center per training fingerprint; width per center is the median
    distance to its 3 nearest training vectors, floored at 1.0. Readings
    absent from a vector are imputed as 0 (weakest possible signal).
    """

    beacon_order: tuple[str, ...]
    centers: np.ndarray  # (n, z) imputed training vectors
    widths: np.ndarray  # (n,)
    weights: np.ndarray  # (n + 1, 2), last row is the bias
    regularization: float
    bounds: Rect | None

    def __post_init__(self):
        n, z = self.centers.shape
        if self.widths.shape != (n,) or self.weights.shape != (n + 1, 2):
            raise InvalidInputError("RBF model arrays have inconsistent shapes")
        if not (self.widths > 0).all():
            raise InvalidInputError("RBF widths must be positive")


def _imputed_matrix(vectors: Sequence[RssVector], beacon_order: Sequence[str]) -> np.ndarray:
    return np.array(
        [[float(v.readings.get(bid, 0.0)) for bid in beacon_order] for v in vectors]
    )


def _activations(model: RbfModel, x: np.ndarray) -> np.ndarray:
    d2 = ((model.centers - x) ** 2).sum(axis=1)
    return np.exp(-d2 / (2.0 * model.widths**2))


def train_rbf(
    db: FingerprintDatabase, regularization: float = 1e-3, width_floor: float = 1.0
) -> RbfModel:
    """Fit kernel weights by (optionally ridge-regularized) least squares.

    With regularization 0 the fit must interpolate the training set; if
    it cannot (duplicate fingerprints at different positions), a
    numerical error asks for a positive ridge term.
    """
    if regularization < 0:
        raise InvalidInputError("regularization must be >= 0")
    points = db.reference_points
    if len(points) < 4:
        raise InvalidInputError("RBF training needs at least 4 reference points")
    beacon_order = tuple(sorted(db.beacon_ids()))
    centers = _imputed_matrix([rp.vector for rp in points], beacon_order)
    n = len(points)

    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    widths = np.maximum(np.median(np.sort(dist, axis=1)[:, :3], axis=1), width_floor)

    d2 = (diff**2).sum(axis=2)
    phi = np.exp(-d2 / (2.0 * widths[None, :] ** 2))
    design = np.hstack([phi, np.ones((n, 1))])
    targets = np.array([rp.position for rp in points])

    if regularization == 0.0:
        weights, *_ = np.linalg.lstsq(design, targets, rcond=None)
    else:
        # ridge on kernel weights only; the bias column is unpenalized
        root = math.sqrt(regularization)
        aug = np.vstack([design, np.hstack([root * np.eye(n), np.zeros((n, 1))])])
        rhs = np.vstack([targets, np.zeros((n, 2))])
        weights, *_ = np.linalg.lstsq(aug, rhs, rcond=None)

    model = RbfModel(
        beacon_order=beacon_order,
        centers=centers,
        widths=widths,
        weights=weights,
        regularization=regularization,
        bounds=db.bounds,
    )
    if regularization == 0.0:
        residual = np.abs(design @ weights - targets).max()
        if residual > 1e-6:
            raise NumericalError(
                "least-squares system is singular (duplicate fingerprints?); "
                "retrain with regularization > 0"
            )
    return model


def estimate_rbf(model: RbfModel, v: RssVector | Mapping[str, float]) -> EstimationResult:
    """Evaluate the kernel regression at v, clamped to the floor bounds."""
    v = as_vector(v)
    x = _imputed_matrix([v], model.beacon_order)[0]
    act = np.append(_activations(model, x), 1.0)
    raw = act @ model.weights
    position = (float(raw[0]), float(raw[1]))
    clamped = model.bounds.clamp(position) if model.bounds is not None else position
    return EstimationResult(
        position=clamped,
        subarea=None,
        neighbors=(),
        method=METHOD_RBF,
        fallback_used=clamped != position,
    )


# -- scikit-learn style wrappers ---------------------------------------


def _check_database(X) -> FingerprintDatabase:
    if not isinstance(X, FingerprintDatabase):
        raise InvalidInputError(f"fit expects a FingerprintDatabase, got {type(X).__name__}")
    if not X.reference_points:
        raise InvalidInputError("cannot fit on a database with no reference points")
    return X


def _predict_batch(estimator, X) -> np.ndarray:
    results = [estimator.locate(v) for v in X]
    return np.array([r.position for r in results])


class ThreeNNFLocalizer(BaseEstimator):
    """Estimator wrapper for the subarea-gated 3-nearest method.

    fit() takes a segmented FingerprintDatabase; predict() maps a
    sequence of RSS vectors (or readings dicts) to an (n, 2) coordinate
    array. track() carries state between consecutive queries.
    """

    def __init__(self, margin: float = 2.0, delta: float = 1e-6, reacquisition_factor: float = 3.0):
        self.margin = margin
        self.delta = delta
        self.reacquisition_factor = reacquisition_factor

    def fit(self, X: FingerprintDatabase, y=None):
        db = _check_database(X)
        if not db.subareas:
            raise InvalidInputError("database must be segmented before fitting this estimator")
        self.db_ = db
        self.median_nn_distance_ = median_nn_distance(db)
        self.n_reference_points_ = len(db.reference_points)
        return self

    def locate(self, v) -> EstimationResult:
        self._require_fit()
        return estimate_3nnf(self.db_, v, self.margin, self.delta)

    def track(self, v, previous: EstimationResult | None = None) -> EstimationResult:
        self._require_fit()
        if previous is None or previous.subarea is None:
            return self.locate(v)
        return estimate_tracked(
            self.db_,
            v,
            previous,
            self.margin,
            self.delta,
            self.reacquisition_factor * self.median_nn_distance_,
        )

    def predict(self, X) -> np.ndarray:
        self._require_fit()
        return _predict_batch(self, X)

    def _require_fit(self):
        if not hasattr(self, "db_"):
            raise InvalidInputError("estimator is not fitted; call fit(database) first")


class KnnLocalizer(BaseEstimator):
    """Plain global k-nearest-neighbor centroid baseline."""

    def __init__(self, k: int = 2):
        self.k = k

    def fit(self, X: FingerprintDatabase, y=None):
        self.db_ = _check_database(X)
        return self

    def locate(self, v) -> EstimationResult:
        self._require_fit()
        return estimate_knn(self.db_, v, self.k)

    def predict(self, X) -> np.ndarray:
        self._require_fit()
        return _predict_batch(self, X)

    def _require_fit(self):
        if not hasattr(self, "db_"):
            raise InvalidInputError("estimator is not fitted; call fit(database) first")


class RbfLocalizer(BaseEstimator):
    """Gaussian RBF regression baseline."""

    def __init__(self, regularization: float = 1e-3, width_floor: float = 1.0):
        self.regularization = regularization
        self.width_floor = width_floor

    def fit(self, X: FingerprintDatabase, y=None):
        db = _check_database(X)
        self.model_ = train_rbf(db, self.regularization, self.width_floor)
        self.db_ = db
        return self

    def locate(self, v) -> EstimationResult:
        self._require_fit()
        return estimate_rbf(self.model_, v)

    def predict(self, X) -> np.ndarray:
        self._require_fit()
        return _predict_batch(self, X)

    def _require_fit(self):
        if not hasattr(self, "model_"):
            raise InvalidInputError("estimator is not fitted; call fit(database) first")
