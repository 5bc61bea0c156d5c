"""Shared fixtures and independent oracle helpers."""

from __future__ import annotations

import numpy as np
import pytest

import landmarkseg as ls


def nearest_scan(queries: np.ndarray, stored: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Exhaustive nearest-point scan: argmin of squared distance, first index wins.

    Independent of the spatial index; used as the equivalence oracle.
    """
    queries = np.asarray(queries, dtype=np.float64)
    stored = np.asarray(stored, dtype=np.float64)
    out = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], chunk):
        block = queries[start : start + chunk]
        diff = block[:, None, :] - stored[None, :, :]
        d2 = (diff**2).sum(axis=-1)
        out[start : start + chunk] = np.argmin(d2, axis=1)
    return out


def knearest_scan(queries: np.ndarray, stored: np.ndarray, k: int) -> list[np.ndarray]:
    """Per query, the k nearest stored indices ordered by (distance, index)."""
    queries = np.asarray(queries, dtype=np.float64)
    stored = np.asarray(stored, dtype=np.float64)
    result = []
    for q in queries:
        d2 = ((stored - q) ** 2).sum(axis=-1)
        order = np.lexsort((np.arange(stored.shape[0]), d2))
        result.append(order[:k])
    return result


def random_cloud(n: int, seed: int, scale: float = 2.0) -> ls.LabeledCloud:
    rng = np.random.default_rng(seed)
    return ls.LabeledCloud(points=rng.random((n, 3)) * scale)


def gt_features(cloud: ls.LabeledCloud, n_f: int = 8, seed: int = 0, spread: float = 4.0,
                noise: float = 0.01) -> ls.FeatureMatrix:
    """Features clustered per ground-truth instance, separable at tau ~ 1."""
    rng = np.random.default_rng(seed)
    n_ids = int(cloud.gt_instance.max()) + 1
    centers = rng.normal(size=(n_ids, n_f)) * spread
    data = centers[cloud.gt_instance] + rng.normal(size=(cloud.n, n_f)) * noise
    return ls.FeatureMatrix(data=data)


def small_scene_spec(seed: int = 0) -> ls.SceneSpec:
    """Desk-scale room that keeps unit tests fast; surfaces stay 0.3 m apart."""
    return ls.SceneSpec(
        room=(2.5, 2.0, 2.2),
        floor_density=150.0,
        wall_density=100.0,
        wall_z0=0.3,
        wall_margin=0.3,
        furniture=(
            ls.FurnitureItem("table", (0.5, 0.5, 0.7), (1.0, 0.6, 0.06), 260.0),
            ls.FurnitureItem("chair", (1.8, 0.4, 0.42), (0.4, 0.4, 0.05), 260.0),
        ),
        seed=seed,
    )


@pytest.fixture(scope="session")
def office_scene() -> ls.LabeledCloud:
    return ls.generate_scene(ls.office_preset(7))


@pytest.fixture(scope="session")
def small_scene() -> ls.LabeledCloud:
    return ls.generate_scene(small_scene_spec(3))
