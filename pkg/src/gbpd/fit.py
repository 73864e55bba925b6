"""Generator extraction from label images by per-region PCA.

Each labeled region becomes one generator: center at the pixel centroid,
matrix from the inverse principal components of the pixel distribution
(M = U diag(1/(scale e1), 1/(scale e2)) U^T with e the population-covariance
eigenvalues), weight set uniformly. Regions too small or too thin for a
stable covariance get an isotropic fallback and are flagged instead of
failing the whole image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import Generator, SymMat2
from .oracle import LabelImage


@dataclass(frozen=True)
class FitResult:
    generators: list[Generator]
    degenerate: frozenset[int]


def fit_generators_from_labels(
    img: LabelImage, scale: float, default_weight: float = 0.0
) -> FitResult:
    """One generator per label; labels < 0 are background and skipped."""
    if not scale > 0.0:
        raise InputError(f"scale must be positive, got {scale}")
    labs = img.labels
    gids = [int(v) for v in np.unique(labs) if v >= 0]
    if not gids:
        raise InputError("label image contains no regions")
    gx, gy = np.meshgrid(img.pixel_centers_x(), img.pixel_centers_y(), indexing="xy")
    iso = SymMat2(1.0 / scale, 0.0, 1.0 / scale)
    gens: list[Generator] = []
    degenerate: set[int] = set()
    for gid in gids:
        mask = labs == gid
        px, py = gx[mask], gy[mask]
        center = np.array([px.mean(), py.mean()])
        m = iso
        if px.size < 3:
            degenerate.add(gid)
        else:
            cov = np.cov(np.stack([px, py]), bias=True)
            evals, evecs = np.linalg.eigh(cov)
            if evals[0] <= 1e-12 * evals[1]:
                degenerate.add(gid)
            else:
                m3 = evecs @ np.diag(1.0 / (scale * evals)) @ evecs.T
                m = SymMat2(float(m3[0, 0]), float(m3[0, 1]), float(m3[1, 1]))
        gens.append(Generator(gid, center, m, default_weight))
    return FitResult(gens, frozenset(degenerate))
