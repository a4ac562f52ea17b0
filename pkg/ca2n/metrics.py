# -*- coding: utf-8 -*-
"""
ca2n.metrics
~~~~~~~~~~~~

Image quality measures that need no pretrained network: windowed SSIM,
PSNR and a Fréchet distance over fixed random features. The Fréchet
proxy is not comparable to published FID values.

All metrics work on numpy arrays in ``[0, 1]`` and compute in 64-bit.

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import csv
import logging
import os

import attr
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from .core.exceptions import ConfigurationError, require
from .losses import SsimConstants
from .numerics import Tensor
from .utils.runlog import format_value

logger = logging.getLogger(__name__)

WINDOW = 11
SIGMA = 1.5
REGULARIZATION = 1e-6
UNAVAILABLE = "unavailable"
SUMMARY_KEYS = (
    "count",
    "frechet_proxy",
    "frechet_proxy_post",
    "fid",
    "is",
    "kid",
    "regularized",
)


def gaussian_window(size=WINDOW, sigma=SIGMA):
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    profile = np.exp(-(coords ** 2) / (2 * sigma ** 2))
    window = np.outer(profile, profile)
    return window / window.sum()


def _as_images(a, b, op):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    require(a.shape == b.shape, op, "shape mismatch: {} vs {}", a.shape, b.shape)
    return a, b


def ssim_windowed(a, b, window=WINDOW, sigma=SIGMA, consts=None):
    """Mean SSIM over all valid Gaussian-weighted windows, averaged over
    the leading (channel and batch) axes."""
    a, b = _as_images(a, b, "ssim_windowed")
    require(
        a.ndim >= 2 and min(a.shape[-2:]) >= window,
        "image",
        "image {} is smaller than the {}x{} window",
        a.shape,
        window,
        window,
    )
    consts = consts or SsimConstants()
    weights = gaussian_window(window, sigma)

    def local(x):
        view = sliding_window_view(x, (window, window), axis=(-2, -1))
        return np.tensordot(view, weights, axes=([-2, -1], [0, 1]))

    mu_a, mu_b = local(a), local(b)
    var_a = local(a * a) - mu_a ** 2
    var_b = local(b * b) - mu_b ** 2
    cov = local(a * b) - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + consts.c1) * (2 * cov + consts.c2)) / (
        (mu_a ** 2 + mu_b ** 2 + consts.c1) * (var_a + var_b + consts.c2)
    )
    return float(ssim_map.mean())


def psnr(a, b):
    """Peak signal-to-noise ratio in dB for images with peak value 1;
    ``inf`` for identical images."""
    a, b = _as_images(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def _sqrtm_psd(matrix):
    values, vectors = linalg.eigh(matrix)
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.T


@attr.s(frozen=True)
class FrechetResult(object):
    value = attr.ib()
    regularized = attr.ib(default=False)

    def __float__(self):
        return float(self.value)


def frechet_from_features(features_a, features_b):
    """Fréchet distance between Gaussians fitted to two ``[N, D]``
    feature sets.

    ``(Sa Sb)^(1/2)`` is evaluated as the symmetric
    ``Sa^(1/2) Sb Sa^(1/2)`` under a square root, whose trace is equal.
    Singular covariances get ``1e-6`` added to the diagonal.
    """
    fa = np.asarray(features_a, dtype=np.float64)
    fb = np.asarray(features_b, dtype=np.float64)
    require(
        fa.ndim == 2 and fb.ndim == 2 and fa.shape[1] == fb.shape[1],
        "features",
        "feature sets must be [N, D] with equal D, got {} and {}",
        fa.shape,
        fb.shape,
    )
    require(
        len(fa) >= 2 and len(fb) >= 2, "features", "each set needs at least 2 images"
    )
    mu_a, mu_b = fa.mean(axis=0), fb.mean(axis=0)
    sigma_a = np.atleast_2d(np.cov(fa, rowvar=False, ddof=1))
    sigma_b = np.atleast_2d(np.cov(fb, rowvar=False, ddof=1))

    regularized = False
    dim = sigma_a.shape[0]
    if min(np.linalg.matrix_rank(sigma_a), np.linalg.matrix_rank(sigma_b)) < dim:
        sigma_a = sigma_a + REGULARIZATION * np.eye(dim)
        sigma_b = sigma_b + REGULARIZATION * np.eye(dim)
        regularized = True

    root_a = _sqrtm_psd(sigma_a)
    middle = root_a @ sigma_b @ root_a
    cross = _sqrtm_psd((middle + middle.T) / 2.0)
    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(sigma_a + sigma_b - 2.0 * cross))
    return FrechetResult(max(value, 0.0), regularized)


def frechet_proxy(set_a, set_b, extractor):
    """Fréchet distance between the features ``extractor`` assigns to two
    image sets (``[N, 3, S, S]`` arrays)."""
    features = [
        extractor.embed(Tensor(np.asarray(images))).numpy()
        for images in (set_a, set_b)
    ]
    return frechet_from_features(*features)


@attr.s
class ImageScores(object):
    id = attr.ib()
    ssim = attr.ib()
    psnr = attr.ib()
    ssim_post = attr.ib(default=None)
    psnr_post = attr.ib(default=None)


def _mean(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    return float(np.mean(values))


@attr.s
class EvalReport(object):
    rows = attr.ib(factory=list)
    frechet = attr.ib(default=None)
    frechet_post = attr.ib(default=None)
    config = attr.ib(factory=dict)

    @property
    def count(self):
        return len(self.rows)

    @property
    def has_post(self):
        return any(row.ssim_post is not None for row in self.rows)

    @property
    def ssim(self):
        return _mean(row.ssim for row in self.rows)

    @property
    def psnr(self):
        return _mean(row.psnr for row in self.rows)

    @property
    def ssim_post(self):
        return _mean(row.ssim_post for row in self.rows)

    @property
    def psnr_post(self):
        return _mean(row.psnr_post for row in self.rows)

    @property
    def regularized(self):
        return any(
            f is not None and f.regularized for f in (self.frechet, self.frechet_post)
        )

    def summary(self):
        summary = {
            "count": self.count,
            "ssim": self.ssim,
            "psnr": self.psnr,
            "frechet_proxy": None if self.frechet is None else self.frechet.value,
            "fid": UNAVAILABLE,
            "is": UNAVAILABLE,
            "kid": UNAVAILABLE,
        }
        if self.has_post:
            summary["ssim_post"] = self.ssim_post
            summary["psnr_post"] = self.psnr_post
            summary["frechet_proxy_post"] = (
                None if self.frechet_post is None else self.frechet_post.value
            )
        summary["regularized"] = self.regularized
        return summary

    def write(self, path):
        """Writes one row per image and a trailing summary row."""
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        columns = ["id", "ssim", "psnr"]
        if self.has_post:
            columns += ["ssim_post", "psnr_post"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in self.rows:
                writer.writerow(
                    [format_value(getattr(row, column)) for column in columns]
                )
            summary = self.summary()
            writer.writerow(
                ["summary"]
                + [format_value(summary[column]) for column in columns[1:]]
            )
            for key in SUMMARY_KEYS:
                if key in summary:
                    writer.writerow(["#", key, format_value(summary[key])])
            for key, value in sorted(self.config.items()):
                writer.writerow(["#", "config." + key, str(value)])


def evaluate(manifest, pipeline, extractor=None, batch_size=8):
    """Runs ``pipeline`` over every pair of ``manifest`` and scores the
    generated photos against the ground truth.

    Without an identity hook the raw generator output and the enhanced
    image are scored side by side.

    :param pipeline: A :class:`ca2n.translator.inference.Pipeline`.
    :param extractor: Feature extractor for the Fréchet proxy, skipped
        when ``None`` or when fewer than two pairs are evaluated.
    """
    if manifest is None or len(manifest) == 0:
        raise ConfigurationError("the test set is empty")
    enhanced = pipeline.hook is not None and not pipeline.hook.is_identity

    rows = []
    generated, finished = [], []
    samples = list(manifest)
    for start in range(0, len(samples), batch_size):
        batch = samples[start:start + batch_size]
        sketches = np.stack([s.sketch for s in batch])
        raw = pipeline.generate(sketches)
        post = pipeline.enhance(raw) if enhanced else None
        for index, sample in enumerate(batch):
            row = ImageScores(
                sample.id,
                ssim_windowed(raw[index], sample.photo),
                psnr(raw[index], sample.photo),
            )
            if post is not None:
                row.ssim_post = ssim_windowed(post[index], sample.photo)
                row.psnr_post = psnr(post[index], sample.photo)
                finished.append(post[index])
            rows.append(row)
            generated.append(raw[index])

    report = EvalReport(rows)
    if extractor is not None and len(samples) >= 2:
        photos = manifest.photos()
        report.frechet = frechet_proxy(np.stack(generated), photos, extractor)
        if enhanced:
            report.frechet_post = frechet_proxy(np.stack(finished), photos, extractor)
    logger.info(
        "Evaluated {} pairs: ssim {:.4f}, psnr {}".format(
            report.count, report.ssim, format_value(report.psnr)
        )
    )
    return report
