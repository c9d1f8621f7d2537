"""Seeded sampling and density evaluation for the distributions the model needs.

Covariance factors are passed around as plain lower-triangular ndarrays
produced by :func:`spd_cholesky`; every sampler takes either an
:class:`RngStream` or a ``numpy.random.Generator`` and is a pure function of
(parameters, stream): replaying the same stream is bit-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import ParameterError

__all__ = [
    "RngStream",
    "spd_cholesky",
    "chol_logdet",
    "sample_gamma",
    "sample_dirichlet",
    "sample_gem",
    "sample_invwishart",
    "sample_niw",
    "sample_mvn",
    "sample_mvt",
    "mvn_logpdf",
    "mvt_logpdf",
]

_LOG_2PI = np.log(2.0 * np.pi)


def _key_hash(parts) -> int:
    """Stable 64-bit hash of a tuple of hashable key parts."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


class RngStream:
    """A reproducible random stream addressed by (seed, stream-id).

    Identical (seed, stream-id) pairs yield bit-identical draw sequences;
    distinct stream-ids give statistically independent streams (PCG64 keyed
    through ``SeedSequence``).  Streams are cheap to create, may be created on
    any thread, and must then be confined to a single worker.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=(self.seed, self.stream_id))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def derive(self, *keys) -> "RngStream":
        """Child stream keyed by (this stream's id, *keys), e.g. scenario/replicate/chain."""
        return RngStream(self.seed, _key_hash((self.stream_id,) + keys))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or a bare numpy Generator."""
    return rng.gen if isinstance(rng, RngStream) else rng


def spd_cholesky(mat: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix.

    Raises ParameterError when the matrix is not symmetric positive definite.
    The returned factor L satisfies ``L @ L.T == mat`` to relative error 1e-10
    and has a strictly positive diagonal.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ParameterError(f"expected square matrix, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, rtol=1e-8, atol=1e-12):
        raise ParameterError("matrix is not symmetric")
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("matrix is not positive definite") from exc


def chol_logdet(chol: np.ndarray) -> float:
    """log-determinant of the SPD matrix with lower Cholesky factor `chol`."""
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def sample_gamma(shape: float, rate: float, rng) -> float:
    """Draw from Gamma(shape, rate) with mean shape/rate."""
    if not (shape > 0 and rate > 0):
        raise ParameterError(f"gamma parameters must be positive, got shape={shape}, rate={rate}")
    return float(as_generator(rng).gamma(shape, 1.0 / rate))


def sample_dirichlet(concentration, rng) -> np.ndarray:
    """Draw a probability vector from Dirichlet(concentration)."""
    conc = np.asarray(concentration, dtype=float)
    if conc.ndim != 1 or conc.size == 0:
        raise ParameterError("concentration must be a non-empty 1-D vector")
    if np.any(conc <= 0):
        raise ParameterError("all concentration entries must be positive")
    gen = as_generator(rng)
    # gamma-normalization instead of Generator.dirichlet: keeps tiny
    # concentrations from collapsing a coordinate to exactly zero more often
    # than necessary and draws a fixed number of variates (replay-stable).
    g = gen.gamma(conc, 1.0)
    total = g.sum()
    if total <= 0.0:
        # all-underflow corner: fall back to the largest concentration entry
        g = np.where(conc == conc.max(), 1.0, 0.0)
        total = g.sum()
    return g / total


def sample_gem(gamma: float, truncation_mass: float, rng) -> np.ndarray:
    """Finite prefix of a GEM(gamma) stick-breaking draw.

    Returns (b_1, ..., b_K, b_rest) with b_rest < truncation_mass; all entries
    positive and summing to one.
    """
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    if not (0.0 < truncation_mass < 1.0):
        raise ParameterError("truncation-mass must lie in (0, 1)")
    gen = as_generator(rng)
    sticks = []
    rest = 1.0
    while rest >= truncation_mass:
        v = min(max(gen.beta(1.0, gamma), 1e-15), 1.0 - 1e-15)
        sticks.append(v * rest)
        rest *= 1.0 - v
    return np.array(sticks + [rest])


def sample_invwishart(dof: float, scale: np.ndarray, rng) -> np.ndarray:
    """Draw Sigma ~ Inverse-Wishart(dof, scale) with E[Sigma] = scale/(dof-P-1).

    Bartlett decomposition of the precision Wishart draw; only triangular
    solves, no dense inversion.
    """
    scale = np.asarray(scale, dtype=float)
    p = scale.shape[0]
    if dof <= p - 1:
        raise ParameterError(f"inverse-Wishart dof must exceed P-1, got {dof} with P={p}")
    gen = as_generator(rng)
    c = spd_cholesky(scale)
    a = np.zeros((p, p))
    a[np.diag_indices(p)] = np.sqrt(gen.chisquare(dof - np.arange(p)))
    if p > 1:
        a[np.tril_indices(p, -1)] = gen.standard_normal(p * (p - 1) // 2)
    # Sigma = C A^{-T} A^{-1} C^T  (precision = C^{-T} A A^T C^{-1} ~ Wishart(dof, scale^{-1}))
    m = solve_triangular(a, c.T, lower=True).T
    return m @ m.T


def sample_niw(prior, rng):
    """Draw (mean, covariance) from a Normal-Inverse-Wishart prior.

    `prior` carries mu0 (P-vector), kappa0 > 0, nu0 > P-1 and an SPD P x P
    lambda0.  Sigma ~ IW(nu0, lambda0), then mu | Sigma ~ N(mu0, Sigma/kappa0).
    """
    if prior.kappa0 <= 0:
        raise ParameterError("kappa0 must be positive")
    gen = as_generator(rng)
    sigma = sample_invwishart(prior.nu0, prior.lambda0, gen)
    chol = np.linalg.cholesky(sigma)
    mu = prior.mu0 + (chol @ gen.standard_normal(sigma.shape[0])) / np.sqrt(prior.kappa0)
    return mu, sigma


def sample_mvn(mean: np.ndarray, chol: np.ndarray, rng) -> np.ndarray:
    """Draw from N(mean, L L^T) given the lower factor L."""
    gen = as_generator(rng)
    mean = np.asarray(mean, dtype=float)
    return mean + chol @ gen.standard_normal(mean.shape[0])


def sample_mvt(location: np.ndarray, scale_chol: np.ndarray, dof: float, rng) -> np.ndarray:
    """Draw from a multivariate Student-t as a Gaussian scale mixture.

    z ~ N(0, L L^T), w ~ Gamma(dof/2, rate=dof/2), returns location + z/sqrt(w).
    """
    if dof <= 0:
        raise ParameterError("dof must be positive")
    gen = as_generator(rng)
    location = np.asarray(location, dtype=float)
    z = scale_chol @ gen.standard_normal(location.shape[0])
    w = gen.gamma(dof / 2.0, 2.0 / dof)
    return location + z / np.sqrt(w)


def mvn_logpdf(y, mean, chol):
    """Gaussian log density at `y` (a P-vector or an (n, P) batch).

    Uses the log-determinant from the Cholesky diagonal and a triangular solve
    for the quadratic form; exact up to floating point.
    """
    y = np.asarray(y, dtype=float)
    mean = np.asarray(mean, dtype=float)
    p = chol.shape[0]
    if y.shape[-1] != p or mean.shape[-1] != p:
        raise ParameterError(
            f"dimension mismatch: y has {y.shape[-1]}, mean has {mean.shape[-1]}, chol has {p}"
        )
    dev = np.atleast_2d(y) - mean
    sol = solve_triangular(chol, dev.T, lower=True)
    maha = np.sum(sol * sol, axis=0)
    out = -0.5 * (p * _LOG_2PI + maha) - 0.5 * chol_logdet(chol)
    return float(out[0]) if y.ndim == 1 else out


def mvt_logpdf(y, location, scale_chol, dof: float):
    """Multivariate Student-t log density at `y` (vector or (n, P) batch)."""
    y = np.asarray(y, dtype=float)
    location = np.asarray(location, dtype=float)
    p = scale_chol.shape[0]
    dev = np.atleast_2d(y) - location
    sol = solve_triangular(scale_chol, dev.T, lower=True)
    maha = np.sum(sol * sol, axis=0)
    out = (
        gammaln((dof + p) / 2.0)
        - gammaln(dof / 2.0)
        - 0.5 * p * np.log(dof * np.pi)
        - 0.5 * chol_logdet(scale_chol)
        - 0.5 * (dof + p) * np.log1p(maha / dof)
    )
    return float(out[0]) if y.ndim == 1 else out
