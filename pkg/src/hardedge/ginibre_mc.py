"""Monte Carlo sampling of the smallest squared singular value.

Draws products of rectangular complex Gaussian matrices, extracts the
smallest eigenvalue of Y^dag Y, and compares hard-edge-scaled empirical gap
probabilities P(lambda_min > s/N_0) against analytic curves.

Reproducibility: every sample runs on its own Philox counter-based stream
keyed by (seed, sample index), so results are bit-identical regardless of
execution order and safe to parallelize by index.

Variance conventions: the hard-edge kernel normalization corresponds to
matrix entries of total unit variance ("unit_total", real and imaginary
parts of variance 1/2 each; calibrated against the one-matrix Bessel law).
"unit_component" draws both parts with unit variance, which inflates each
eigenvalue by 2 per factor; empirical_gap removes the 2^M before scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "McConfig",
    "McResult",
    "sample_min_singular_sq",
    "empirical_gap",
    "wilson_interval",
    "ks_distance",
]

_N0_MAX = 512


@dataclass(frozen=True)
class McConfig:
    """Sampler configuration; nu_int are the integer index offsets nu_1..nu_M."""

    M: int
    N0: int
    nu_int: tuple
    samples: int
    seed: int = 0
    variance_convention: str = "unit_total"

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 1 <= self.N0 <= _N0_MAX:
            raise ValueError(f"N0 must lie in [1, {_N0_MAX}]")
        nu = tuple(int(v) for v in self.nu_int)
        if len(nu) != self.M:
            raise ValueError(f"expected {self.M} integer indices")
        if any(v < 0 for v in nu):
            raise ValueError("nu_int must be non-negative integers")
        object.__setattr__(self, "nu_int", nu)
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.variance_convention not in ("unit_total", "unit_component"):
            raise ValueError("unknown variance convention")

    @property
    def dims(self) -> tuple:
        return (self.N0,) + tuple(self.N0 + v for v in self.nu_int)


@dataclass
class McResult:
    """Sampled smallest eigenvalues of Y^dag Y plus summary statistics."""

    config: McConfig
    lambda_min: np.ndarray
    scaled: bool = False
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.lambda_min <= 0):
            raise ValueError("smallest eigenvalues must be positive")
        lm = self.lambda_min
        self.summary = {"n": int(lm.size), "mean": float(lm.mean()),
                        "min": float(lm.min()), "max": float(lm.max())}


def _sample_one(cfg: McConfig, index: int) -> float:
    rng = np.random.Generator(np.random.Philox(
        key=np.array([cfg.seed & 0xFFFFFFFFFFFFFFFF, index],
                     dtype=np.uint64)))
    dims = cfg.dims
    scale = math.sqrt(0.5) if cfg.variance_convention == "unit_total" else 1.0
    Y = None
    for m in range(1, cfg.M + 1):
        shape = (dims[m], dims[m - 1])
        X = scale * (rng.standard_normal(shape)
                     + 1j * rng.standard_normal(shape))
        Y = X if Y is None else X @ Y
    gram = Y.conj().T @ Y
    return float(np.linalg.eigvalsh(gram)[0])


def sample_min_singular_sq(cfg: McConfig) -> McResult:
    """Draw cfg.samples independent products; deterministic given the seed."""
    lam = np.array([_sample_one(cfg, i) for i in range(cfg.samples)])
    return McResult(config=cfg, lambda_min=lam)


def wilson_interval(k: int, n: int, z: float = 2.5758293035489004) -> tuple:
    """Wilson score interval for a binomial proportion (default 99%)."""
    if n == 0:
        raise ValueError("empty sample")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def empirical_gap(result: McResult, s_grid, N0: int | None = None) -> list:
    """[(s, p_hat, ci_low, ci_high)]: empirical P(lambda_min > s/N0).

    Applies the 2^M eigenvalue rescaling when the samples were drawn under
    the unit_component convention, so both conventions estimate the same
    scaled law.
    """
    cfg = result.config
    n0 = cfg.N0 if N0 is None else N0
    lam = result.lambda_min.copy()
    if cfg.variance_convention == "unit_component":
        lam = lam / 2.0 ** cfg.M
    out = []
    n = lam.size
    for s in s_grid:
        k = int(np.count_nonzero(lam > s / n0))
        lo, hi = wilson_interval(k, n)
        out.append((float(s), k / n, lo, hi))
    return out


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs."""
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def save_samples(result: McResult, path) -> None:
    """Persist raw samples as flat little-endian float64 plus a JSON sidecar.

    The sidecar (same path with ".json" appended) records the full sampler
    configuration, so the binary stream is reproducible bit for bit.
    """
    import json
    from pathlib import Path

    path = Path(path)
    result.lambda_min.astype("<f8").tofile(path)
    cfg = result.config
    sidecar = {
        "M": cfg.M, "N0": cfg.N0, "nu_int": list(cfg.nu_int),
        "samples": cfg.samples, "seed": cfg.seed,
        "variance_convention": cfg.variance_convention,
        "dtype": "<f8", "count": int(result.lambda_min.size),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_samples(path) -> McResult:
    """Rebuild an McResult from a binary sample file and its sidecar."""
    import json
    from pathlib import Path

    path = Path(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    lam = np.fromfile(path, dtype=sidecar["dtype"])
    if lam.size != sidecar["count"]:
        raise ValueError("sample file length disagrees with its sidecar")
    cfg = McConfig(M=sidecar["M"], N0=sidecar["N0"],
                   nu_int=tuple(sidecar["nu_int"]), samples=sidecar["samples"],
                   seed=sidecar["seed"],
                   variance_convention=sidecar["variance_convention"])
    return McResult(config=cfg, lambda_min=lam)
