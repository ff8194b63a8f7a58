"""Hard-edge correlation kernels for products of complex Ginibre matrices.

Two kernel families live here:

* ``KernelBundle`` — the integrable-form kernel
  ``K_M(x, y) = sum_j phi_j(x) psi_j(y) / (x - y)`` for one matrix (M=1,
  Bessel functions) and two matrices (M=2, regularized 0F2 series).
* ``borodin_kernel`` — the hard-edge kernel of the Laguerre Muttalib-Borodin
  ensemble, a u-integral of two Wright Bessel factors, evaluated with a
  fixed Gauss-Legendre rule.

For theta = 2 the two families describe the same determinantal process: with
``c = 2 nu_1 + 1`` and ``nu_2 = nu_1 + 1/2``,

    K_M(x, y) = y**(-1/2) * K_mb(2 sqrt(y), 2 sqrt(x)),

i.e. the argument order is swapped between the two conventions (both kernels
are non-symmetric; gap probabilities are unaffected).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special_functions import (
    SeriesControl,
    DEFAULT_CONTROL,
    gamma_real,
    bessel_j_coefficients,
    hyp0f2_reg_coefficients,
    wright_bessel_coefficients,
    horner,
)

__all__ = [
    "HardEdgeParams",
    "KernelBundle",
    "MBParams",
    "build_kernel_bundle",
    "kernel_value",
    "kernel_matrix",
    "borodin_kernel",
    "borodin_kernel_matrix",
    "mb_params_for_hardedge",
]

# Relative diagonal window for the symmetric-offset limit.
_DIAG_DELTA = 1e-5
# M=2 needs nu2 - nu1 bounded away from the integers.
_GENERIC_TOL = 1e-6


@dataclass(frozen=True)
class HardEdgeParams:
    """Parameter set {M, nu_0..nu_M} with derived symmetric-function data.

    nu[0] must be 0 (the product construction pins the first index there) and
    every nu_m must exceed -1 for integrability at the hard edge.  ``e``
    holds the elementary symmetric functions e_1..e_{M+1} of all nu's and
    ``alpha`` the coefficients of prod_{m>=1}(x - nu_m) in ascending order.
    """

    M: int
    nu: tuple
    e: tuple = field(init=False)
    alpha: tuple = field(init=False)

    def __post_init__(self):
        if self.M not in (1, 2):
            raise ValueError("only M in {1, 2} is supported")
        nu = tuple(float(v) for v in self.nu)
        if len(nu) != self.M + 1:
            raise ValueError(f"expected {self.M + 1} indices, got {len(nu)}")
        if nu[0] != 0.0:
            raise ValueError("nu_0 must be 0")
        if any(v <= -1.0 for v in nu):
            raise ValueError("every nu_m must exceed -1")
        object.__setattr__(self, "nu", nu)
        from .special_functions import elementary_symmetric

        object.__setattr__(self, "e", elementary_symmetric(nu))
        # prod_{m=1..M} (x - nu_m), ascending coefficients
        coeffs = np.array([1.0])
        for v in nu[1:]:
            coeffs = np.convolve(coeffs, np.array([-v, 1.0]))
        object.__setattr__(self, "alpha", tuple(coeffs))

    @classmethod
    def from_nu(cls, nu) -> "HardEdgeParams":
        return cls(M=len(nu) - 1, nu=tuple(nu))

    @property
    def generic(self) -> bool:
        """True when nu_2 - nu_1 is safely non-integer (M=2 requirement)."""
        if self.M != 2:
            return True
        diff = self.nu[2] - self.nu[1]
        return abs(diff - round(diff)) > _GENERIC_TOL


class KernelBundle:
    """Evaluators for the kernel functions phi_j, psi_j of K_M.

    Each function is a finite linear combination of terms
    ``coeff * x**power * P(sign * x)`` where P is a truncated power series;
    the series coefficients are frozen at construction so evaluation is a
    plain Horner sweep over arrays.  Immutable after construction.
    """

    def __init__(self, params: HardEdgeParams, ctl: SeriesControl = DEFAULT_CONTROL):
        if params.M == 2 and not params.generic:
            raise ValueError(
                "nu_2 - nu_1 is within 1e-6 of an integer; the 0F2 kernel "
                "representation is not valid there")
        self.params = params
        self.ctl = ctl
        n_terms = ctl.max_terms
        nu = params.nu
        if params.M == 1:
            n0, n1 = nu
            v = n1 - n0
            # J_v(2 sqrt(x)) = x^(v/2) * P_v(x); the alternating sign is
            # already folded into the P coefficients, so the argument is +x
            pj = bessel_j_coefficients(v, n_terms)
            pj1 = bessel_j_coefficients(v + 1.0, n_terms)
            # phi/psi as (coeff, power, series coeffs, argument sign) terms
            self._phi = [
                [(1.0, -n0, pj, 1.0)],
                [(n0, -n0, pj, 1.0), (1.0, 1.0 - n0, pj1, 1.0)],
            ]
            self._psi = [
                [(-n0, n1, pj, 1.0), (-1.0, n1 + 1.0, pj1, 1.0)],
                [(1.0, n1, pj, 1.0)],
            ]
        else:
            n0, n1, n2 = nu
            a1, a2 = n1 - n0, n2 - n0
            g12 = gamma_real(n2 - n1) * gamma_real(n1 - n2 + 1.0)
            g21 = gamma_real(n1 - n2) * gamma_real(n2 - n1 + 1.0)
            r1 = hyp0f2_reg_coefficients(a1 + 1.0, a2 + 1.0, n_terms)
            r2 = hyp0f2_reg_coefficients(a1 + 2.0, a2 + 2.0, n_terms)
            r3 = hyp0f2_reg_coefficients(a1 + 3.0, a2 + 3.0, n_terms)
            self._phi = [
                [(-1.0, -n0, r1, -1.0)],
                [(-n0, -n0, r1, -1.0), (-1.0, 1.0 - n0, r2, -1.0)],
                [(-n0 ** 2, -n0, r1, -1.0), (1.0 - 2.0 * n0, 1.0 - n0, r2, -1.0),
                 (-1.0, 2.0 - n0, r3, -1.0)],
            ]

            def pair(shift):
                qa = hyp0f2_reg_coefficients(a1 + shift, n1 - n2 + 1.0, n_terms)
                qb = hyp0f2_reg_coefficients(a2 + shift, n2 - n1 + 1.0, n_terms)
                return [(g12, n1, qa, 1.0), (g21, n2, qb, 1.0)]

            pm1, p0, pp1 = pair(-1.0), pair(0.0), pair(1.0)

            def scaled(terms, c):
                return [(c * a, p, coef, sign) for (a, p, coef, sign) in terms]

            self._psi = [
                pm1 + scaled(p0, n0 - n1 - n2 + 1.0) + scaled(pp1, n1 * n2),
                p0 + scaled(pp1, -(n1 + n2)),
                pp1,
            ]

    @staticmethod
    def _eval_terms(terms, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for coeff, power, series, sign in terms:
            if coeff == 0.0:
                continue
            total += coeff * x ** power * horner(series, sign * x)
        return total

    def phi(self, j: int, x):
        """phi_j(x) for x > 0 (vectorized)."""
        return self._eval_terms(self._phi[j], x)

    def psi(self, j: int, x):
        """psi_j(x) for x > 0 (vectorized)."""
        return self._eval_terms(self._psi[j], x)

    def phi_all(self, x) -> np.ndarray:
        return np.stack([self.phi(j, x) for j in range(self.params.M + 1)])

    def psi_all(self, x) -> np.ndarray:
        return np.stack([self.psi(j, x) for j in range(self.params.M + 1)])

    def orthogonality_residual(self, x) -> float:
        """max |sum_j phi_j psi_j| / max_j |phi_j psi_j| over the given x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        prods = self.phi_all(x) * self.psi_all(x)
        scale = np.max(np.abs(prods))
        return float(np.max(np.abs(prods.sum(axis=0))) / scale)


def build_kernel_bundle(params: HardEdgeParams,
                        ctl: SeriesControl = DEFAULT_CONTROL) -> KernelBundle:
    """Construct the phi/psi evaluators for K_M; M=2 requires generic nu."""
    return KernelBundle(params, ctl)


def _kernel_offdiag(bundle: KernelBundle, x: float, y: float) -> float:
    num = float(np.dot(bundle.phi_all(np.array([x]))[:, 0],
                       bundle.psi_all(np.array([y]))[:, 0]))
    return num / (x - y)


def kernel_value(bundle: KernelBundle, x: float, y: float) -> float:
    """K_M(x, y) for x, y > 0.

    Near the diagonal the 0/0 form is resolved by the symmetric-offset
    average at relative offsets delta and delta/2 with one Richardson step,
    which removes the O(delta^2) error of the plain average.
    """
    if x <= 0 or y <= 0:
        raise ValueError("kernel_value requires x, y > 0")
    if abs(x - y) >= _DIAG_DELTA * max(x, 1.0):
        return _kernel_offdiag(bundle, x, y)

    def sym_avg(delta):
        return 0.5 * (_kernel_offdiag(bundle, x * (1 + delta), x)
                      + _kernel_offdiag(bundle, x * (1 - delta), x))

    d0, d1 = sym_avg(_DIAG_DELTA), sym_avg(_DIAG_DELTA / 2)
    return (4.0 * d1 - d0) / 3.0


def kernel_matrix(bundle: KernelBundle, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """K_M on the grid xs x ys; near-diagonal pairs go through kernel_value."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    phi = bundle.phi_all(xs)        # (M+1, nx)
    psi = bundle.psi_all(ys)        # (M+1, ny)
    num = phi.T @ psi               # (nx, ny)
    diff = xs[:, None] - ys[None, :]
    near = np.abs(diff) < _DIAG_DELTA * np.maximum(xs[:, None], 1.0)
    safe = np.where(near, 1.0, diff)
    K = num / safe
    if np.any(near):
        for i, j in zip(*np.nonzero(near)):
            K[i, j] = kernel_value(bundle, float(xs[i]), float(ys[j]))
    return K


@dataclass(frozen=True)
class MBParams:
    """Muttalib-Borodin hard-edge kernel parameters.

    Only theta = 2 carries quantitative validation; other theta values are
    accepted but untested.  ``inner_nodes`` sets the fixed Gauss-Legendre
    rule used for the u-integral on (0, 1).
    """

    c: float
    theta: float = 2.0
    ctl: SeriesControl = DEFAULT_CONTROL
    inner_nodes: int = 64

    def __post_init__(self):
        if not self.c > -1.0:
            raise ValueError("c must exceed -1")
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")
        if self.inner_nodes < 2:
            raise ValueError("inner_nodes must be >= 2")


def _mb_pieces(mb: MBParams):
    u, wu = np.polynomial.legendre.leggauss(mb.inner_nodes)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    ca = wright_bessel_coefficients((mb.c + 1.0) / mb.theta, 1.0 / mb.theta,
                                    mb.ctl.max_terms)
    cb = wright_bessel_coefficients(mb.c + 1.0, mb.theta, mb.ctl.max_terms)
    return u, wu * u ** mb.c, ca, cb


def borodin_kernel_matrix(mb: MBParams, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """K^(c,theta) on the grid xs x ys (vectorized over the inner rule)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    u, w_eff, ca, cb = _mb_pieces(mb)
    A = horner(ca, np.multiply.outer(xs, u))                  # (nx, nu)
    B = horner(cb, np.multiply.outer(ys, u) ** mb.theta)      # (ny, nu)
    return mb.theta * (xs ** mb.c)[:, None] * ((A * w_eff) @ B.T)


def borodin_kernel(mb: MBParams, x: float, y: float) -> float:
    """K^(c,theta)(x, y) for x, y >= 0."""
    if x < 0 or y < 0:
        raise ValueError("borodin_kernel requires x, y >= 0")
    return float(borodin_kernel_matrix(mb, np.array([x]), np.array([y]))[0, 0])


def mb_params_for_hardedge(params: HardEdgeParams, ctl: SeriesControl = DEFAULT_CONTROL,
                           inner_nodes: int = 64) -> MBParams:
    """The theta=2 Muttalib-Borodin parameters matching an M=2 index pair.

    Requires nu = (0, nu_1, nu_1 + 1/2); then c = 2 nu_1 + 1 and gap
    probabilities satisfy E_nu(0;(0,s)) = E_mb(0;(0, 2 sqrt(s))).
    """
    if params.M != 2:
        raise ValueError("the theta=2 correspondence needs M=2")
    n1, n2 = params.nu[1], params.nu[2]
    if abs(n2 - n1 - 0.5) > 1e-12:
        raise ValueError("theta=2 correspondence needs nu_2 = nu_1 + 1/2")
    return MBParams(c=2.0 * n1 + 1.0, theta=2.0, ctl=ctl, inner_nodes=inner_nodes)
