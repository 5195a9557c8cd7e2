"""SU(1,1) parameter relations for squeeze-amplified cross-Kerr shifts.

Solves the angle relations linking the initial conditional phase delta and
the outer squeeze strength theta1 to the inner squeeze theta2 and the
amplified phase 2*gamma, inverts them (with saturation handling), and
verifies the five-factor group identity

    exp(i th1 G2) exp(i d/2 G3) exp(i th2 G2) exp(i d/2 G3) exp(i th1 G2)
        = exp(i gamma G3)

in the 2x2 non-Hermitian representation and in truncated Fock
representations (single-mode and two-mode squeezing families).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fock
from .fock import ModeLayout, Operator

REPRESENTATIONS = ("matrix-2x2", "fock-single", "fock-two-mode")


class ParameterRangeError(ValueError):
    """delta outside the supported open interval (0, pi/2)."""


@dataclass(frozen=True)
class Saturated:
    """No real theta1 reproduces the requested theta2; the amplified phase
    is capped at pi."""

    delta: float
    theta2: float
    dphi_amp: float = math.pi


@dataclass(frozen=True)
class CircuitParams:
    """Angle set of one amplification circuit plus derived quantities."""

    delta: float
    theta1: float
    theta2: float
    gamma: float

    @property
    def dphi_in(self) -> float:
        return self.delta

    @property
    def dphi_amp(self) -> float:
        return 2.0 * self.gamma

    @property
    def kappa(self) -> float:
        return 2.0 * self.gamma / self.delta

    @property
    def beta_coeff(self) -> float:
        """Coefficient of n_b in the inner phase shifter P."""
        return self.delta / 2.0


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < math.pi / 2:
        raise ParameterRangeError(
            f"delta must lie in the open interval (0, pi/2), got {delta}"
        )


def solve_params(delta: float, theta1: float) -> CircuitParams:
    """Solve for theta2 and gamma given delta and theta1.

    theta2 = arctanh(-cos(delta) tanh(2 theta1)),
    gamma  = arctan(tan(delta) cosh(2 theta1)).

    The principal arctan branch is correct on delta in (0, pi/2) where both
    tan(delta) and the resulting gamma stay in the first quadrant.
    """
    _check_delta(delta)
    if not math.isfinite(theta1):
        raise ValueError(f"theta1 must be finite, got {theta1}")
    theta2 = math.atanh(-math.cos(delta) * math.tanh(2.0 * theta1))
    gamma = math.atan(math.tan(delta) * math.cosh(2.0 * theta1))
    return CircuitParams(delta=delta, theta1=theta1, theta2=theta2, gamma=gamma)


def invert_theta2(delta: float, theta2: float):
    """Outer squeeze theta1 >= 0 reproducing |theta2|, or Saturated.

    Solves tanh(2 theta1) = |tanh(theta2)| / cos(delta).  When the right
    side reaches 1 no real solution exists and the amplified phase saturates
    at pi.
    """
    _check_delta(delta)
    ratio = abs(math.tanh(theta2)) / math.cos(delta)
    if ratio >= 1.0:
        return Saturated(delta=delta, theta2=theta2)
    return 0.5 * math.atanh(ratio)


def kappa_small_delta(theta1: float) -> float:
    """Small-delta amplification factor 2 cosh(2 theta1)."""
    return 2.0 * math.cosh(2.0 * theta1)


def db_to_theta(db: float) -> float:
    """Squeeze parameter from a quadrature-variance level in dB (<= 0).

    Convention: e^(-2 theta) = 10^(db/10), i.e. theta = |db| ln(10) / 20.
    """
    if db > 0:
        raise ValueError(f"squeezing level must be <= 0 dB, got {db}")
    return abs(db) * math.log(10.0) / 20.0


@dataclass(frozen=True)
class Su11Generators:
    """Generator triple (G1, G2, G3) in one representation.

    For the Fock representations the generators are Operators over the
    layout; for matrix-2x2 they are bare 2x2 arrays and layout is None.
    """

    representation: str
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    layout: ModeLayout | None = None


def _z_diag(layout: ModeLayout) -> np.ndarray:
    """Diagonal of Z_a = 2 n_a - 1 on the qubit mode 0."""
    return 2.0 * fock.number_diagonal(layout, 0) - 1.0


def generators(layout: ModeLayout | None, representation: str) -> Su11Generators:
    """Build the SU(1,1) generator triple in the requested representation.

    fock-single needs layout (a: 2, b: D); fock-two-mode needs
    (a: 2, b: D, c: D); matrix-2x2 ignores the layout.
    """
    if representation == "matrix-2x2":
        g1 = np.array([[0, 1], [-1, 0]], dtype=complex)
        g2 = np.array([[0, -1j], [-1j, 0]], dtype=complex)
        g3 = np.array([[1, 0], [0, -1]], dtype=complex)
        return Su11Generators(representation, g1, g2, g3, layout=None)

    if layout is None:
        raise fock.LayoutError(f"representation {representation} requires a layout")

    if representation == "fock-single":
        if layout.num_modes < 2 or layout.dims[0] != 2:
            raise fock.LayoutError(
                "fock-single needs layout (a: 2, b: D), got " + str(layout.dims)
            )
        z = _z_diag(layout)
        b = fock.annihilation(layout, 1).matrix
        bb = b @ b
        nb = fock.number_diagonal(layout, 1)
        g1 = 0.5 * (bb + bb.conj().T) @ np.diag(z)
        g2 = 0.5j * (bb - bb.conj().T)
        g3 = np.diag(0.5 * (2.0 * nb + 1.0) * z)
        return Su11Generators(representation, g1, g2, g3, layout=layout)

    if representation == "fock-two-mode":
        if layout.num_modes < 3 or layout.dims[0] != 2:
            raise fock.LayoutError(
                "fock-two-mode needs layout (a: 2, b: D, c: D), got "
                + str(layout.dims)
            )
        z = _z_diag(layout)
        b = fock.annihilation(layout, 1).matrix
        c = fock.annihilation(layout, 2).matrix
        bc = b @ c
        nb = fock.number_diagonal(layout, 1)
        nc = fock.number_diagonal(layout, 2)
        g1 = (bc + bc.conj().T) @ np.diag(z)
        g2 = 1j * (bc - bc.conj().T)
        g3 = np.diag((nb + nc + 1.0) * z)
        return Su11Generators(representation, g1, g2, g3, layout=layout)

    raise ValueError(f"unknown representation {representation!r}")


def commutator_residual(gens: Su11Generators, block: int | None = None) -> float:
    """Max deviation from [G1,G2]=-2iG3, [G2,G3]=2iG1, [G3,G1]=2iG2.

    For Fock representations, restrict to the interior block (bosonic mode
    indices <= block).
    """
    g1, g2, g3 = gens.g1, gens.g2, gens.g3
    residuals = [
        g1 @ g2 - g2 @ g1 + 2j * g3,
        g2 @ g3 - g3 @ g2 - 2j * g1,
        g3 @ g1 - g1 @ g3 - 2j * g2,
    ]
    if block is not None and gens.layout is not None:
        idx = gens.layout.interior_indices(block, modes=range(1, gens.layout.num_modes))
        residuals = [r[np.ix_(idx, idx)] for r in residuals]
    return float(max(np.max(np.abs(r)) for r in residuals))


def _exp_factor(gens: Su11Generators, coeff: float, which: str) -> np.ndarray:
    """exp(i coeff G) for G in {g2, g3}.

    In the Fock representations these generators are Hermitian, so the
    exponential is computed by eigendecomposition; the 2x2 representation is
    non-Hermitian (a boost) and uses the general matrix exponential.
    """
    g = gens.g2 if which == "g2" else gens.g3
    if gens.representation == "matrix-2x2":
        return scipy.linalg.expm(1j * coeff * g)
    if which == "g3":
        return np.diag(np.exp(1j * coeff * np.diag(g)))
    return fock.exp_i_hermitian(gens.layout, g, coeff).matrix


def identity_factors(params: CircuitParams, gens: Su11Generators):
    """(left, right) sides of the five-factor identity as matrices."""
    eg2_1 = _exp_factor(gens, params.theta1, "g2")
    eg2_2 = _exp_factor(gens, params.theta2, "g2")
    eg3 = _exp_factor(gens, params.delta / 2.0, "g3")
    left = eg2_1 @ eg3 @ eg2_2 @ eg3 @ eg2_1
    right = _exp_factor(gens, params.gamma, "g3")
    return left, right


def verify_identity(
    params: CircuitParams, gens: Su11Generators, block: int | None = None
) -> float:
    """Max-norm residual of the five-factor identity, restricted to the
    interior block for Fock representations (block = max bosonic index)."""
    left, right = identity_factors(params, gens)
    diff = left - right
    if block is not None and gens.layout is not None:
        idx = gens.layout.interior_indices(block, modes=range(1, gens.layout.num_modes))
        diff = diff[np.ix_(idx, idx)]
    return float(np.max(np.abs(diff)))


def verify_matrix_derivation(params: CircuitParams):
    """Evaluate the 2x2 product V D(d) w[[1,x],[x,1]] D(d) V and return
    (x, w, y) with y the resulting diagonal entry.

    Here x = -cos(delta) tanh(2 theta1), w = 1/sqrt(1-x^2), and the product
    must be diag(y, y*) with |y| = 1 and arg y = gamma.  Raises if the
    product fails to be of that form.
    """
    d, t1 = params.delta, params.theta1
    x = -math.cos(d) * math.tanh(2.0 * t1)
    w = 1.0 / math.sqrt(1.0 - x * x)
    V = np.array(
        [[math.cosh(t1), math.sinh(t1)], [math.sinh(t1), math.cosh(t1)]],
        dtype=complex,
    )
    D = np.diag([np.exp(1j * d / 2.0), np.exp(-1j * d / 2.0)])
    M = V @ D @ (w * np.array([[1.0, x], [x, 1.0]], dtype=complex)) @ D @ V
    off = max(abs(M[0, 1]), abs(M[1, 0]))
    if off > 1e-10:
        raise ArithmeticError(f"product is not diagonal: off-diagonal {off:.2e}")
    y = complex(M[0, 0])
    if abs(M[1, 1] - np.conj(y)) > 1e-10:
        raise ArithmeticError("product is not of the form diag(y, y*)")
    return x, w, y
