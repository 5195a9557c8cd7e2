"""Builders for the physical gates and the amplification circuits.

Gates: single- and two-mode squeezers, cross-Kerr, diagonal phase shifters,
SWAP.  Circuits: the two-mode squeeze-Kerr-squeeze amplifier and its
three-mode analogue built on two-mode squeezing, each returned together
with the equivalent single amplified-Kerr unitary for verification.

Operator products written left-to-right in the builders act right-to-left
on states, i.e. the rightmost factor is applied first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .fock import DensityMatrix, ModeLayout, Operator
from .su11 import CircuitParams


@dataclass(frozen=True)
class SqueezeSingle:
    mode: int
    theta: float


@dataclass(frozen=True)
class SqueezeTwoMode:
    mode_b: int
    mode_c: int
    theta: float


@dataclass(frozen=True)
class Kerr:
    mode_a: int
    mode_b: int
    dphi: float


@dataclass(frozen=True)
class PhaseShift:
    """Diagonal gate exp(-i (sum_j coeffs[j] n_j + constant))."""

    coeffs: tuple[tuple[int, float], ...]
    constant: float = 0.0


@dataclass(frozen=True)
class Swap:
    mode_b: int
    mode_c: int


Gate = SqueezeSingle | SqueezeTwoMode | Kerr | PhaseShift | Swap


@dataclass(frozen=True)
class CircuitPlan:
    """Ordered gate list (first entry applied first) over a layout."""

    layout: ModeLayout
    gates: tuple[Gate, ...]
    params: CircuitParams


def squeeze_single(layout: ModeLayout, mode: int, theta: float) -> Operator:
    """Single-mode quadrature squeezer exp(-(theta/2)(b b - b† b†))."""
    layout.check_mode(mode)
    b = fock.annihilation(layout, mode).matrix
    bb = b @ b
    gen = Operator(layout, -(theta / 2.0) * (bb - bb.conj().T))
    return fock.expm(gen)


def squeeze_two_mode(
    layout: ModeLayout, mode_b: int, mode_c: int, theta: float
) -> Operator:
    """Two-mode squeezer exp(-theta (b c - b† c†))."""
    layout.check_mode(mode_b)
    layout.check_mode(mode_c)
    if mode_b == mode_c:
        raise fock.LayoutError("two-mode squeezer needs two distinct modes")
    b = fock.annihilation(layout, mode_b).matrix
    c = fock.annihilation(layout, mode_c).matrix
    bc = b @ c
    gen = Operator(layout, -theta * (bc - bc.conj().T))
    return fock.expm(gen)


def kerr(layout: ModeLayout, mode_a: int, mode_b: int, dphi: float) -> Operator:
    """Cross-Kerr unitary exp(i dphi n_a n_b), diagonal in the Fock basis."""
    layout.check_mode(mode_a)
    layout.check_mode(mode_b)
    if mode_a == mode_b:
        raise fock.LayoutError("cross-Kerr needs two distinct modes")
    na = fock.number_diagonal(layout, mode_a)
    nb = fock.number_diagonal(layout, mode_b)
    return fock.diagonal_unitary(layout, dphi * na * nb)


def phase_shift(layout: ModeLayout, coeffs, constant: float = 0.0) -> Operator:
    """Diagonal unitary exp(-i (sum_j c_j n_j + constant)).

    coeffs maps mode index -> coefficient (dict or iterable of pairs).
    """
    if isinstance(coeffs, dict):
        coeffs = coeffs.items()
    phases = np.full(layout.total_dim, -constant, dtype=float)
    for mode, c in coeffs:
        layout.check_mode(mode)
        phases -= c * fock.number_diagonal(layout, mode)
    return fock.diagonal_unitary(layout, phases)


def swap(layout: ModeLayout, mode_b: int, mode_c: int) -> Operator:
    """Permutation exchanging the Fock indices of two equal-dimension modes."""
    layout.check_mode(mode_b)
    layout.check_mode(mode_c)
    if layout.dims[mode_b] != layout.dims[mode_c]:
        raise fock.LayoutError("SWAP requires equal mode dimensions")
    perm = np.empty(layout.total_dim, dtype=int)
    for flat in range(layout.total_dim):
        idx = list(layout.multi_index(flat))
        idx[mode_b], idx[mode_c] = idx[mode_c], idx[mode_b]
        perm[flat] = layout.flat_index(idx)
    M = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    M[perm, np.arange(layout.total_dim)] = 1.0
    return Operator(layout, M, hermitian=True, unitary=True)


def gate_operator(layout: ModeLayout, gate: Gate) -> Operator:
    """Materialize one gate descriptor as an Operator."""
    if isinstance(gate, SqueezeSingle):
        return squeeze_single(layout, gate.mode, gate.theta)
    if isinstance(gate, SqueezeTwoMode):
        return squeeze_two_mode(layout, gate.mode_b, gate.mode_c, gate.theta)
    if isinstance(gate, Kerr):
        return kerr(layout, gate.mode_a, gate.mode_b, gate.dphi)
    if isinstance(gate, PhaseShift):
        return phase_shift(layout, gate.coeffs, gate.constant)
    if isinstance(gate, Swap):
        return swap(layout, gate.mode_b, gate.mode_c)
    raise TypeError(f"unknown gate {gate!r}")


def compose(plan: CircuitPlan) -> Operator:
    """Product of all gates; plan.gates[0] is applied first (rightmost)."""
    U = fock.identity(plan.layout)
    for gate in plan.gates:
        U = gate_operator(plan.layout, gate) @ U
    return U


def beta_prime_two_mode(params: CircuitParams):
    """Coefficients of the outer phase shifter P' = exp(-i beta'),
    beta' = (gamma - delta)(n_a - 1/2) - gamma n_b."""
    g, d = params.gamma, params.delta
    return {0: g - d, 1: -g}, -(g - d) / 2.0


def beta_prime_three_mode(params: CircuitParams):
    """P' coefficients for the three-mode circuit:
    beta' = 2(gamma - delta)(n_a - 1/2) - gamma (n_b + n_c)."""
    g, d = params.gamma, params.delta
    return {0: 2.0 * (g - d), 1: -g, 2: -g}, -(g - d)


def build_two_mode_amplifier(params: CircuitParams, layout: ModeLayout):
    """Two-mode amplifier P' S1 K(d) P S2 P K(d) S1 and its equivalent
    amplified Kerr unitary K(2 gamma).

    Returns (plan, lhs, rhs); lhs is the composed circuit, rhs the single
    Kerr gate it must equal on the interior block.
    """
    if layout.num_modes != 2 or layout.dims[0] != 2:
        raise fock.LayoutError(
            "two-mode amplifier needs layout (a: 2, b: D), got " + str(layout.dims)
        )
    d = params.delta
    pp_coeffs, pp_const = beta_prime_two_mode(params)
    gates = (
        SqueezeSingle(1, params.theta1),
        Kerr(0, 1, d),
        PhaseShift(((1, d / 2.0),)),
        SqueezeSingle(1, params.theta2),
        PhaseShift(((1, d / 2.0),)),
        Kerr(0, 1, d),
        SqueezeSingle(1, params.theta1),
        PhaseShift(tuple(pp_coeffs.items()), pp_const),
    )
    plan = CircuitPlan(layout, gates, params)
    lhs = compose(plan)
    rhs = kerr(layout, 0, 1, params.dphi_amp)
    return plan, lhs, rhs


def build_three_mode_amplifier(
    params: CircuitParams, layout: ModeLayout, use_swap_decomposition: bool = False
):
    """Three-mode amplifier based on two-mode squeezing.

    lhs composes the seven-factor product (squeezers interleaved with
    Kerr-and-phase factors on ab and ac) together with the outer phase
    shifter; rhs is the pair of amplified Kerr gates K_ab(2g) K_ac(2g).
    With use_swap_decomposition, every K_ac factor is realized as
    SWAP_bc K_ab SWAP_bc.
    """
    if layout.num_modes != 3 or layout.dims[0] != 2:
        raise fock.LayoutError(
            "three-mode amplifier needs layout (a: 2, b: D, c: D), got "
            + str(layout.dims)
        )
    d = params.delta

    def kerr_ps(signal_mode):
        # e^{i (d/2)(2 n_a n_j - n_j)} = K_aj(d) * exp(-i (d/2) n_j)
        if use_swap_decomposition and signal_mode == 2:
            return (
                Swap(1, 2),
                Kerr(0, 1, d),
                Swap(1, 2),
                PhaseShift(((signal_mode, d / 2.0),)),
            )
        return (
            Kerr(0, signal_mode, d),
            PhaseShift(((signal_mode, d / 2.0),)),
        )

    pp_coeffs, pp_const = beta_prime_three_mode(params)
    gates = (
        SqueezeTwoMode(1, 2, params.theta1),
        *kerr_ps(2),
        *kerr_ps(1),
        SqueezeTwoMode(1, 2, params.theta2),
        *kerr_ps(2),
        *kerr_ps(1),
        SqueezeTwoMode(1, 2, params.theta1),
        PhaseShift(tuple(pp_coeffs.items()), pp_const),
    )
    plan = CircuitPlan(layout, gates, params)
    lhs = compose(plan)
    rhs = kerr(layout, 0, 1, params.dphi_amp) @ kerr(layout, 0, 2, params.dphi_amp)
    return plan, lhs, rhs


def equivalence_residual(
    lhs: Operator, rhs: Operator, block: int, modes=None
) -> float:
    """Max-norm of lhs - rhs on the interior block (bosonic indices <= block)."""
    layout = lhs.layout
    if modes is None:
        modes = range(1, layout.num_modes)
    idx = layout.interior_indices(block, modes=modes)
    diff = (lhs.matrix - rhs.matrix)[np.ix_(idx, idx)]
    return float(np.max(np.abs(diff)))


def conditional_phase(U: Operator, n_b: int = 1) -> float:
    """Cross-Kerr coefficient of a circuit diagonal in n_a, per unit n_b.

    For a diagonal-in-number circuit the n_a n_b cross term is isolated from
    linear phase shifts by

        arg[<1,n|U|1,n> <0,n|U|0,n>* <1,0|U|1,0>* <0,0|U|0,0>] / n.
    """
    if n_b < 1:
        raise ValueError("probe level n_b must be >= 1")
    layout = U.layout

    def amp(na, nb):
        i = layout.flat_index((na, nb) + (0,) * (layout.num_modes - 2))
        return U.matrix[i, i]

    z = amp(1, n_b) * np.conj(amp(0, n_b)) * np.conj(amp(1, 0)) * amp(0, 0)
    return float(np.angle(z)) / n_b


def apply_plan(rho: DensityMatrix, plan: CircuitPlan) -> DensityMatrix:
    """Evolve a state through the composed circuit."""
    return fock.evolve(rho, compose(plan))
