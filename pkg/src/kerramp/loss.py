"""Beam-splitter model of photon loss and lossy amplifier runs.

Each imperfect nonlinear element is modelled as the perfect unitary
followed by a fictitious beam splitter of reflectance R mixing the signal
with a fresh vacuum ancilla, which is then traced out.  The stages are
applied sequentially so at most one ancilla is ever co-resident with the
signal modes.

Because the beam-splitter generator conserves total photon number and the
ancilla starts in vacuum, the attach-evolve-trace step is carried out
exactly by exponentiating the generator block by block in total photon
number and contracting the ancilla; this is identical to building the full
extended-space unitary but avoids the dimension blow-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import circuits, fock
from .fock import DensityMatrix, ModeLayout, Operator
from .su11 import CircuitParams

BS_NAMES = ("R1", "R2", "R2p", "R3", "R4", "R4p", "R5")
_SQUEEZER_BS = ("R1", "R3", "R5")


class ReflectanceError(ValueError):
    """Reflectance outside [0, 1]."""


def _check_reflectance(r: float) -> None:
    if not 0.0 <= r <= 1.0:
        raise ReflectanceError(f"reflectance must lie in [0, 1], got {r}")


def bs_angle(reflectance: float) -> float:
    """Beam-splitter mixing angle arccos(sqrt(1 - R))."""
    _check_reflectance(reflectance)
    return math.acos(math.sqrt(1.0 - reflectance))


def master_equation_time(reflectance: float) -> float:
    """Dimensionless damping time t with R = 1 - exp(-t).

    R = 1 corresponds to infinite time and is rejected.
    """
    _check_reflectance(reflectance)
    if reflectance == 1.0:
        raise ReflectanceError("R = 1 corresponds to infinite damping time")
    return -math.log(1.0 - reflectance)


@dataclass(frozen=True)
class LossConfig:
    """Reflectances of the fictitious beam splitters.

    r_s covers the squeezer-adjacent splitters (R1 = R3 = R5), r_k the
    Kerr-adjacent ones (R2 = R2' = R4 = R4'); individual overrides win.
    """

    r_s: float = 0.0
    r_k: float = 0.0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_reflectance(self.r_s)
        _check_reflectance(self.r_k)
        for name, r in self.overrides.items():
            if name not in BS_NAMES:
                raise ReflectanceError(f"unknown beam splitter {name!r}")
            _check_reflectance(r)

    def reflectance(self, name: str) -> float:
        if name not in BS_NAMES:
            raise ReflectanceError(f"unknown beam splitter {name!r}")
        if name in self.overrides:
            return self.overrides[name]
        return self.r_s if name in _SQUEEZER_BS else self.r_k


def beam_splitter(
    layout: ModeLayout, signal_mode: int, ancilla_mode: int, reflectance: float
) -> Operator:
    """Beam-splitter unitary exp[theta (b v† - b† v)] on the full layout."""
    layout.check_mode(signal_mode)
    layout.check_mode(ancilla_mode)
    if signal_mode == ancilla_mode:
        raise fock.LayoutError("signal and ancilla modes must differ")
    theta = bs_angle(reflectance)
    b = fock.annihilation(layout, signal_mode).matrix
    v = fock.annihilation(layout, ancilla_mode).matrix
    gen = Operator(layout, theta * (b @ v.conj().T - b.conj().T @ v))
    return fock.expm(gen)


@lru_cache(maxsize=None)
def _vacuum_bs_kraus(dim: int, reflectance: float) -> tuple[np.ndarray, ...]:
    """Kraus operators of the vacuum-ancilla beam-splitter channel.

    E_k[m, n] = <m, k| B |n, 0>.  The generator conserves n_sig + n_anc, so
    B|n, 0> is computed from the (n+1)-dimensional block spanned by
    |n-k, k>; with the ancilla truncated at the signal dimension these
    amplitudes are exact.
    """
    theta = bs_angle(reflectance)
    E = [np.zeros((dim, dim), dtype=complex) for _ in range(dim)]
    for n in range(dim):
        G = np.zeros((n + 1, n + 1))
        for k in range(n):
            # <n-k-1, k+1| b v† |n-k, k> = sqrt((n-k)(k+1))
            c = math.sqrt((n - k) * (k + 1))
            G[k + 1, k] = c
            G[k, k + 1] = -c
        # G is real antisymmetric: exponentiate via the Hermitian iG
        w, V = np.linalg.eigh(1j * G)
        col = (V * np.exp(-1j * theta * w)) @ (V.conj().T[:, 0])
        for k in range(n + 1):
            E[k][n - k, n] = col[k]
    return tuple(E)


def apply_mode_loss(
    rho: DensityMatrix, mode: int, reflectance: float, validate: bool = False
) -> DensityMatrix:
    """Vacuum beam-splitter loss channel on one mode of a multimode state."""
    rho.layout.check_mode(mode)
    _check_reflectance(reflectance)
    if reflectance == 0.0:
        return rho
    out = np.zeros_like(rho.matrix)
    for E in _vacuum_bs_kraus(rho.layout.dims[mode], reflectance):
        M = fock.embed(rho.layout, mode, E)
        out += M @ rho.matrix @ M.conj().T
    out = (out + out.conj().T) / 2
    return DensityMatrix(rho.layout, out, validate=validate)


def lossy_stage(
    rho: DensityMatrix,
    unitary: Operator | None,
    loss_modes,
    validate: bool = False,
) -> DensityMatrix:
    """One circuit stage: apply the unitary, then lose each listed mode.

    loss_modes is a list of (mode, reflectance) pairs; each loss attaches a
    fresh vacuum ancilla, mixes it in on a beam splitter, and traces it out.
    """
    if unitary is not None:
        rho = fock.evolve(rho, unitary, validate=validate)
    for mode, r in loss_modes:
        rho = apply_mode_loss(rho, mode, r, validate=validate)
    return rho


@dataclass(frozen=True)
class LossyRunReport:
    """Outcome of a lossy amplifier run at converged truncation."""

    rho_out: DensityMatrix
    rho_ideal: DensityMatrix
    fidelity: float
    truncation: int
    convergence_delta: float
    converged: bool


def make_plus_plus(layout: ModeLayout) -> DensityMatrix:
    """|++> with |+> = (|0> + |1>)/sqrt(2), embedded in the first two modes."""
    if layout.num_modes < 2:
        raise fock.LayoutError("need at least two modes")
    zeros = (0,) * (layout.num_modes - 2)
    psi = sum(
        layout.basis_vector((na, nb) + zeros) for na in (0, 1) for nb in (0, 1)
    ) / 2.0
    return DensityMatrix.from_state_vector(layout, psi)


def make_werner(layout: ModeLayout, p: float) -> DensityMatrix:
    """Werner-like state p |Phi+><Phi+| + (1-p)/4 I on the two-qubit block."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if layout.num_modes < 2:
        raise fock.LayoutError("need at least two modes")
    zeros = (0,) * (layout.num_modes - 2)
    phi = (
        layout.basis_vector((0, 0) + zeros) + layout.basis_vector((1, 1) + zeros)
    ) / math.sqrt(2.0)
    rho = p * np.outer(phi, phi.conj())
    for na in (0, 1):
        for nb in (0, 1):
            v = layout.basis_vector((na, nb) + zeros)
            rho += (1.0 - p) / 4.0 * np.outer(v, v.conj())
    return DensityMatrix(layout, rho)


def embed_state(rho: DensityMatrix, new_layout: ModeLayout) -> DensityMatrix:
    """Zero-pad a state into a layout with enlarged mode dimensions."""
    old, new = rho.layout, new_layout
    if old.num_modes != new.num_modes or any(
        dn < do for do, dn in zip(old.dims, new.dims)
    ):
        raise fock.LayoutError(f"cannot embed {old.dims} into {new.dims}")
    out = np.zeros((new.total_dim, new.total_dim), dtype=complex)
    idx = np.array([new.flat_index(old.multi_index(f)) for f in range(old.total_dim)])
    out[np.ix_(idx, idx)] = rho.matrix
    return DensityMatrix(new, out, validate=False)


def _run_fixed_dim(
    rho_in: DensityMatrix, params: CircuitParams, loss: LossConfig
) -> tuple[DensityMatrix, DensityMatrix]:
    """One pass of the five-stage lossy circuit at the input truncation.

    Stage pattern: (1) S1 then R1 on b; (2) K then R2 on b and R2' on a;
    (3) P, S2, R3 on b, then P again; (4) K then R4 on b, R4' on a;
    (5) S1 then R5 on b, then P'.  The ideal reference applies the single
    amplified Kerr unitary K(2 gamma).
    """
    layout = rho_in.layout
    d = params.delta
    S1 = circuits.squeeze_single(layout, 1, params.theta1)
    S2 = circuits.squeeze_single(layout, 1, params.theta2)
    K = circuits.kerr(layout, 0, 1, d)
    P = circuits.phase_shift(layout, {1: d / 2.0})
    pp_coeffs, pp_const = circuits.beta_prime_two_mode(params)
    Pp = circuits.phase_shift(layout, pp_coeffs, pp_const)

    rho = lossy_stage(rho_in, S1, [(1, loss.reflectance("R1"))])
    rho = lossy_stage(
        rho, K, [(1, loss.reflectance("R2")), (0, loss.reflectance("R2p"))]
    )
    rho = lossy_stage(rho, S2 @ P, [(1, loss.reflectance("R3"))])
    rho = fock.evolve(rho, P, validate=False)
    rho = lossy_stage(
        rho, K, [(1, loss.reflectance("R4")), (0, loss.reflectance("R4p"))]
    )
    rho = lossy_stage(rho, S1, [(1, loss.reflectance("R5"))])
    rho_out = fock.evolve(rho, Pp, validate=False)

    rho_ideal = fock.evolve(
        rho_in, circuits.kerr(layout, 0, 1, params.dphi_amp), validate=False
    )
    return rho_out, rho_ideal


def run_lossy_amplifier(
    rho_in: DensityMatrix,
    params: CircuitParams,
    loss: LossConfig,
    start_dim: int = 20,
    max_dim: int = 160,
    tol: float = 1e-3,
) -> LossyRunReport:
    """Lossy two-mode amplifier run with truncation-doubling convergence.

    rho_in lives on layout (a: 2, b: D_in); the bosonic mode is zero-padded
    to growing truncations until the fidelity between lossy and ideal
    outputs changes by less than tol under doubling.  A non-convergent run
    returns the best estimate with converged=False.
    """
    if rho_in.layout.num_modes != 2 or rho_in.layout.dims[0] != 2:
        raise fock.LayoutError(
            "expected layout (a: 2, b: D), got " + str(rho_in.layout.dims)
        )
    dim = max(start_dim, rho_in.layout.dims[1])
    prev_f = None
    best = None
    while dim <= max_dim:
        layout = fock.make_layout([2, dim])
        rho = embed_state(rho_in, layout)
        rho_out, rho_ideal = _run_fixed_dim(rho, params, loss)
        f = fock.fidelity(rho_ideal, rho_out)
        delta_f = math.inf if prev_f is None else abs(f - prev_f)
        best = LossyRunReport(
            rho_out=rho_out,
            rho_ideal=rho_ideal,
            fidelity=f,
            truncation=dim,
            convergence_delta=delta_f,
            converged=delta_f < tol,
        )
        if best.converged:
            return best
        prev_f = f
        dim *= 2
    return best
