"""Truncated multimode Fock-space backbone.

Dense operators and density matrices over a composite Hilbert space built
as the tensor product of per-mode truncated Fock ladders.  All circuit
generators used downstream are anti-Hermitian, so matrix exponentials are
computed by eigendecomposition of the associated Hermitian matrix.

Truncation caveat: on a D-level ladder [b, b†] = 1 holds only away from the
top level, so identity and unitarity checks for squeezing-like operators are
restricted to an interior block (all mode indices below a chosen bound).
Number-conserving operators are exact on the full truncated space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-8
ANTIHERMITIAN_TOL = 1e-10


class LayoutError(ValueError):
    """Invalid mode layout or mode index."""


class StateError(ValueError):
    """Matrix does not qualify as a density matrix."""


class OperatorError(ValueError):
    """Operator precondition violated (shape, flags, hermiticity)."""


@dataclass(frozen=True)
class ModeLayout:
    """Ordered per-mode truncation dimensions of a composite Hilbert space.

    Mode 0 is the qubit mode by convention; the flat index is row-major
    over the multi-index (n_0, n_1, ...).
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise LayoutError("layout needs at least one mode")
        if any(d < 2 for d in self.dims):
            raise LayoutError(f"every mode dimension must be >= 2, got {self.dims}")

    @property
    def num_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.num_modes:
            raise LayoutError(f"mode {mode} out of range for {self.num_modes} modes")

    def flat_index(self, multi) -> int:
        """Row-major flat index of a multi-index (n_0, n_1, ...)."""
        return int(np.ravel_multi_index(tuple(multi), self.dims))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        """Inverse of :meth:`flat_index`."""
        return tuple(int(i) for i in np.unravel_index(flat, self.dims))

    def basis_vector(self, multi) -> np.ndarray:
        """Unit vector for the Fock basis state |n_0, n_1, ...>."""
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.flat_index(multi)] = 1.0
        return v

    def interior_indices(self, bound: int, modes=None) -> np.ndarray:
        """Flat indices whose Fock index on every selected mode is <= bound.

        Modes not selected (default: all modes) are unrestricted.  Used to
        carve out the interior block where truncation artifacts are
        negligible.
        """
        if modes is None:
            modes = range(self.num_modes)
        modes = set(modes)
        grids = np.unravel_index(np.arange(self.total_dim), self.dims)
        mask = np.ones(self.total_dim, dtype=bool)
        for m in modes:
            mask &= grids[m] <= bound
        return np.nonzero(mask)[0]


def make_layout(dims) -> ModeLayout:
    """Build a ModeLayout from a list of per-mode truncation dimensions."""
    return ModeLayout(tuple(int(d) for d in dims))


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix over a ModeLayout with optional structure hints."""

    layout: ModeLayout
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False
    diagonal: bool = False

    def __post_init__(self):
        n = self.layout.total_dim
        if self.matrix.shape != (n, n):
            raise OperatorError(
                f"matrix shape {self.matrix.shape} does not match layout dim {n}"
            )
        if self.hermitian:
            dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
            if dev > HERMITICITY_TOL:
                raise OperatorError(f"hermitian flag set but deviation {dev:.2e}")

    @property
    def dag(self) -> np.ndarray:
        return self.matrix.conj().T

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.layout != self.layout:
            raise OperatorError("layout mismatch in operator product")
        return Operator(
            self.layout,
            self.matrix @ other.matrix,
            unitary=self.unitary and other.unitary,
            diagonal=self.diagonal and other.diagonal,
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace state over a ModeLayout."""

    layout: ModeLayout
    matrix: np.ndarray
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        n = self.layout.total_dim
        if self.matrix.shape != (n, n):
            raise StateError(
                f"matrix shape {self.matrix.shape} does not match layout dim {n}"
            )
        if self.validate:
            herm_dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
            if herm_dev > 1e-10:
                raise StateError(f"not Hermitian: deviation {herm_dev:.2e}")
            tr = np.trace(self.matrix)
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateError(f"trace {tr} is not 1")
            min_eig = np.linalg.eigvalsh(self.matrix)[0]
            if min_eig < -EIGENVALUE_TOL:
                raise StateError(f"negative eigenvalue {min_eig:.2e}")

    @classmethod
    def from_state_vector(cls, layout: ModeLayout, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def identity(layout: ModeLayout) -> Operator:
    return Operator(
        layout,
        np.eye(layout.total_dim, dtype=complex),
        hermitian=True,
        unitary=True,
        diagonal=True,
    )


def embed(layout: ModeLayout, mode: int, single_mode_matrix: np.ndarray) -> np.ndarray:
    """Tensor a single-mode matrix with identities on all other modes."""
    layout.check_mode(mode)
    d = layout.dims[mode]
    if single_mode_matrix.shape != (d, d):
        raise OperatorError(
            f"single-mode matrix shape {single_mode_matrix.shape} "
            f"does not match mode dimension {d}"
        )
    result = np.eye(1, dtype=complex)
    for m, dim in enumerate(layout.dims):
        factor = single_mode_matrix if m == mode else np.eye(dim)
        result = np.kron(result, factor)
    return result


def lowering_matrix(dim: int) -> np.ndarray:
    """Single-mode annihilation matrix: sqrt(n) on the subdiagonal."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def annihilation(layout: ModeLayout, mode: int) -> Operator:
    """Annihilation operator of the given mode, embedded in the full space."""
    layout.check_mode(mode)
    return Operator(layout, embed(layout, mode, lowering_matrix(layout.dims[mode])))


def creation(layout: ModeLayout, mode: int) -> Operator:
    layout.check_mode(mode)
    return Operator(
        layout, embed(layout, mode, lowering_matrix(layout.dims[mode]).conj().T)
    )


def number_op(layout: ModeLayout, mode: int) -> Operator:
    """Photon-number operator of the given mode."""
    layout.check_mode(mode)
    n = np.diag(np.arange(layout.dims[mode], dtype=complex))
    return Operator(layout, embed(layout, mode, n), hermitian=True, diagonal=True)


def number_diagonal(layout: ModeLayout, mode: int) -> np.ndarray:
    """Fock index of the given mode along the flat basis, as a real vector."""
    layout.check_mode(mode)
    grids = np.unravel_index(np.arange(layout.total_dim), layout.dims)
    return grids[mode].astype(float)


def expm(generator: Operator) -> Operator:
    """exp(A) for anti-Hermitian A, via eigendecomposition of H = -iA.

    Returns the unitary exp(iH).  Raises if A deviates from anti-Hermiticity
    beyond tolerance; every circuit generator in this package is of this form.
    """
    A = generator.matrix
    dev = np.max(np.abs(A + A.conj().T))
    if dev > ANTIHERMITIAN_TOL:
        raise OperatorError(f"generator is not anti-Hermitian: deviation {dev:.2e}")
    H = (-1j * A + (-1j * A).conj().T) / 2
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(1j * w)) @ V.conj().T
    return Operator(generator.layout, U, unitary=True, diagonal=generator.diagonal)


def exp_i_hermitian(layout: ModeLayout, H: np.ndarray, scale: float = 1.0) -> Operator:
    """Unitary exp(i * scale * H) for Hermitian H."""
    Hs = (H + H.conj().T) / 2
    if np.max(np.abs(H - Hs)) > ANTIHERMITIAN_TOL:
        raise OperatorError("matrix is not Hermitian")
    w, V = np.linalg.eigh(Hs)
    U = (V * np.exp(1j * scale * w)) @ V.conj().T
    return Operator(layout, U, unitary=True)


def diagonal_unitary(layout: ModeLayout, phases: np.ndarray) -> Operator:
    """Diagonal unitary exp(i * phases) from a real phase vector."""
    return Operator(
        layout,
        np.diag(np.exp(1j * np.asarray(phases, dtype=float))),
        unitary=True,
        diagonal=True,
    )


def evolve(rho: DensityMatrix, U: Operator, validate: bool = True) -> DensityMatrix:
    """Unitary conjugation U rho U†, re-symmetrized."""
    if U.layout != rho.layout:
        raise OperatorError("layout mismatch between state and unitary")
    if not U.unitary:
        raise OperatorError("operator is not flagged unitary")
    out = U.matrix @ rho.matrix @ U.dag
    out = (out + out.conj().T) / 2
    return DensityMatrix(rho.layout, out, validate=validate)


def partial_trace(rho: DensityMatrix, keep, validate: bool = True) -> DensityMatrix:
    """Reduced state over the kept modes (order preserved as given)."""
    keep = list(keep)
    if len(keep) == 0:
        raise LayoutError("keep must be non-empty")
    for m in keep:
        rho.layout.check_mode(m)
    if len(set(keep)) != len(keep):
        raise LayoutError("duplicate modes in keep")
    dims = rho.layout.dims
    n_modes = len(dims)
    tensor = rho.matrix.reshape(dims + dims)
    # einsum subscripts: traced modes share the same label on row and column
    # sides; kept modes keep distinct labels, output ordered as requested
    row = [0] * n_modes
    col = [0] * n_modes
    next_label = 0
    for m in range(n_modes):
        if m in keep:
            row[m] = next_label
            col[m] = next_label + 1
            next_label += 2
        else:
            row[m] = col[m] = next_label
            next_label += 1
    out_labels = [row[m] for m in keep] + [col[m] for m in keep]
    reduced_t = np.einsum(tensor, row + col, out_labels)
    new_dims = tuple(dims[m] for m in keep)
    d = int(np.prod(new_dims))
    return DensityMatrix(
        make_layout(new_dims), reduced_t.reshape(d, d), validate=validate
    )


def sqrtm_psd(rho: DensityMatrix) -> Operator:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-EIGENVALUE_TOL, 0) are clipped to 0; anything more
    negative indicates a logic bug rather than round-off and raises.
    """
    H = (rho.matrix + rho.matrix.conj().T) / 2
    w, V = np.linalg.eigh(H)
    if w[0] < -EIGENVALUE_TOL:
        raise StateError(f"matrix is not PSD: eigenvalue {w[0]:.2e}")
    w = np.clip(w, 0.0, None)
    root = (V * np.sqrt(w)) @ V.conj().T
    root = (root + root.conj().T) / 2
    return Operator(rho.layout, root, hermitian=True)


def fidelity(rho_ideal: DensityMatrix, rho_out: DensityMatrix) -> float:
    """Uhlmann-Jozsa fidelity [Tr sqrt(sqrt(r1) r2 sqrt(r1))]^2 in [0, 1].

    Uses the pure-state shortcut <psi|rho_out|psi> when rho_ideal has
    numerical rank 1.
    """
    if rho_ideal.layout != rho_out.layout:
        raise OperatorError("layout mismatch between states")
    w, V = np.linalg.eigh((rho_ideal.matrix + rho_ideal.matrix.conj().T) / 2)
    if w[-2] < 1e-12:  # numerically pure
        psi = V[:, -1]
        f = np.real(psi.conj() @ rho_out.matrix @ psi)
    else:
        root = sqrtm_psd(rho_ideal).matrix
        inner = root @ rho_out.matrix @ root
        ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
        # round-off in near-zero eigenvalues is amplified by the square
        # root; suppress anything below the spectral noise floor
        ev[ev < max(ev[-1], 0.0) * 1e-14] = 0.0
        f = np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))
