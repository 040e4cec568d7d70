"""Independent eigensolver in a symmetry-adapted harmonic-oscillator basis.

Product states |n_x n_y> of a 2D isotropic oscillator of frequency omega
(a variational parameter) are combined into C_4v blocks: coordinate parity
fixes the behavior under the axis reflections, diagonal-reflection
symmetrization fixes the rest.  The quartic Hamiltonian couples quantum
numbers by 0, +-2, +-4 per coordinate with closed-form ladder elements, so
every block is assembled exactly and diagonalized densely.  Cross-block
elements vanish identically by construction.

Serves as the oracle ("exact") spectrum for validating the scar-basis
solver; eigenvalues are variational upper bounds that decrease
monotonically with basis size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import SizeError
from .wavefunctions import WaveFunction

__all__ = [
    "HOBasisSpec",
    "ReferenceSpectrum",
    "block_basis",
    "ho_matrix_element",
    "assemble_block",
    "build_reference_spectrum",
    "project_to_grid",
    "staircase_count",
]


@dataclass(frozen=True)
class HOBasisSpec:
    """Oscillator frequency, total-quanta cutoff and symmetry class."""

    omega: float = 1.0
    n_max: int = 60
    irrep: str = "A1"

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")


@dataclass
class ReferenceSpectrum:
    irrep: str
    eigenvalues: np.ndarray
    coefficients: np.ndarray  # column k = state k in the block basis
    basis: list  # [(a, b), ...] with symmetrization sign in `sign`
    sign: int  # +1 symmetric / -1 antisymmetric under x<->y; 0 for E blocks
    n_max: int
    omega: float
    converged: np.ndarray  # per-state flag from the n_max sweep


def _x2_matrix(m, omega, hbar=1.0):
    """<i|x^2|j> for 1D HO eigenfunctions, exact tridiagonal band."""
    n = np.arange(m)
    diag = (2 * n + 1) * hbar / (2 * omega)
    off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) * hbar / (2 * omega)
    mat = np.diag(diag)
    mat += np.diag(off, 2) + np.diag(off, -2)
    return mat


def _p2_matrix(m, omega, hbar=1.0):
    n = np.arange(m)
    diag = (2 * n + 1) * hbar * omega / 2
    off = -np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) * hbar * omega / 2
    mat = np.diag(diag)
    mat += np.diag(off, 2) + np.diag(off, -2)
    return mat


def _operators(n_max, omega, hbar=1.0):
    """Exact 1D operator matrices up to n_max, with x^4 = (x^2)^2 padded."""
    m = n_max + 1
    x2p = _x2_matrix(m + 2, omega, hbar)
    x4 = (x2p @ x2p)[:m, :m]
    x2 = x2p[:m, :m]
    p2 = _p2_matrix(m, omega, hbar)
    return x2, x4, p2


_PARITY = {
    # (x parity, y parity, swap sign); swap sign 0 = no symmetrization
    "A1": (0, 0, +1),
    "B1": (0, 0, -1),
    "B2": (1, 1, +1),
    "A2": (1, 1, -1),
    "E1": (1, 0, 0),
    "E2": (0, 1, 0),
}


def block_basis(spec):
    """Index pairs (a, b) of one symmetry block and its swap sign."""
    px, py, sign = _PARITY[spec.irrep]
    pairs = []
    for a in range(px, spec.n_max + 1, 2):
        for b in range(py, spec.n_max + 1 - a, 2):
            if sign == +1 and b < a:
                continue
            if sign == -1 and b <= a:
                continue
            pairs.append((a, b))
    return pairs, sign


def _product_element(ops, beta, a, b, c, d):
    """<ab|H|cd> in the raw product basis."""
    x2, x4, p2 = ops
    out = 0.0
    if b == d:
        out += 0.5 * p2[a, c] + 0.25 * beta * x4[a, c]
    if a == c:
        out += 0.5 * p2[b, d] + 0.25 * beta * x4[b, d]
    out += 0.5 * x2[a, c] * x2[b, d]
    return out


def ho_matrix_element(i, j, spec, params):
    """Exact Hamiltonian element between two block basis functions."""
    pairs, sign = block_basis(spec)
    ops = _operators(spec.n_max, spec.omega, params.hbar)
    a, b = pairs[i]
    c, d = pairs[j]
    raw = _product_element(ops, params.beta, a, b, c, d)
    if sign == 0:
        return raw
    na = 1.0 / np.sqrt(2.0 * (1.0 + (a == b)))
    nc = 1.0 / np.sqrt(2.0 * (1.0 + (c == d)))
    swap = _product_element(ops, params.beta, a, b, d, c)
    return 2.0 * na * nc * (raw + sign * swap)


def assemble_block(spec, params):
    """Dense Hamiltonian of one symmetry block (vectorized gathers)."""
    pairs, sign = block_basis(spec)
    n = len(pairs)
    if n == 0:
        return np.zeros((0, 0)), pairs, sign
    if n > 12000:
        raise SizeError(f"block of {n} elements exceeds the dense-solver bound")
    x2, x4, p2 = _operators(spec.n_max, spec.omega, params.hbar)
    beta = params.beta
    A = np.array([p[0] for p in pairs])
    B = np.array([p[1] for p in pairs])

    def raw(bra_a, bra_b, ket_a, ket_b):
        da = bra_a[:, None] == ket_a[None, :]
        db = bra_b[:, None] == ket_b[None, :]
        h = np.zeros((n, n))
        h += db * (0.5 * p2[np.ix_(bra_a, ket_a)] + 0.25 * beta * x4[np.ix_(bra_a, ket_a)])
        h += da * (0.5 * p2[np.ix_(bra_b, ket_b)] + 0.25 * beta * x4[np.ix_(bra_b, ket_b)])
        h += 0.5 * x2[np.ix_(bra_a, ket_a)] * x2[np.ix_(bra_b, ket_b)]
        return h

    h = raw(A, B, A, B)
    if sign != 0:
        norms = 1.0 / np.sqrt(2.0 * (1.0 + (A == B)))
        h = h + sign * raw(A, B, B, A)
        h = 2.0 * np.outer(norms, norms) * h
    return h, pairs, sign


def build_reference_spectrum(spec, params, check_convergence=True, conv_tol=1e-5):
    """Variational spectrum of one block, with an n_max+4 stability sweep."""
    h, pairs, sign = assemble_block(spec, params)
    vals, vecs = eigh(h)
    converged = np.zeros(len(vals), dtype=bool)
    if check_convergence and len(vals):
        spec_big = HOBasisSpec(spec.omega, spec.n_max + 4, spec.irrep)
        h2, _, _ = assemble_block(spec_big, params)
        vals2 = eigh(h2, eigvals_only=True)
        k = len(vals)
        converged = np.abs(vals - vals2[:k]) < conv_tol
    return ReferenceSpectrum(
        irrep=spec.irrep,
        eigenvalues=vals,
        coefficients=vecs,
        basis=pairs,
        sign=sign,
        n_max=spec.n_max,
        omega=spec.omega,
        converged=converged,
    )


def _hermite_functions(n_max, omega, xs, hbar=1.0):
    """Normalized HO eigenfunctions h_n(x), rows n = 0..n_max."""
    w = omega / hbar
    out = np.zeros((n_max + 1, len(xs)))
    out[0] = (w / np.pi) ** 0.25 * np.exp(-0.5 * w * xs * xs)
    if n_max >= 1:
        out[1] = np.sqrt(2.0 * w) * xs * out[0]
    for n in range(1, n_max):
        out[n + 1] = (
            np.sqrt(2.0 * w / (n + 1)) * xs * out[n]
            - np.sqrt(n / (n + 1.0)) * out[n - 1]
        )
    return out


def project_to_grid(spectrum, state_index, grid, params, min_mass=0.9999):
    """Grid representation of one reference eigenstate.

    Raises CoverageError when the grid captures less than ``min_mass`` of
    the state's probability.
    """
    from .errors import CoverageError

    coeff = spectrum.coefficients[:, state_index]
    m = spectrum.n_max
    c_mat = np.zeros((m + 1, m + 1))
    if spectrum.sign == 0:
        for (a, b), c in zip(spectrum.basis, coeff):
            c_mat[a, b] = c
    else:
        for (a, b), c in zip(spectrum.basis, coeff):
            w = c / np.sqrt(2.0 * (1.0 + (a == b)))
            c_mat[a, b] += w
            c_mat[b, a] += spectrum.sign * w
    hx = _hermite_functions(m, spectrum.omega, grid.x, params.hbar)
    hy = _hermite_functions(m, spectrum.omega, grid.y, params.hbar)
    vals = hx.T @ c_mat @ hy
    wf = WaveFunction(grid, vals.astype(np.complex128))
    mass = wf.norm() ** 2
    if mass < min_mass:
        raise CoverageError(f"grid holds only {mass:.6f} of the state")
    return wf.normalize()


def staircase_count(spectrum, energy):
    """Exact counting staircase N(E) of one block."""
    return int(np.searchsorted(spectrum.eigenvalues, energy, side="right"))
