"""Selective Gram-Schmidt basis construction and diagonalization.

From an overcomplete pool of scar functions with quantized energies in an
enlarged window, the selection keeps the N_b most useful ones: the first
pick minimizes the semiclassical selection parameter eta (low dispersion,
short simple orbit, window-centered); every later pick maximizes the
squared residual norm after deflation against the already-chosen states,
divided by eta.  The running residuals double as an orthonormal auxiliary
basis, so the Hamiltonian assembled in it is an ordinary symmetric
eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .errors import InsufficientCandidatesError, RankDeficiencyError
from .quantization import density_of_states, weyl_count, weyl_coefficients
from .wavefunctions import WaveFunction, apply_hamiltonian

__all__ = [
    "SelectionWindow",
    "Candidate",
    "BasisSelection",
    "SpectrumResult",
    "selection_parameter",
    "make_candidates",
    "basis_size",
    "sgsm_select",
    "assemble_hamiltonian",
    "diagonalize",
    "export_selection_ledger",
    "export_spectrum_csv",
]


@dataclass(frozen=True)
class SelectionWindow:
    """Energy window with its border bookkeeping."""

    e_minus: float
    e_plus: float
    sigma_bar: float
    c_b: float = 2.0
    irrep: str = "A1"

    def __post_init__(self):
        if not self.e_minus < self.e_plus:
            raise ValueError("window requires e_minus < e_plus")
        if self.c_b < 0 or self.sigma_bar < 0:
            raise ValueError("sigma_bar and c_b must be non-negative")

    @property
    def enlarged(self):
        return (self.e_minus - 2.0 * self.sigma_bar, self.e_plus + 2.0 * self.sigma_bar)

    @property
    def midpoint(self):
        return 0.5 * (self.e_minus + self.e_plus)


@dataclass
class Candidate:
    """A scar function scored for selection."""

    scar: object  # ScarFunction
    eta: float
    delta_e: float
    rho_j: float
    t_j: float
    n_s: int
    n_t: int


def _window_distance(e, window):
    """delta E of the piecewise window rule; edges count as interior."""
    if e < window.e_minus:
        return window.e_minus - e
    if e > window.e_plus:
        return e - window.e_plus
    return 0.0


def selection_parameter(energy, sigma, window, rho_j, t_j, n_s, n_t):
    """eta = rho * sqrt(sigma^2 + deltaE^2) * T * N_s * N_t."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    de = _window_distance(energy, window)
    return rho_j * np.hypot(sigma, de) * t_j * n_s * n_t, de


def make_candidates(scars, orbit_map, window, params, coefficients=None):
    """Score a pool of scar functions for SGSM selection."""
    from .quantization import IRREPS

    coeffs = coefficients or weyl_coefficients(params)
    out = []
    for sc in scars:
        po = orbit_map[sc.orbit_id]
        e = sc.bs_energy
        rho = float(density_of_states(e, IRREPS[str(sc.irrep)], params, coeffs))
        t_j = 0.75 * po.action * e**-0.25  # period at the level energy
        eta, de = selection_parameter(e, sc.sigma, window, rho, t_j, po.n_s, po.n_t)
        out.append(
            Candidate(scar=sc, eta=float(eta), delta_e=float(de), rho_j=rho, t_j=t_j, n_s=po.n_s, n_t=po.n_t)
        )
    return out


def basis_size(window, params, coefficients=None):
    """N_b from the smooth count over the enlarged window plus the border term."""
    from .quantization import IRREPS

    coeffs = coefficients or weyl_coefficients(params)
    irrep = IRREPS[window.irrep]
    lo, hi = window.enlarged
    n_hi = float(weyl_count(max(hi, 0.0), irrep, params, coeffs))
    n_lo = float(weyl_count(max(lo, 0.0), irrep, params, coeffs))
    rho_mid = float(density_of_states(window.midpoint, irrep, params, coeffs))
    raw = n_hi - n_lo + window.c_b * window.sigma_bar * rho_mid
    return int(np.ceil(raw))


@dataclass
class BasisSelection:
    """SGSM output: pick order, auxiliary basis, selection diagnostics."""

    selected: list  # candidate indices in pick order
    aux: np.ndarray  # (N_b, npoints) orthonormal rows (grid weight folded in)
    residual_norms: np.ndarray
    etas: np.ndarray
    grid: object
    candidates: list = field(repr=False)

    def auxiliary_wavefunction(self, i):
        vals = self.aux[i].reshape(self.grid.nx, self.grid.ny) / np.sqrt(self.grid.cell_area)
        return WaveFunction(self.grid, vals.astype(np.complex128))


def sgsm_select(candidates, window, params, n_b=None, min_residual=1e-8):
    """Greedy selective Gram-Schmidt over a candidate pool.

    Ties in the scoring break toward the smaller candidate index, making
    the selection deterministic for identical inputs.
    """
    if n_b is None:
        n_b = basis_size(window, params)
    n_pool = len(candidates)
    if n_pool < n_b:
        raise InsufficientCandidatesError(
            f"pool of {n_pool} scar functions cannot fill N_b = {n_b}; "
            "include more (longer) orbits"
        )
    grid = candidates[0].scar.wavefunction.grid
    w = np.sqrt(grid.cell_area)
    # real scar functions; rows are unit vectors in the quadrature metric
    vecs = np.stack(
        [np.real(c.scar.wavefunction.values).ravel() * w for c in candidates]
    )
    etas = np.array([c.eta for c in candidates])

    selected = []
    res_norms = []
    aux = np.zeros((n_b, vecs.shape[1]))
    alive = np.ones(n_pool, dtype=bool)
    residual = vecs.copy()
    norm2 = np.einsum("ij,ij->i", residual, residual)

    first = int(np.argmin(etas))  # argmin returns the first minimum
    order_score = None
    for step in range(n_b):
        if step == 0:
            pick = first
        else:
            score = np.where(alive & (norm2 > min_residual**2), norm2 / etas, -np.inf)
            pick = int(np.argmax(score))
            if not np.isfinite(score[pick]):
                raise RankDeficiencyError(
                    f"all remaining residual norms below {min_residual} at step {step}"
                )
        r = residual[pick]
        # second orthogonalization pass tightens the Gram identity
        if step:
            r = r - aux[:step].T @ (aux[:step] @ r)
        rn = np.linalg.norm(r)
        if rn < min_residual:
            raise RankDeficiencyError(
                f"chosen candidate {pick} is numerically dependent (|r| = {rn:.2e})"
            )
        aux[step] = r / rn
        selected.append(pick)
        res_norms.append(np.sqrt(max(norm2[pick], 0.0)) if step else 1.0)
        alive[pick] = False
        # deflate the survivors against the new auxiliary function
        proj = residual @ aux[step]
        residual -= np.outer(proj, aux[step])
        norm2 -= proj**2
        np.maximum(norm2, 0.0, out=norm2)

    return BasisSelection(
        selected=selected,
        aux=aux,
        residual_norms=np.array(res_norms),
        etas=etas[np.array(selected)],
        grid=grid,
        candidates=list(candidates),
    )


def assemble_hamiltonian(selection, params, asym_tol=1e-9):
    """Symmetric Hamiltonian matrix in the auxiliary basis."""
    n_b = selection.aux.shape[0]
    grid = selection.grid
    h_rows = np.empty_like(selection.aux)
    for i in range(n_b):
        wf = selection.auxiliary_wavefunction(i)
        h_rows[i] = np.real(apply_hamiltonian(wf, params).values).ravel() * np.sqrt(
            grid.cell_area
        )
    h = selection.aux @ h_rows.T
    asym = np.max(np.abs(h - h.T))
    scale = max(np.max(np.abs(h)), 1.0)
    if asym > asym_tol * scale:
        raise FloatingPointError(
            f"Hamiltonian asymmetry {asym:.2e} exceeds {asym_tol:.0e} * scale"
        )
    return 0.5 * (h + h.T)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns in the auxiliary basis
    sigma_n: np.ndarray
    converged_window: np.ndarray
    irrep: str
    window: SelectionWindow
    selection: BasisSelection = field(repr=False, default=None)

    def state_wavefunction(self, k):
        grid = self.selection.grid
        flat = self.selection.aux.T @ self.eigenvectors[:, k]
        vals = flat.reshape(grid.nx, grid.ny) / np.sqrt(grid.cell_area)
        return WaveFunction(grid, vals.astype(np.complex128))


def diagonalize(h, selection, window, params):
    """Eigenpairs in the auxiliary basis plus per-state grid dispersions."""
    vals, vecs = eigh(h)
    sigma = np.empty(len(vals))
    grid = selection.grid
    w = np.sqrt(grid.cell_area)
    # H on the auxiliary rows once, reused for every eigenstate
    h_rows = np.empty_like(selection.aux)
    for i in range(selection.aux.shape[0]):
        wf = selection.auxiliary_wavefunction(i)
        h_rows[i] = np.real(apply_hamiltonian(wf, params).values).ravel() * w
    for k in range(len(vals)):
        state = selection.aux.T @ vecs[:, k]
        h_state = h_rows.T @ vecs[:, k]
        sigma[k] = np.linalg.norm(h_state - vals[k] * state)
    converged = (vals > window.e_minus) & (vals < window.e_plus)
    return SpectrumResult(
        eigenvalues=vals,
        eigenvectors=vecs,
        sigma_n=sigma,
        converged_window=converged,
        irrep=window.irrep,
        window=window,
        selection=selection,
    )


# ----------------------------------------------------------------------
# exports


def export_selection_ledger(selection, filepath):
    """CSV replay record: step, orbit, excitation, eta, residual norm."""
    with open(filepath, "w") as fh:
        fh.write("step,po,n,eta,residual_norm\n")
        for step, idx in enumerate(selection.selected):
            c = selection.candidates[idx]
            fh.write(
                f"{step},{c.scar.orbit_id},{c.scar.n},"
                f"{c.eta:.17g},{selection.residual_norms[step]:.17g}\n"
            )


def export_spectrum_csv(result, filepath):
    with open(filepath, "w") as fh:
        fh.write("index,energy,sigma_n,converged_window\n")
        for k, (e, s, c) in enumerate(
            zip(result.eigenvalues, result.sigma_n, result.converged_window)
        ):
            fh.write(f"{k},{e:.17g},{s:.17g},{int(c)}\n")
