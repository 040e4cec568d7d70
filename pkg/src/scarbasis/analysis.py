"""Post-diagonalization analysis of eigenstates in the scar basis.

The local representation greedily re-expands an eigenstate in the selected
scar functions: pick the scar with the largest squared overlap, deflate
the rest against it, repeat.  The recorded intensities x_1 >= x_2 >= ...
quantify how much each orbit contributes; their running sum is the
projection onto the span of the picked scars.  Participation ratios,
their semiclassical mean, Weibull statistics of the fluctuations, and the
dispersion-based error bounds complete the toolbox.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import FitError, SingularityError

__all__ = [
    "LocalRepresentation",
    "local_representation",
    "scar_intensity_average",
    "participation_ratio",
    "mean_pr_estimate",
    "semiclassical_pr",
    "weibull_fit",
    "weibull_cdf",
    "weibull_pdf",
    "error_bounds",
    "mobile_mean",
    "export_reconstruction_csv",
]

# averaged extreme-value offsets of the two largest Gaussian intensities
Z_BAR = (0.577, 13.0 / 48.0)


@dataclass
class LocalRepresentation:
    """Greedy scar expansion of one eigenstate."""

    state_index: int
    entries: list  # (orbit_id, n, intensity, cumulative)
    coefficients: np.ndarray  # C_Nj onto the orthonormalized local basis

    @property
    def intensities(self):
        return np.array([e[2] for e in self.entries])

    @property
    def cumulative(self):
        return np.array([e[3] for e in self.entries])


def local_representation(state_vec, scar_vecs, labels, state_index=0, stop_residual=1e-8, max_terms=None):
    """Greedy local expansion of ``state_vec`` over ``scar_vecs`` rows.

    All vectors must carry the same quadrature weight (plain dot products
    are used).  Deflation mirrors the SGSM: the picked scar is normalized
    into a local basis function, the remaining scars lose their component
    along it, and the recorded intensity of pick n is the squared overlap
    of the (unnormalized) deflated scar with the state.
    """
    state = np.asarray(state_vec, dtype=float)
    pool = np.array(scar_vecs, dtype=float, copy=True)
    n_pool = len(pool)
    if max_terms is None:
        max_terms = n_pool
    alive = np.ones(n_pool, dtype=bool)
    entries = []
    coeffs = []
    basis = []
    cum = 0.0
    for _ in range(min(max_terms, n_pool)):
        ov = pool @ state
        ov[~alive] = 0.0
        pick = int(np.argmax(np.abs(ov) ** 2))
        x = float(ov[pick] ** 2)
        r = pool[pick].copy()
        for b in basis:
            r -= (r @ b) * b
        rn = np.linalg.norm(r)
        if rn < stop_residual:
            break
        b = r / rn
        c = float(b @ state)
        cum += c * c
        basis.append(b)
        coeffs.append(c)
        entries.append((labels[pick][0], labels[pick][1], x, cum))
        alive[pick] = False
        proj = pool @ b
        pool -= np.outer(proj, b)
        pool[~alive] = 0.0
        if 1.0 - cum < stop_residual**2:
            break
    return LocalRepresentation(
        state_index=state_index,
        entries=entries,
        coefficients=np.array(coeffs),
    )


def analyze_spectrum(result, window_only=True, stop_residual=1e-8):
    """Local representations of (window) eigenstates of a SpectrumResult."""
    sel = result.selection
    scar_vecs = np.stack(
        [np.real(sel.candidates[i].scar.wavefunction.values).ravel() for i in sel.selected]
    ) * np.sqrt(sel.grid.cell_area)
    labels = [
        (sel.candidates[i].scar.orbit_id, sel.candidates[i].scar.n)
        for i in sel.selected
    ]
    reps = []
    for k in range(len(result.eigenvalues)):
        if window_only and not result.converged_window[k]:
            continue
        state = sel.aux.T @ result.eigenvectors[:, k]
        reps.append(
            local_representation(state, scar_vecs, labels, state_index=k, stop_residual=stop_residual)
        )
    return reps


def scar_intensity_average(j, sigma_bar_r, c_j=0.0):
    """Semiclassical mean of the j-th largest scar intensity (j = 1 or 2).

    Valid while the logarithms stay in range; the low-energy singularity
    of the closed form raises a SingularityError.
    """
    if j not in (1, 2):
        raise ValueError("only the two largest intensities are parameterized")
    if sigma_bar_r <= 0:
        raise SingularityError("sigma_bar_r must be positive")
    arg = np.sqrt(2.0) * sigma_bar_r / j + c_j
    if arg <= 0:
        raise SingularityError("log argument vanished (low-energy breakdown)")
    alpha = Z_BAR[j - 1] + np.log(arg)
    if alpha + 9.0 / 8.0 <= 0 or alpha + 287.0 / 128.0 <= 0:
        raise SingularityError("intensity average evaluated in its singular regime")
    b = np.log(alpha + 287.0 / 128.0) / (alpha + 17.0 / 8.0)
    val = (alpha - np.log(alpha + 9.0 / 8.0) + b + 0.5 * b * b)
    return float(np.sqrt(2.0 / np.pi) / sigma_bar_r * val)


def participation_ratio(coefficients):
    """R = (sum C^2)/(sum C^4) with the coefficients normalized to sum C^2 = 1."""
    c = np.asarray(coefficients, dtype=float)
    s2 = np.sum(c * c)
    if s2 == 0:
        raise ValueError("zero coefficient vector")
    c = c / np.sqrt(s2)
    return float(1.0 / np.sum(c**4))


def mean_pr_estimate(sigma_bar_r, irrep):
    """Mean participation ratio zeta * sigma_bar_r (zeta = 8/3 or 2)."""
    tag = getattr(irrep, "tag", irrep)
    zeta = 2.0 if tag.startswith("E") else 8.0 / 3.0
    return zeta * sigma_bar_r


def semiclassical_pr(a_tr, hbar=1.0):
    """Random-wave participation ratio on a section of area a_tr."""
    return a_tr / (4.0 * np.pi * hbar)


def weibull_pdf(x, k, lam):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x >= 0
    xr = x[pos] / lam
    out[pos] = (k / lam) * xr ** (k - 1) * np.exp(-(xr**k))
    return out


def weibull_cdf(x, k, lam):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 1.0 - np.exp(-((np.maximum(x, 0) / lam) ** k)), 0.0)


def weibull_fit(samples, k_bracket=(0.05, 40.0)):
    """Maximum-likelihood Weibull fit; returns (k, lam).

    Solves the profiled shape equation by bracketing; degenerate samples
    (all equal, or non-positive) raise a FitError.
    """
    x = np.asarray(samples, dtype=float)
    x = x[x > 0]
    if len(x) < 20:
        raise FitError("need at least 20 positive samples")
    if np.ptp(x) == 0:
        raise FitError("degenerate samples")
    logx = np.log(x)
    mean_log = np.mean(logx)

    def shape_eq(k):
        xk = x**k
        return np.sum(xk * logx) / np.sum(xk) - 1.0 / k - mean_log

    lo, hi = k_bracket
    flo, fhi = shape_eq(lo), shape_eq(hi)
    if flo * fhi > 0:
        raise FitError("shape equation has no root in the bracket")
    k = brentq(shape_eq, lo, hi, xtol=1e-12)
    lam = np.mean(x**k) ** (1.0 / k)
    return float(k), float(lam)


def error_bounds(sigma_r):
    """Dispersion-based error envelopes (energy, overlap deficit).

    Returns (dE_bound, overlap_deficit_bound, valid); the power law only
    holds below sigma_r = 0.3.
    """
    if sigma_r < 0:
        raise ValueError("sigma_r must be non-negative")
    b = sigma_r**2.5
    return b / 4.0, b / 100.0, bool(sigma_r < 0.3)


def mobile_mean(series, window=20):
    """Centered moving average with a symmetrically shrinking edge window."""
    if window < 1:
        raise ValueError("window must be at least 1")
    x = np.asarray(series, dtype=float)
    n = len(x)
    half = window // 2
    out = np.empty(n)
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out[i] = np.mean(x[i - h : i + h + 1])
    return out


def export_reconstruction_csv(reps, energies, filepath):
    """Reconstruction table: N, R, then (PO, n, cumulative%) triples."""
    with open(filepath, "w") as fh:
        fh.write("N,E,R,entries(po:n:cum%)\n")
        for rep in reps:
            r = participation_ratio(rep.coefficients)
            ent = ";".join(
                f"{po}:{n}:{100 * cum:.1f}" for po, n, _x, cum in rep.entries
            )
            fh.write(
                f"{rep.state_index},{energies[rep.state_index]:.17g},{r:.17g},{ent}\n"
            )
