"""Desymmetrized Bohr-Sommerfeld quantization and smooth state counting.

Eigenstates of the quartic oscillator fall into the five symmetry classes
of C_4v: four one-dimensional (A1, A2, B1, B2, fundamental domain = 1/8 of
the plane between a semiaxis and a semidiagonal) and one two-dimensional
(E, handled as separate degenerate components E1/E2 on the quarter plane).
Folding an orbit into the fundamental domain shortens its period by an
integer factor p and turns symmetry into Dirichlet/Neumann reflection
counts, which shift the quantization phase.  With the homogeneous quartic
scaling the allowed energies obey

    E_n^(3/4) = (2 pi hbar / (S/p)) * [n + (mu/p)/4 + N_D/2],

with S, mu the full-orbit action and winding at E = 1.

The smooth counting function N_sc(E) combines the bulk Weyl term (phase
space volume over (2 pi hbar)^2, a pure c * E^(3/2) power by homogeneity)
with the symmetry-line boundary terms (+ for Neumann, - for Dirichlet,
each a quarter of the corresponding straight-orbit action).  The boundary
terms are subleading E^(3/4) but dominate the per-class split at low
energy; the E components carry none (their two arms always cancel).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import EnumerationError

__all__ = [
    "IRREPS",
    "IrreducibleRep",
    "DesymRecord",
    "BSLevel",
    "load_desym_tables",
    "builtin_desym_table_path",
    "bs_energy",
    "enumerate_levels",
    "weyl_count",
    "density_of_states",
    "weyl_coefficients",
]


@dataclass(frozen=True)
class IrreducibleRep:
    tag: str

    _VALID = ("A1", "A2", "B1", "B2", "E1", "E2")

    def __post_init__(self):
        if self.tag not in self._VALID:
            raise ValueError(f"unknown symmetry class {self.tag!r}")

    @property
    def dimensionality(self):
        return 2 if self.tag.startswith("E") else 1

    @property
    def is_1d(self):
        return self.dimensionality == 1

    def __str__(self):
        return self.tag


IRREPS = {tag: IrreducibleRep(tag) for tag in IrreducibleRep._VALID}


@dataclass(frozen=True)
class DesymRecord:
    """Folded-orbit data of one (orbit, symmetry class) combination."""

    orbit_id: int
    irrep: IrreducibleRep
    p: int
    n_dirichlet: int
    n_neumann: int
    applicable: bool = True

    @property
    def n_reflections(self):
        return self.n_dirichlet + self.n_neumann


@dataclass(frozen=True)
class BSLevel:
    orbit_id: int
    n: int
    irrep: IrreducibleRep
    energy: float
    desym: DesymRecord


def load_desym_tables(filepath=None):
    """Read `po irrep p N_D N_N` lines into a {(orbit_id, tag): record} map."""
    if filepath is None:
        filepath = builtin_desym_table_path()
    records = {}
    with open(filepath) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            po, tag, p, nd, nn = line.split()
            irrep = IRREPS[tag]
            if nd == "--":
                rec = DesymRecord(int(po), irrep, int(p), 0, 0, applicable=False)
            else:
                rec = DesymRecord(int(po), irrep, int(p), int(nd), int(nn))
            records[(int(po), tag)] = rec
    return records


def builtin_desym_table_path():
    from importlib.resources import files

    return str(files("scarbasis.data").joinpath("desym_tables.txt"))


def bs_energy(po, desym, n, hbar=1.0):
    """Quantized energy of excitation n on a desymmetrized orbit."""
    if not desym.applicable:
        raise EnumerationError(
            f"orbit {po.id} does not quantize in class {desym.irrep}"
        )
    if n < 0:
        raise ValueError("excitation number must be non-negative")
    s_d = po.action / desym.p
    rhs = (2.0 * np.pi * hbar / s_d) * (
        n + (po.mu / desym.p) / 4.0 + desym.n_dirichlet / 2.0
    )
    if rhs <= 0:
        raise EnumerationError(f"non-positive quantization phase for n={n}")
    return rhs ** (4.0 / 3.0)


def _ladders(orbits, desym_map, irrep):
    """Quantization ladders of one symmetry-class block.

    For the 1d classes each orbit contributes its table row.  For an E
    component the two quarter-plane foldings of an orbit are inequivalent
    whenever the tabulated E1/E2 rows differ, and both belong to each
    component block; coinciding rows describe a single folding.
    """
    tag = irrep.tag
    out = []
    for po in orbits:
        if irrep.is_1d:
            rec = desym_map.get((po.id, tag))
            if rec is not None and rec.applicable:
                out.append((po, rec))
            continue
        r1 = desym_map.get((po.id, "E1"))
        r2 = desym_map.get((po.id, "E2"))
        rows = []
        for rec in (r1, r2):
            if rec is None or not rec.applicable:
                continue
            key = (rec.p, rec.n_dirichlet, rec.n_neumann)
            if key not in [(r.p, r.n_dirichlet, r.n_neumann) for r in rows]:
                rows.append(rec)
        for rec in rows:
            out.append((po, DesymRecord(po.id, irrep, rec.p, rec.n_dirichlet, rec.n_neumann)))
    return out


def enumerate_levels(orbits, desym_map, irrep, e_lo, e_hi, hbar=1.0):
    """All BS levels of one symmetry class inside (e_lo, e_hi), sorted."""
    if e_lo >= e_hi:
        raise ValueError("window must satisfy e_lo < e_hi")
    levels = []
    for po, rec in _ladders(orbits, desym_map, irrep):
        n = 0
        while True:
            e = bs_energy(po, rec, n, hbar)
            if e >= e_hi:
                break
            if e > e_lo:
                levels.append(BSLevel(po.id, n, irrep, e, rec))
            n += 1
    levels.sort(key=lambda lv: (lv.energy, lv.orbit_id, lv.n))
    return levels


# ----------------------------------------------------------------------
# smooth counting function


def _bulk_integral(beta):
    """I_V = integral of (1 - V)_+ over the plane = (1/3) int dphi / sqrt(w)."""
    a = beta / 4.0
    b = (1.0 - beta) / 8.0

    def integrand(phi):
        s = np.sin(2.0 * phi)
        return (a + b * s * s) ** -0.5

    val, _ = quad(integrand, 0.0, np.pi / 4.0, limit=200)
    return (8.0 / 3.0) * val


def _quartic_line_action(a_coeff):
    """int_0^xt sqrt(2(1 - a x^4)) dx for the 1d potential a x^4 at E=1."""
    from scipy.special import gamma

    i4 = gamma(0.25) * gamma(1.5) / (4.0 * gamma(1.75))
    return np.sqrt(2.0) * i4 * a_coeff**-0.25


def weyl_coefficients(params):
    """Bulk and boundary coefficients of N_sc(E) = c E^{3/2} + d E^{3/4}.

    Returns a dict tag -> (c, d).  The boundary coefficient adds the
    Neumann (+) / Dirichlet (-) line terms along the axis and diagonal
    arms of the fundamental domain, each (line action)/(4 pi hbar).
    """
    hbar = params.hbar
    c_full = _bulk_integral(params.beta) / (2.0 * np.pi * hbar * hbar)
    i_axis = _quartic_line_action(params.beta / 4.0)
    i_diag = _quartic_line_action((1.0 + params.beta) / 8.0)
    axis = i_axis / (4.0 * np.pi * hbar)
    diag = i_diag / (4.0 * np.pi * hbar)
    c8 = c_full / 8.0
    return {
        "A1": (c8, axis + diag),
        "A2": (c8, -axis - diag),
        "B1": (c8, axis - diag),
        "B2": (c8, -axis + diag),
        "E1": (2.0 * c8, 0.0),
        "E2": (2.0 * c8, 0.0),
    }


def weyl_count(e, irrep, params, coefficients=None):
    """Smooth number of states of one symmetry class below energy e."""
    if np.any(np.asarray(e) < 0):
        raise ValueError("energy must be non-negative")
    c, d = (coefficients or weyl_coefficients(params))[irrep.tag]
    e = np.asarray(e, dtype=float)
    return np.maximum(c * e**1.5 + d * e**0.75, 0.0)


def density_of_states(e, irrep, params, coefficients=None):
    """dN_sc/dE of one symmetry class."""
    c, d = (coefficients or weyl_coefficients(params))[irrep.tag]
    e = np.asarray(e, dtype=float)
    return 1.5 * c * e**0.5 + 0.75 * d * e**-0.25
