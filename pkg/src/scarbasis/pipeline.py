"""End-to-end orchestration of the scar-basis solver.

Stages: load/refine orbits -> enumerate quantized levels in the enlarged
window -> build tube and scar functions on a shared grid -> score and
select with the SGSM -> assemble and diagonalize -> attach dispersions.
The CLI and the acceptance suite both drive these functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import basis_builder as bb
from . import classical as cl
from . import quantization as qz
from . import wavefunctions as wfm

__all__ = [
    "prepare_orbits",
    "window_sigma_bar",
    "WindowRun",
    "run_window",
]


def prepare_orbits(table_path=None, ids=None, params=None, tol=1e-9):
    """Load the orbit table and regenerate full paths by Newton refinement."""
    params = params or cl.HamiltonianParams()
    table_path = table_path or cl.builtin_orbit_table_path()
    raw = cl.load_orbit_table(table_path)
    out = {}
    for po in raw:
        if ids is not None and po.id not in ids:
            continue
        refined = cl.refine_periodic_orbit(
            po.initial_state,
            po.period,
            params,
            tol=tol,
            orbit_id=po.id,
            n_s=po.n_s,
            n_t=po.n_t,
        )
        out[po.id] = refined
    return out


def window_sigma_bar(e_plus, irrep, params):
    """Window-level dispersion: Eq.-(14) form at the window top with the
    mean Lyapunov exponent."""
    lam_bar = wfm.LYAPUNOV_COEFF * e_plus**0.25
    t_e = wfm.ehrenfest_time(e_plus, irrep, params.hbar)
    return float(wfm.semiclassical_dispersion(lam_bar, t_e, params.hbar))


@dataclass
class WindowRun:
    """Everything produced by one windowed solve."""

    window: bb.SelectionWindow
    levels: list
    scars: list
    candidates: list
    selection: bb.BasisSelection
    hamiltonian: np.ndarray
    result: bb.SpectrumResult
    grid: wfm.Grid2D
    orbits: dict = field(repr=False, default=None)


def run_window(
    orbits,
    irrep,
    e_minus,
    e_plus,
    params=None,
    c_b=2.0,
    sigma_bar=None,
    desym_path=None,
    grid=None,
    config=None,
    n_b=None,
    steps_per_period=None,
    verbose=False,
):
    """Solve one symmetry class in (e_minus, e_plus) from a pool of orbits.

    ``orbits`` is a {id: PeriodicOrbit} map with refined paths (see
    :func:`prepare_orbits`).  ``sigma_bar`` defaults to the window-top
    value; ``n_b`` defaults to the smooth-count estimate.
    """
    params = params or cl.HamiltonianParams()
    tag = getattr(irrep, "tag", irrep)
    irrep_obj = qz.IRREPS[tag]
    if sigma_bar is None:
        sigma_bar = window_sigma_bar(e_plus, irrep_obj, params)
    window = bb.SelectionWindow(e_minus, e_plus, sigma_bar, c_b, tag)

    desym = qz.load_desym_tables(desym_path)
    lo, hi = window.enlarged
    levels = qz.enumerate_levels(
        list(orbits.values()), desym, irrep_obj, max(lo, 1e-9), hi, params.hbar
    )
    if verbose:
        print(f"[{tag}] {len(levels)} quantized levels in ({max(lo,0):.3f}, {hi:.3f})")
    if grid is None:
        grid = wfm.Grid2D.for_energy(hi, params)
    scars = wfm.build_scars(
        levels, orbits, grid, params, config, steps_per_period, verbose=False
    )
    candidates = bb.make_candidates(scars, orbits, window, params)
    if n_b is None:
        n_b = bb.basis_size(window, params)
    if verbose:
        print(f"[{tag}] grid {grid.nx}^2, pool {len(candidates)}, N_b = {n_b}")
    selection = bb.sgsm_select(candidates, window, params, n_b=n_b)
    h = bb.assemble_hamiltonian(selection, params)
    result = bb.diagonalize(h, selection, window, params)
    if verbose:
        inside = int(np.sum(result.converged_window))
        print(f"[{tag}] {inside} states inside the window")
    return WindowRun(
        window=window,
        levels=levels,
        scars=scars,
        candidates=candidates,
        selection=selection,
        hamiltonian=h,
        result=result,
        grid=grid,
        orbits=orbits,
    )
