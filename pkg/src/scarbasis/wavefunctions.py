"""Grid-based quantum states: frozen Gaussians, tube and scar functions.

Wavefunctions live on a uniform cell-centered square grid (no sample sits
exactly on a symmetry line, so the eight C_4v operations act as exact index
permutations).  Kinetic operators and time evolution use the Fourier
representation; propagation is Strang-split spectral stepping, which is
unitary by construction.

A tube function is the one-period time average of a frozen Gaussian riding
a periodic orbit with the accumulated phase S_t/hbar - (pi/2) mu_t; at a
quantized energy the phase closes and the average localizes on the orbit.
A scar function refines a tube by a cosine-windowed energy filter over one
Ehrenfest time of propagation, which sharpens its energy dispersion.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .classical import flow_field, potential, scale_orbit
from .errors import (
    CoverageError,
    GridMismatchError,
    LeakageError,
    NullProjectionError,
)

__all__ = [
    "Grid2D",
    "WaveFunction",
    "ScarFunction",
    "PropagatorConfig",
    "inner_product",
    "apply_hamiltonian",
    "h_element",
    "energy_dispersion",
    "frozen_gaussian",
    "phase_along_orbit",
    "tube_function",
    "project_irrep",
    "propagate",
    "ehrenfest_time",
    "semiclassical_dispersion",
    "scar_function",
    "build_scars",
    "sample_along_orbit",
    "count_sign_changes",
    "save_wavefunction",
    "load_wavefunction",
    "export_density_csv",
]

_FFT_WORKERS = 2

# transverse section area and mean Lyapunov exponent of the desymmetrized
# system at reference energy (A_tr scales as E^(3/4), lambda-bar as E^(1/4))
A_TR_COEFF_1D = 5.5278
A_TR_COEFF_E = 11.0555
LYAPUNOV_COEFF = 0.3848


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centered grid; point i sits at (i - n/2 + 1/2) * d."""

    nx: int
    ny: int
    x_extent: float
    y_extent: float

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if n < 4 or (n & (n - 1)) != 0:
                raise ValueError("grid sizes must be powers of two")
        if self.x_extent <= 0 or self.y_extent <= 0:
            raise ValueError("extents must be positive")

    @property
    def dx(self):
        return 2.0 * self.x_extent / self.nx

    @property
    def dy(self):
        return 2.0 * self.y_extent / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def x(self):
        return (np.arange(self.nx) - self.nx / 2 + 0.5) * self.dx

    @property
    def y(self):
        return (np.arange(self.ny) - self.ny / 2 + 0.5) * self.dy

    @property
    def kx(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)

    @property
    def ky(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)

    @property
    def square_symmetric(self):
        return self.nx == self.ny and abs(self.x_extent - self.y_extent) < 1e-15

    @classmethod
    def for_energy(cls, energy, params, margin=1.4, points_per_wave=6.0, min_side=64, max_side=4096):
        """Grid sized for states up to ``energy``.

        Half-extent covers the axis turning point (4E/beta)^(1/4) with the
        given margin; the spacing resolves the de Broglie wavelength of
        p_max = sqrt(2 * 1.2 E) with ``points_per_wave`` points.
        """
        if energy <= 0:
            raise ValueError("energy must be positive")
        half = margin * (4.0 * energy / params.beta) ** 0.25
        p_max = np.sqrt(2.0 * energy * 1.2)
        dx_max = (2.0 * np.pi * params.hbar / p_max) / points_per_wave
        n = min_side
        while 2.0 * half / n > dx_max:
            n *= 2
            if n > max_side:
                raise CoverageError(
                    f"grid would need more than {max_side} points per side"
                )
        return cls(n, n, half, half)


@dataclass
class WaveFunction:
    """Complex field on a grid with quadrature inner products."""

    grid: Grid2D
    values: np.ndarray  # shape (nx, ny), index [i, j] = psi(x_i, y_j)
    _norm: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("values shape does not match grid")

    def norm(self):
        if self._norm is None:
            self._norm = float(
                np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)
            )
        return self._norm

    def normalize(self):
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero function")
        return WaveFunction(self.grid, self.values / n, _norm=1.0)

    def copy(self):
        return WaveFunction(self.grid, self.values.copy(), _norm=self._norm)


@dataclass
class ScarFunction:
    """Scar wavefunction plus its construction provenance."""

    wavefunction: WaveFunction
    orbit_id: int
    n: int
    irrep: object
    bs_energy: float
    sigma: float
    ehrenfest_time: float


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("wavefunctions live on different grids")


def inner_product(a, b):
    """<a|b> by grid quadrature."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.cell_area)


def _potential_array(grid, params):
    x = grid.x[:, None]
    y = grid.y[None, :]
    return potential(x, y, params)


def _kinetic_array(grid, params):
    kx = grid.kx[:, None]
    ky = grid.ky[None, :]
    return 0.5 * params.hbar**2 * (kx**2 + ky**2)


def apply_hamiltonian(wf, params):
    """H psi with spectral kinetic term."""
    tk = _kinetic_array(wf.grid, params)
    vt = _potential_array(wf.grid, params)
    out = sfft.ifft2(tk * sfft.fft2(wf.values, workers=_FFT_WORKERS), workers=_FFT_WORKERS)
    out += vt * wf.values
    return WaveFunction(wf.grid, out)


def h_element(a, b, params):
    """<a|H|b> on the grid."""
    _check_same_grid(a, b)
    return inner_product(a, apply_hamiltonian(b, params))


def energy_dispersion(wf, e_ref, params):
    """sqrt(<(H - e_ref)^2>) of a normalized state, in energy units."""
    hw = apply_hamiltonian(wf, params)
    resid = hw.values - e_ref * wf.values
    return float(np.sqrt(np.sum(np.abs(resid) ** 2) * wf.grid.cell_area)) / wf.norm()


# ----------------------------------------------------------------------
# frozen Gaussians and tube functions


def frozen_gaussian(grid, center, gamma=0.0, params=None, alpha_x=1.0, alpha_y=1.0, normalized=True):
    """Gaussian of fixed widths at a phase-space point with phase e^{i gamma}.

    ``center`` is a phase-space state [x, y, px, py].  The packet must sit
    well inside the grid (5 width units of clearance), otherwise a
    CoverageError is raised.
    """
    hbar = params.hbar if params is not None else 1.0
    x0, y0, px0, py0 = np.asarray(center, dtype=float)
    wx = 1.0 / np.sqrt(2.0 * alpha_x)
    wy = 1.0 / np.sqrt(2.0 * alpha_y)
    if (
        abs(x0) > grid.x_extent - 2.5 * wx
        or abs(y0) > grid.y_extent - 2.5 * wy
    ):
        raise CoverageError("Gaussian center too close to the grid boundary")
    gx = grid.x - x0
    gy = grid.y - y0
    fx = np.exp(-alpha_x * gx**2 + 1j * (px0 / hbar) * gx)
    fy = np.exp(-alpha_y * gy**2 + 1j * (py0 / hbar) * gy)
    vals = np.exp(1j * gamma) * np.outer(fx, fy)
    wf = WaveFunction(grid, vals)
    return wf.normalize() if normalized else wf


def phase_along_orbit(po, hbar=1.0):
    """gamma_t = S_t/hbar - (pi/2) mu_t on the orbit's own time mesh."""
    if po.path is None or po.path.windings is None:
        raise ValueError("orbit carries no sampled path/winding data")
    return po.path.actions / hbar - 0.5 * np.pi * po.path.windings


# --- C4v operations as index permutations (square symmetric grids) ---
#
# arrays are indexed [i, j] = psi(x_i, y_j); the group element g acts as
# (g psi)(r) = psi(g^{-1} r)

_OPS = {
    "e": lambda a: a,
    "c2": lambda a: a[::-1, ::-1],
    "c4": lambda a: a.T[::-1, :],  # rotation by +90 degrees
    "c4i": lambda a: a.T[:, ::-1],  # rotation by -90 degrees
    "sx": lambda a: a[:, ::-1],  # reflection about the x axis (y -> -y)
    "sy": lambda a: a[::-1, :],  # reflection about the y axis (x -> -x)
    "sd": lambda a: a.T,  # reflection about the diagonal x = y
    "sa": lambda a: a[::-1, ::-1].T,  # reflection about x = -y
}

_CHARACTERS = {
    "A1": {"e": 1, "c4": 1, "c4i": 1, "c2": 1, "sx": 1, "sy": 1, "sd": 1, "sa": 1},
    "A2": {"e": 1, "c4": 1, "c4i": 1, "c2": 1, "sx": -1, "sy": -1, "sd": -1, "sa": -1},
    "B1": {"e": 1, "c4": -1, "c4i": -1, "c2": 1, "sx": 1, "sy": 1, "sd": -1, "sa": -1},
    "B2": {"e": 1, "c4": -1, "c4i": -1, "c2": 1, "sx": -1, "sy": -1, "sd": 1, "sa": 1},
}


def _project_values(values, tag):
    if tag in _CHARACTERS:
        chars = _CHARACTERS[tag]
        acc = np.zeros_like(values)
        for op, sign in chars.items():
            acc += sign * _OPS[op](values)
        return acc / 8.0
    if tag == "E1":  # symmetric about the x axis, antisymmetric about y
        sym = 0.5 * (values + _OPS["sx"](values))
        return 0.5 * (sym - _OPS["sy"](sym))
    if tag == "E2":
        sym = 0.5 * (values + _OPS["sy"](values))
        return 0.5 * (sym - _OPS["sx"](sym))
    raise ValueError(f"unknown symmetry class {tag!r}")


def project_irrep(wf, irrep, normalized=False, null_tol=1e-8):
    """Project onto one C_4v symmetry class.

    Raises NullProjectionError when the projection annihilates the state
    (wrong orbit/class pairing).
    """
    if not wf.grid.square_symmetric:
        raise GridMismatchError("symmetry projection needs a square grid")
    tag = getattr(irrep, "tag", irrep)
    out = WaveFunction(wf.grid, _project_values(wf.values, tag))
    pre = wf.norm()
    post = out.norm()
    if post < null_tol * max(pre, 1e-300):
        raise NullProjectionError(
            f"projection onto {tag} annihilates the state "
            f"(norm ratio {post / max(pre, 1e-300):.2e})"
        )
    return out.normalize() if normalized else out


def tube_function(po, level, grid, params, steps_per_period=None):
    """One-period time average of frozen Gaussians along the orbit.

    The orbit (stored at E = 1) is scaled to the level energy; Gaussians
    are summed with the accumulated phase gamma_t, symmetrized in time
    (which also covers non-time-reversal orbits, adding the packet running
    the other way around) and projected onto the level's symmetry class.
    """
    e_n = level.energy
    hbar = params.hbar
    orb = scale_orbit(po, e_n)
    period = orb.period
    if steps_per_period is None:
        steps_per_period = max(1000, int(np.ceil(8.0 * period * e_n / (np.pi * hbar))))
    # uniform rule over the periodic integrand (trapezoid with closed ends)
    ts = np.linspace(0.0, period, steps_per_period, endpoint=False)
    path = orb.path
    states = _interp_states(path, ts)
    actions = np.interp(ts, path.times, path.actions)
    windings = np.interp(ts, path.times, path.windings)
    gammas = actions / hbar - 0.5 * np.pi * windings

    max_x = np.max(np.abs(states[:, 0]))
    max_y = np.max(np.abs(states[:, 1]))
    if max_x > grid.x_extent - 2.5 or max_y > grid.y_extent - 2.5:
        raise CoverageError(
            f"orbit at E={e_n:.3f} (|x|<= {max_x:.2f}) does not fit the grid"
        )

    gx = grid.x[None, :] - states[:, 0][:, None]
    gy = grid.y[None, :] - states[:, 1][:, None]
    rows = np.exp(-gx * gx + 1j * (states[:, 2][:, None] / hbar) * gx)
    cols = np.exp(-gy * gy + 1j * (states[:, 3][:, None] / hbar) * gy)
    rows *= np.exp(1j * gammas)[:, None]
    vals = rows.T @ cols
    proj = project_irrep(WaveFunction(grid, vals), level.irrep)
    return _realized(proj, level.irrep)


def _realized(wf, irrep):
    """Real member of the class spanned by a projected complex state.

    Adding the complex conjugate is the clockwise + counterclockwise
    packet combination; the free relative phase is fixed by maximizing the
    norm of the real part, which selects the standing wave whose nodes sit
    on the Dirichlet lines of the class.
    """
    u = wf.values
    c2 = np.sum(u * u) * wf.grid.cell_area
    phi = 0.5 * np.angle(c2) if abs(c2) > 0 else 0.0
    real_vals = np.real(u * np.exp(-1j * phi))
    out = project_irrep(WaveFunction(wf.grid, real_vals.astype(np.complex128)), irrep)
    return out.normalize()


def _interp_states(path, ts):
    """Linear state interpolation on a densely sampled path."""
    out = np.empty((len(ts), 4))
    for c in range(4):
        out[:, c] = np.interp(ts, path.times, path.states[:, c])
    return out


# ----------------------------------------------------------------------
# propagation


@dataclass(frozen=True)
class PropagatorConfig:
    """Strang-split spectral stepping parameters.

    ``dt`` bounds the step; ``phase_budget`` is the tolerated kinetic phase
    advance per step at the grid's maximum frequency (aliasing guard).
    """

    dt: float = 2e-3
    phase_budget: float = float(np.pi)

    def validated_dt(self, grid, params):
        k2max = 0.5 * params.hbar * (np.max(np.abs(grid.kx)) ** 2 + np.max(np.abs(grid.ky)) ** 2)
        bound = self.phase_budget / k2max * 2.0 * np.pi
        return min(self.dt, bound)


def _phase_factors(grid, params, dt):
    tk = _kinetic_array(grid, params)
    vt = _potential_array(grid, params)
    return (
        np.exp(-1j * tk * dt / params.hbar),
        np.exp(-0.5j * vt * dt / params.hbar),
    )


def _propagate_stack(stack, grid, params, t_total, dt, callback=None):
    """Propagate a (m, nx, ny) stack forward by t_total in steps of dt.

    ``callback(step_index, t, stack)`` runs after every step; the stack is
    updated in place and also returned.
    """
    n_steps = int(np.ceil(abs(t_total) / dt - 1e-12))
    if n_steps == 0:
        return stack
    dt_eff = t_total / n_steps
    kin, pot_half = _phase_factors(grid, params, dt_eff)
    for m in range(n_steps):
        stack *= pot_half
        stack[:] = sfft.ifft2(
            kin * sfft.fft2(stack, axes=(-2, -1), workers=_FFT_WORKERS),
            axes=(-2, -1),
            workers=_FFT_WORKERS,
        )
        stack *= pot_half
        if callback is not None:
            callback(m + 1, (m + 1) * dt_eff, stack)
    return stack


def _boundary_mass(values, grid, width=2):
    edge = (
        np.sum(np.abs(values[:width, :]) ** 2)
        + np.sum(np.abs(values[-width:, :]) ** 2)
        + np.sum(np.abs(values[:, :width]) ** 2)
        + np.sum(np.abs(values[:, -width:]) ** 2)
    )
    return edge * grid.cell_area


def propagate(wf, t, params, config=None):
    """exp(-i H t / hbar) psi by Strang-split spectral stepping."""
    config = config or PropagatorConfig()
    if t == 0.0:
        return wf.copy()
    dt = config.validated_dt(wf.grid, params)
    stack = wf.values[None, :, :].astype(np.complex128).copy()
    _propagate_stack(stack, wf.grid, params, t, dt)
    out = WaveFunction(wf.grid, stack[0])
    if _boundary_mass(out.values, wf.grid) > 1e-10 * out.norm() ** 2:
        raise LeakageError("probability reached the grid boundary")
    return out


# ----------------------------------------------------------------------
# scar construction


def ehrenfest_time(energy, irrep, hbar=1.0):
    """Spreading time over the transverse section area of the class."""
    if energy <= 0:
        raise ValueError("energy must be positive")
    tag = getattr(irrep, "tag", irrep)
    coeff = A_TR_COEFF_E if tag.startswith("E") else A_TR_COEFF_1D
    a_tr = coeff * energy**0.75
    lam_bar = LYAPUNOV_COEFF * energy**0.25
    return np.log(a_tr / hbar) / (2.0 * lam_bar)


def semiclassical_dispersion(lam, t_e, hbar=1.0):
    """Predicted energy dispersion of a scar of stability exponent lam."""
    s1 = 1.06078
    s2 = np.pi / np.sqrt(2.0) - s1
    x = lam * t_e
    return 0.5 * np.pi * hbar * lam * (s2 + x) / ((s1 + x) * (s2 + x) + s2 * s2)


def _scar_from_tubes(tubes, levels, t_es, grid, params, config):
    """Cosine-windowed energy filter of a batch of (real) tube functions.

    psi_scar = int_{-T_E}^{T_E} dt cos(pi t / 2 T_E)
               e^{-i(H - E_n) t / hbar} psi_tube
    computed as 2 Re of the forward half (tubes are real), sharing one
    split-operator propagation across the batch.
    """
    hbar = params.hbar
    config = config or PropagatorConfig()
    dt = config.validated_dt(grid, params)
    t_max = max(t_es)
    n_steps = int(np.ceil(t_max / dt - 1e-12))
    dt = t_max / n_steps

    m = len(tubes)
    stack = np.stack([tb.values for tb in tubes]).astype(np.complex128)
    accum = np.zeros_like(stack)
    energies = np.array([lv.energy for lv in levels])
    t_es = np.asarray(t_es, dtype=float)

    def window(t):
        w = np.cos(0.5 * np.pi * np.minimum(t / t_es, 1.0))
        w[t > t_es] = 0.0
        return w * np.exp(1j * energies * t / hbar)

    # trapezoid in time: half weight at t = 0, window vanishes at t = T_E
    accum += 0.5 * window(0.0)[:, None, None] * stack

    def cb(step, t, st):
        accum_step = window(t)
        np.add(accum, accum_step[:, None, None] * st, out=accum)

    _propagate_stack(stack, grid, params, t_max, dt, callback=cb)
    accum *= dt
    out = []
    for k in range(m):
        vals = accum[k] + np.conj(accum[k])
        wf = WaveFunction(grid, vals)
        wf = project_irrep(wf, levels[k].irrep, normalized=True)
        sig = energy_dispersion(wf, energies[k], params)
        out.append(
            ScarFunction(
                wavefunction=wf,
                orbit_id=levels[k].orbit_id,
                n=levels[k].n,
                irrep=levels[k].irrep,
                bs_energy=energies[k],
                sigma=sig,
                ehrenfest_time=float(t_es[k]),
            )
        )
    return out


def scar_function(tube, level, t_e, params, config=None):
    """Scar function from one tube; T_E = 0 collapses to the tube itself."""
    if t_e < 0:
        raise ValueError("Ehrenfest time must be non-negative")
    if t_e == 0.0:
        wf = tube.normalize()
        return ScarFunction(
            wavefunction=wf,
            orbit_id=level.orbit_id,
            n=level.n,
            irrep=level.irrep,
            bs_energy=level.energy,
            sigma=energy_dispersion(wf, level.energy, params),
            ehrenfest_time=0.0,
        )
    return _scar_from_tubes([tube], [level], [t_e], tube.grid, params, config)[0]


def build_scars(levels, orbit_map, grid, params, config=None, steps_per_period=None, verbose=False):
    """Tube + scar construction for a batch of levels on a shared grid."""
    tubes = []
    t_es = []
    for lv in levels:
        po = orbit_map[lv.orbit_id]
        tubes.append(tube_function(po, lv, grid, params, steps_per_period))
        t_es.append(ehrenfest_time(lv.energy, lv.irrep, params.hbar))
        if verbose:
            print(f"  tube ({lv.orbit_id},{lv.n}) {lv.irrep} E={lv.energy:.4f}")
    return _scar_from_tubes(tubes, levels, t_es, grid, params, config)


# ----------------------------------------------------------------------
# diagnostics and I/O


def sample_along_orbit(wf, po, energy, n_samples=4000, params=None):
    """Bilinear samples of the wavefunction along the orbit at ``energy``."""
    orb = scale_orbit(po, energy)
    ts = np.linspace(0.0, orb.period, n_samples, endpoint=False)
    states = _interp_states(orb.path, ts)
    g = wf.grid
    fi = (states[:, 0] + g.x_extent) / g.dx - 0.5
    fj = (states[:, 1] + g.y_extent) / g.dy - 0.5
    i0 = np.clip(np.floor(fi).astype(int), 0, g.nx - 2)
    j0 = np.clip(np.floor(fj).astype(int), 0, g.ny - 2)
    si = fi - i0
    sj = fj - j0
    v = wf.values
    vals = (
        v[i0, j0] * (1 - si) * (1 - sj)
        + v[i0 + 1, j0] * si * (1 - sj)
        + v[i0, j0 + 1] * (1 - si) * sj
        + v[i0 + 1, j0 + 1] * si * sj
    )
    return ts, vals


def count_sign_changes(samples, rel_threshold=0.05):
    """Sign changes of a real periodic sample set, with hysteresis.

    Crossings below ``rel_threshold`` of the peak amplitude are treated as
    noise: a change only registers once the signal exceeds the threshold
    with the new sign.
    """
    x = np.real(samples)
    amp = np.max(np.abs(x))
    if amp == 0:
        return 0
    thr = rel_threshold * amp
    state = 0
    changes = 0
    first = 0
    for v in x:
        if v > thr:
            s = 1
        elif v < -thr:
            s = -1
        else:
            continue
        if state == 0:
            state = s
            first = s
            continue
        if s != state:
            changes += 1
            state = s
    # close the loop: periodic samples may change sign across the wrap
    if state != 0 and first != 0 and state != first:
        changes += 1
    return changes


_MAGIC = b"SCARWF1\n"


def save_wavefunction(wf, filepath, e_ref=0.0, metadata=None):
    """Binary snapshot: header + little-endian complex64 payload."""
    meta = json.dumps(metadata or {}).encode()
    with open(filepath, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(
            struct.pack(
                "<iiddd I",
                wf.grid.nx,
                wf.grid.ny,
                wf.grid.x_extent,
                wf.grid.y_extent,
                e_ref,
                len(meta),
            )
        )
        fh.write(meta)
        fh.write(np.ascontiguousarray(wf.values.astype("<c8")).tobytes())


def load_wavefunction(filepath):
    with open(filepath, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError("not a wavefunction snapshot")
        nx, ny, xe, ye, e_ref, mlen = struct.unpack("<iiddd I", fh.read(struct.calcsize("<iiddd I")))
        metadata = json.loads(fh.read(mlen).decode())
        data = np.frombuffer(fh.read(nx * ny * 8), dtype="<c8").reshape(nx, ny)
    wf = WaveFunction(Grid2D(nx, ny, xe, ye), data.astype(np.complex128))
    return wf, e_ref, metadata


def export_density_csv(wf, filepath):
    g = wf.grid
    dens = np.abs(wf.values) ** 2
    with open(filepath, "w") as fh:
        fh.write("x,y,density\n")
        for i, xv in enumerate(g.x):
            for j, yv in enumerate(g.y):
                fh.write(f"{xv:.17g},{yv:.17g},{dens[i, j]:.17g}\n")
