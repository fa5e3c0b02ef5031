"""Pseudo-spectral Schrodinger propagation for multi-level atoms on a grid.

Each internal level carries its own spatial wavefunction on a periodic grid.
The kinetic term acts in momentum space through FFTs, potentials act
pointwise, and microwave couplings act pointwise across levels in the
rotating frame.  exp(-iH dt/hbar) is expanded in Chebyshev polynomials of the
spectrally rescaled Hamiltonian.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import jv

from . import constants as C
from .errors import GridTooLarge, GridUnderresolved, ToleranceUnreachable

MAX_ORDER = 100_000
ORACLE_MAX_POINTS = 64
ORACLE_MAX_LEVELS = 4


@dataclass(frozen=True)
class SpatialGrid:
    n_points: int  # per axis
    length: float  # m, per axis
    dimensions: int = 1
    origin: float = 0.0

    def __post_init__(self):
        n = self.n_points
        if n < 16 or n & (n - 1):
            raise ValueError("n_points must be a power of two and at least 16")
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.dimensions not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def shape(self) -> tuple:
        return (self.n_points,) * self.dimensions

    @property
    def size(self) -> int:
        return self.n_points ** self.dimensions

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimensions

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.n_points)

    def coordinates(self):
        """Coordinate arrays broadcast to the grid shape."""
        if self.dimensions == 1:
            return (self.x,)
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.spacing)

    def k_squared(self) -> np.ndarray:
        k = self.k
        if self.dimensions == 1:
            return k ** 2
        kx, ky = np.meshgrid(k, k, indexing="ij")
        return kx ** 2 + ky ** 2

    def kinetic_max(self, mass: float) -> float:
        return float(C.hbar ** 2 * self.k_squared().max() / (2 * mass))


@dataclass
class MultiLevelWavefunction:
    amplitudes: np.ndarray  # complex, shape (levels, *grid.shape)
    grid: SpatialGrid

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape[1:] != self.grid.shape:
            raise ValueError(f"amplitude shape {self.amplitudes.shape} does not match grid {self.grid.shape}")

    @property
    def levels(self) -> int:
        return self.amplitudes.shape[0]

    def populations(self) -> np.ndarray:
        axes = tuple(range(1, self.amplitudes.ndim))
        return np.sum(np.abs(self.amplitudes) ** 2, axis=axes) * self.grid.cell_volume

    def norm(self) -> float:
        return float(self.populations().sum())

    def overlap(self, other: "MultiLevelWavefunction") -> complex:
        return complex(np.vdot(other.amplitudes, self.amplitudes) * self.grid.cell_volume)

    def normalized(self) -> "MultiLevelWavefunction":
        return MultiLevelWavefunction(self.amplitudes / math.sqrt(self.norm()), self.grid)

    def copy(self) -> "MultiLevelWavefunction":
        return MultiLevelWavefunction(self.amplitudes.copy(), self.grid)

    @classmethod
    def product(cls, grid, levels, level, spatial) -> "MultiLevelWavefunction":
        amp = np.zeros((levels,) + grid.shape, dtype=complex)
        amp[level] = spatial
        return cls(amp, grid)


@dataclass
class DressedHamiltonian:
    """Rotating-frame Hamiltonian.

    ``couplings`` holds (i, j, Omega, delta): H_ij = hbar Omega / 2 and
    H_ji = its conjugate, for a drive detuned by delta (rad/s) from the bare
    i -> j transition.  Detunings fix the frame energies through
    E_j - E_i = -hbar delta; they must be consistent around closed loops.
    """

    potentials: np.ndarray  # real, shape (levels, *grid.shape), J
    couplings: list
    mass: float
    _offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.potentials = np.asarray(self.potentials, dtype=float)
        n = self.levels
        for i, j, _, _ in self.couplings:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"invalid coupling between levels {i} and {j}")
        self._offsets = self._frame_offsets()

    @property
    def levels(self) -> int:
        return self.potentials.shape[0]

    def _frame_offsets(self) -> np.ndarray:
        n = self.levels
        adj = {k: [] for k in range(n)}
        for i, j, _, d in self.couplings:
            adj[i].append((j, -C.hbar * d))
            adj[j].append((i, C.hbar * d))
        off = np.full(n, np.nan)
        for root in range(n):
            if not np.isnan(off[root]):
                continue
            off[root] = 0.0
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for v, step in adj[u]:
                    want = off[u] + step
                    if np.isnan(off[v]):
                        off[v] = want
                        queue.append(v)
                    elif not math.isclose(off[v], want, rel_tol=1e-9, abs_tol=1e-40):
                        raise ValueError("coupling detunings are inconsistent around a loop")
        return off

    @property
    def frame_offsets(self) -> np.ndarray:
        return self._offsets.copy()

    def diagonal(self) -> np.ndarray:
        shape = (self.levels,) + (1,) * (self.potentials.ndim - 1)
        return self.potentials + self._offsets.reshape(shape)

    def coupling_matrix(self) -> np.ndarray:
        """Level-space coupling block in J."""
        M = np.zeros((self.levels, self.levels), dtype=complex)
        for i, j, Om, _ in self.couplings:
            M[i, j] += C.hbar * Om / 2
            M[j, i] += C.hbar * np.conj(Om) / 2
        return M


@dataclass
class PulseSchedule:
    segments: list  # [(duration, DressedHamiltonian)]

    def __post_init__(self):
        for dt, _ in self.segments:
            if dt <= 0:
                raise ValueError("segment durations must be positive")

    @property
    def duration(self) -> float:
        return float(sum(dt for dt, _ in self.segments))


def spectral_range(H: DressedHamiltonian, grid: SpatialGrid) -> tuple:
    """Lower and upper bounds on the spectrum of the discretized H."""
    diag = H.diagonal()
    cmat = H.coupling_matrix()
    c_bound = float(np.max(np.sum(np.abs(cmat), axis=1))) if H.levels else 0.0
    e_min = float(diag.min()) - c_bound
    e_max = float(diag.max()) + grid.kinetic_max(H.mass) + c_bound
    return e_min, e_max


def check_resolution(H: DressedHamiltonian, grid: SpatialGrid):
    """Refuse grids whose kinetic cutoff is tiny against the potential and coupling scale."""
    diag = H.diagonal()
    span = float(diag.max() - diag.min()) + 2 * float(np.max(np.sum(np.abs(H.coupling_matrix()), axis=1)))
    t_max = grid.kinetic_max(H.mass)
    if span > 0 and t_max < 0.1 * span:
        raise GridUnderresolved(
            f"kinetic cutoff {t_max:.3e} J is below 10% of the potential/coupling span {span:.3e} J; "
            "use a finer grid")


class _Operator:
    """Applies the rescaled Hamiltonian (H - centre)/half_width without per-call allocation."""

    def __init__(self, H: DressedHamiltonian, grid: SpatialGrid, e_min: float, e_max: float):
        self.centre = 0.5 * (e_max + e_min)
        self.half = 0.5 * (e_max - e_min) or 1.0
        inv = 1.0 / self.half
        # complex copies avoid a dtype cast on every application
        self.kin = (C.hbar ** 2 * grid.k_squared() / (2 * H.mass) * inv).astype(complex)
        self.diag = ((H.diagonal() - self.centre) * inv).astype(complex)
        self.cmat = H.coupling_matrix() * inv
        self.has_coupling = bool(np.any(self.cmat))
        self.axes = tuple(range(1, grid.dimensions + 1))
        shape = (H.levels,) + grid.shape
        self._k = np.empty(shape, dtype=complex)
        self._tmp = np.empty(shape, dtype=complex)

    def apply(self, psi: np.ndarray, out: np.ndarray) -> np.ndarray:
        if len(self.axes) == 1:
            np.fft.fft(psi, axis=-1, out=self._k)
            self._k *= self.kin
            np.fft.ifft(self._k, axis=-1, out=out)
        else:
            np.fft.fftn(psi, axes=self.axes, out=self._k)
            self._k *= self.kin
            np.fft.ifftn(self._k, axes=self.axes, out=out)
        np.multiply(self.diag, psi, out=self._tmp)
        out += self._tmp
        if self.has_coupling:
            flat = psi.reshape(psi.shape[0], -1)
            np.matmul(self.cmat, flat, out=self._tmp.reshape(flat.shape))
            out += self._tmp
        return out

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self.apply(psi, np.empty_like(self._tmp))


def chebyshev_order(alpha: float, tolerance: float, cap: int = MAX_ORDER) -> int:
    """Smallest K with |J_k(alpha)| < tolerance for every k >= K (tail checked to decay)."""
    a = abs(alpha)
    n = int(a + 20 * a ** (1 / 3) + 40)
    while True:
        n_eval = min(n, cap + 1)
        ks = np.arange(n_eval)
        big = np.nonzero(np.abs(jv(ks, a)) >= tolerance)[0]
        last = int(big[-1]) + 1 if big.size else 1
        if last < n_eval - 5:
            return max(last, 1)
        if n_eval > cap:
            raise ToleranceUnreachable(
                f"Chebyshev order exceeds {cap} (alpha = {a:.3e}, tolerance = {tolerance:g})")
        n *= 2


def propagate(psi: MultiLevelWavefunction, H: DressedHamiltonian, dt: float,
              tolerance: float = 1e-10, max_order: int = MAX_ORDER,
              subdivide: bool = True) -> MultiLevelWavefunction:
    """psi(t + dt) = exp(-i H dt / hbar) psi(t) by Chebyshev expansion.  dt may be negative."""
    if psi.levels != H.levels:
        raise ValueError("wavefunction and Hamiltonian level counts differ")
    if dt == 0:
        return psi.copy()
    grid = psi.grid
    check_resolution(H, grid)
    e_min, e_max = spectral_range(H, grid)
    op = _Operator(H, grid, e_min, e_max)
    alpha = op.half * dt / C.hbar
    try:
        order = chebyshev_order(alpha, tolerance, max_order)
    except ToleranceUnreachable:
        if not subdivide:
            raise
        n_sub = int(math.ceil(abs(alpha) / (0.5 * max_order))) + 1
        out = psi
        for _ in range(n_sub):
            out = propagate(out, H, dt / n_sub, tolerance, max_order, subdivide=False)
        return out

    coeffs = jv(np.arange(order), alpha) * (-1j) ** (np.arange(order) % 4)
    coeffs[1:] *= 2
    # three-term recurrence on rotating buffers
    prev = np.array(psi.amplitudes, dtype=complex)
    acc = coeffs[0] * prev
    if order > 1:
        cur = op(prev)
        nxt = np.empty_like(cur)
        scratch = np.empty_like(cur)
        np.multiply(cur, coeffs[1], out=scratch)
        acc += scratch
        for k in range(2, order):
            op.apply(cur, nxt)
            nxt *= 2
            nxt -= prev
            np.multiply(nxt, coeffs[k], out=scratch)
            acc += scratch
            prev, cur, nxt = cur, nxt, prev
    acc *= np.exp(-1j * op.centre * dt / C.hbar)
    return MultiLevelWavefunction(acc, grid)


def kinetic_matrix(grid: SpatialGrid, mass: float) -> np.ndarray:
    """Dense kinetic operator built from an explicit DFT matrix (real symmetric)."""
    n = grid.n_points
    j = np.arange(n)
    F = np.exp(-2j * np.pi * np.outer(j, j) / n)
    k2 = grid.k ** 2
    T1 = (F.conj().T @ np.diag(C.hbar ** 2 * k2 / (2 * mass)) @ F) / n
    T1 = T1.real
    if grid.dimensions == 1:
        return T1
    eye = np.eye(n)
    return np.kron(T1, eye) + np.kron(eye, T1)


def dense_hamiltonian(H: DressedHamiltonian, grid: SpatialGrid) -> np.ndarray:
    L, G = H.levels, grid.size
    T = kinetic_matrix(grid, H.mass)
    diag = H.diagonal().reshape(L, G)
    cmat = H.coupling_matrix()
    M = np.zeros((L * G, L * G), dtype=complex)
    eye = np.eye(G)
    for i in range(L):
        M[i * G:(i + 1) * G, i * G:(i + 1) * G] = T + np.diag(diag[i])
        for j in range(L):
            if i != j and cmat[i, j] != 0:
                M[i * G:(i + 1) * G, j * G:(j + 1) * G] = cmat[i, j] * eye
    return M


def oracle_propagate(psi: MultiLevelWavefunction, H: DressedHamiltonian, dt: float) -> MultiLevelWavefunction:
    """Dense matrix-exponential reference; only for tiny grids."""
    grid = psi.grid
    if grid.size > ORACLE_MAX_POINTS or H.levels > ORACLE_MAX_LEVELS:
        raise GridTooLarge(
            f"oracle limited to {ORACLE_MAX_POINTS} points x {ORACLE_MAX_LEVELS} levels")
    U = scipy.linalg.expm(-1j * dense_hamiltonian(H, grid) * dt / C.hbar)
    out = U @ psi.amplitudes.reshape(-1)
    return MultiLevelWavefunction(out.reshape(psi.amplitudes.shape), grid)


def well_eigenstates(grid: SpatialGrid, potential: np.ndarray, mass: float, n_states: int = 8):
    """Lowest eigenpairs of a single-level 1D grid Hamiltonian, normalized to unit norm.

    Phases are fixed so each state's largest-magnitude sample is positive.
    """
    if grid.dimensions != 1:
        raise ValueError("well_eigenstates supports 1D grids")
    Hm = kinetic_matrix(grid, mass) + np.diag(potential)
    E, V = scipy.linalg.eigh(Hm, subset_by_index=(0, n_states - 1))
    V = V / math.sqrt(grid.spacing)
    for k in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, k])), k] < 0:
            V[:, k] *= -1
    return E, V.T.astype(complex)


# -- microwave gate ---------------------------------------------------------

@dataclass
class GateSetup:
    schedule: PulseSchedule
    psi0: MultiLevelWavefunction
    target: MultiLevelWavefunction
    motional_basis: np.ndarray  # (N_proj, n_points) lowest well eigenstates
    grid: SpatialGrid


@dataclass
class GateResult:
    error: float
    populations: list
    motional_excitation: float
    norm: float
    snapshots: list = field(default_factory=list)  # [(t, per-level density array)]

    def as_dict(self) -> dict:
        return {"error": self.error, "populations": list(map(float, self.populations)),
                "motional_excitation": self.motional_excitation, "norm": self.norm}


N_PROJ = 8


def default_grid(lattice, n_points: int = 512) -> SpatialGrid:
    """One lattice period, target well at the cell centre."""
    return SpatialGrid(n_points, lattice.a)


def gate_potentials(lattice, gate, grid: SpatialGrid, delta_x: float) -> np.ndarray:
    from .lattice import lattice_potential
    from .microwave_gate import GaussianBeam, beam_intensity
    x = grid.x
    centre = lattice.a / 2
    v_lat = lattice_potential(lattice, x)
    beam = GaussianBeam(gate.w0, gate.lambda_M)
    stark = C.hbar * gate.Delta_ac * beam_intensity(beam, x - centre - delta_x, 0.0)
    return np.stack([v_lat, v_lat, v_lat + stark, v_lat - stark])


def build_microwave_gate(lattice, gate, grid: SpatialGrid | None = None,
                         delta_x: float | None = None, variant: str = "simultaneous",
                         calibration: str = "motional", mass: float = C.m_Cs) -> GateSetup:
    """Four-level pi gate |0> -> |1> through |2>, |3>.

    Omega_1 and Omega_2 are the coupling matrix elements divided by hbar, so
    the Rabi frequencies in the Hamiltonian are twice those values and the
    simultaneous drive completes the flip at t = pi / Omega_1.

    Drive frequencies are calibrated on a well-centred beam (delta_x = 0).
    ``calibration="motional"`` tunes them to the transitions between the
    vibrational ground states of each level, which include the zero-point
    average of the Stark shift; ``"beam_centre"`` uses the peak shift only.
    """
    grid = grid or default_grid(lattice)
    if grid.dimensions != 1:
        raise ValueError("the gate model is one-dimensional")
    dx = gate.delta_x if delta_x is None else delta_x
    V = gate_potentials(lattice, gate, grid, dx)
    if calibration == "beam_centre":
        d = gate.Delta_ac
        det = {(0, 2): d, (2, 3): -2 * d, (1, 3): -d}
    elif calibration == "motional":
        V_ref = gate_potentials(lattice, gate, grid, 0.0)
        E = [well_eigenstates(grid, V_ref[k], mass, 1)[0][0] for k in range(4)]
        det = {(i, j): (E[j] - E[i]) / C.hbar for i, j in ((0, 2), (2, 3), (1, 3))}
    else:
        raise ValueError("calibration must be 'motional' or 'beam_centre'")

    def ham(r02, r23, r13):
        return DressedHamiltonian(V, [(0, 2, r02, det[(0, 2)]), (2, 3, r23, det[(2, 3)]),
                                      (1, 3, r13, det[(1, 3)])], mass)

    if variant == "simultaneous":
        sched = PulseSchedule([(gate.T_1, ham(2 * gate.Omega_2, 2 * gate.Omega_1, 2 * gate.Omega_2))])
    elif variant == "sequential":
        leg = gate.T_1 / 3
        r = math.pi / leg
        sched = PulseSchedule([(leg, ham(r, 0.0, 0.0)), (leg, ham(0.0, r, 0.0)),
                               (leg, ham(0.0, 0.0, r))])
    else:
        raise ValueError("variant must be 'simultaneous' or 'sequential'")

    _, basis = well_eigenstates(grid, V[0], mass, N_PROJ)
    psi0 = MultiLevelWavefunction.product(grid, 4, 0, basis[0])
    target = MultiLevelWavefunction.product(grid, 4, 1, basis[0])
    return GateSetup(sched, psi0, target, basis, grid)


def simulate_gate(setup: GateSetup, tolerance: float = 1e-10, snapshot_times=()) -> GateResult:
    """Run the schedule and score the final state against the target."""
    psi = setup.psi0
    times = sorted(float(t) for t in snapshot_times)
    if times and (times[0] < 0 or times[-1] > setup.schedule.duration * (1 + 1e-12)):
        raise ValueError("snapshot times must lie within the schedule")
    snaps = []
    t0 = 0.0
    for dur, H in setup.schedule.segments:
        t_end = t0 + dur
        cursor = t0
        while times and times[0] <= t_end * (1 + 1e-12):
            t_s = min(times.pop(0), t_end)
            psi = propagate(psi, H, t_s - cursor, tolerance) if t_s > cursor else psi
            cursor = t_s
            snaps.append((t_s, np.abs(psi.amplitudes) ** 2))
        if t_end > cursor:
            psi = propagate(psi, H, t_end - cursor, tolerance)
        t0 = t_end

    fidelity = abs(psi.overlap(setup.target)) ** 2
    proj = setup.motional_basis.conj() @ psi.amplitudes.T * setup.grid.spacing  # (N_proj, levels)
    excited = float(np.sum(np.abs(proj[1:]) ** 2))
    return GateResult(1.0 - fidelity, list(psi.populations()), excited, psi.norm(), snaps)


SNAPSHOT_LEVEL_COLUMNS = 4


def write_snapshot_csv(grid: SpatialGrid, density: np.ndarray, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x_m"] + [f"level{k}" for k in range(density.shape[0])])
    for i, x in enumerate(grid.x):
        w.writerow([f"{x:.9e}"] + [f"{density[k, i]:.9e}" for k in range(density.shape[0])])
