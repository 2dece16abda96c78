"""Domain types, validation, and lattice/wave-vector set construction.

Shared by every summation path. All types are immutable after construction
and all operations are pure functions, so everything here is safe to share
across threads.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

#: relative tolerance on |sum q| / sum |q| below which a system counts as neutral
NEUTRALITY_RTOL = 1e-12

#: off-particle targets closer than COINCIDE_RTOL * min(L) to a source are rejected
COINCIDE_RTOL = 1e-10


class Periodicity(enum.Enum):
    """Periodic replication pattern: P3 in x,y,z; P2 in x,y; P1 in z."""

    P1 = "1p"
    P2 = "2p"
    P3 = "3p"

    @property
    def periodic_axes(self):
        """Indices of the periodic coordinate axes."""
        if self is Periodicity.P1:
            return (2,)
        if self is Periodicity.P2:
            return (0, 1)
        return (0, 1, 2)

    @property
    def free_axes(self):
        return tuple(i for i in range(3) if i not in self.periodic_axes)

    @classmethod
    def from_string(cls, name: str) -> "Periodicity":
        try:
            return {"1p": cls.P1, "2p": cls.P2, "3p": cls.P3}[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown periodicity mode {name!r}; use 1p, 2p or 3p")


@dataclass(frozen=True)
class ParticleSystem:
    """N point charges in an orthorhombic box.

    Parameters
    ----------
    positions : (N, 3) array
        Cartesian coordinates (length units).
    charges : (N,) array
        Signed charges.
    box : (3,) array
        Box edge lengths (L1, L2, L3), all positive and finite. The primary
        cell is [-L_i/2, L_i/2] per coordinate.

    Charge neutrality is not enforced at construction; ``validate_system``
    reports it and the Ewald operations treat a non-neutral system as a hard
    error.
    """

    positions: np.ndarray
    charges: np.ndarray
    box: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(np.atleast_2d(np.asarray(self.positions, dtype=np.float64)))
        q = np.ascontiguousarray(np.asarray(self.charges, dtype=np.float64).ravel())
        box = np.asarray(self.box, dtype=np.float64).ravel()
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must have shape (N, 3), got {pos.shape}")
        if len(q) != len(pos):
            raise ValueError(
                f"positions and charges disagree in length: {len(pos)} vs {len(q)}"
            )
        if len(pos) < 1:
            raise ValueError("need at least one particle")
        if box.shape != (3,):
            raise ValueError("box must contain exactly three lengths")
        if not np.all(np.isfinite(box)) or np.any(box <= 0.0):
            raise ValueError(f"box lengths must be positive and finite, got {box}")
        if not np.all(np.isfinite(pos)) or not np.all(np.isfinite(q)):
            raise ValueError("positions and charges must be finite")
        pos.setflags(write=False)
        q.setflags(write=False)
        box.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "charges", q)
        object.__setattr__(self, "box", box)

    def __len__(self) -> int:
        return len(self.charges)

    @property
    def net_charge(self) -> float:
        return float(np.sum(self.charges))

    @property
    def is_neutral(self) -> bool:
        return abs(self.net_charge) <= NEUTRALITY_RTOL * float(np.sum(np.abs(self.charges)))

    def wrapped(self, mode: Periodicity) -> "ParticleSystem":
        """Copy with positions wrapped into [-L/2, L/2) along periodic axes.

        Free-direction coordinates are accepted as-is: the doubly/singly
        periodic formulas hold for any z resp. (x, y).
        """
        pos = wrap_positions(self.positions, self.box, mode)
        return ParticleSystem(pos, self.charges, self.box)


def wrap_positions(positions, box, mode: Periodicity) -> np.ndarray:
    """Wrap coordinates modulo L into [-L/2, L/2) along the periodic axes only."""
    pos = np.array(positions, dtype=np.float64, copy=True)
    pos = np.atleast_2d(pos)
    box = np.asarray(box, dtype=np.float64)
    for ax in mode.periodic_axes:
        L = box[ax]
        pos[:, ax] -= L * np.floor(pos[:, ax] / L + 0.5)
    return pos


@dataclass(frozen=True)
class EwaldParams:
    """Decomposition parameter and truncation settings.

    xi : inverse length, > 0. Controls the split between the erfc-screened
        real-space sum and the Gaussian-damped k-space sum; totals are
        xi-independent up to truncation error.
    r_cut : real-space pair-distance cutoff (length), > 0 (inf allowed).
    k_max : k-space cutoff by Euclidean norm (inverse length), > 0.
    real_layers : image shells beyond the minimum image, >= 0.
    """

    xi: float
    r_cut: float
    k_max: float
    real_layers: int

    def __post_init__(self):
        if not (self.xi > 0.0 and math.isfinite(self.xi)):
            raise ValueError(f"xi must be positive and finite, got {self.xi}")
        if not self.r_cut > 0.0:
            raise ValueError(f"r_cut must be positive, got {self.r_cut}")
        if not (self.k_max > 0.0 and math.isfinite(self.k_max)):
            raise ValueError(f"k_max must be positive and finite, got {self.k_max}")
        if self.real_layers < 0 or int(self.real_layers) != self.real_layers:
            raise ValueError(f"real_layers must be a non-negative integer, got {self.real_layers}")

    def check(self, tol: float = 1e-12) -> list:
        """Return a list of warning strings for unbalanced truncation settings."""
        warnings = []
        if math.isfinite(self.r_cut) and math.erfc(self.xi * self.r_cut) >= tol:
            warnings.append(
                f"erfc(xi*r_cut) = {math.erfc(self.xi * self.r_cut):.3e} >= {tol:.1e}; "
                "real-space truncation error may dominate"
            )
        if math.exp(-0.25 * (self.k_max / self.xi) ** 2) >= tol:
            warnings.append(
                f"exp(-k_max^2/4xi^2) = {math.exp(-0.25 * (self.k_max / self.xi) ** 2):.3e} "
                f">= {tol:.1e}; k-space truncation error may dominate"
            )
        return warnings


def default_xi(box, mode: Periodicity) -> float:
    """Default decomposition parameter: 8 / (smallest periodic box length)."""
    box = np.asarray(box, dtype=np.float64)
    return 8.0 / float(np.min(box[list(mode.periodic_axes)]))


def default_params(box, mode: Periodicity, xi: float | None = None,
                   tol: float = 1e-14) -> EwaldParams:
    """Balanced truncation heuristics.

    r_cut solves erfc(xi*r_cut) <= tol (about 5.4/xi at tol=1e-14), k_max
    solves exp(-k_max^2/4xi^2) <= tol (about 11.4*xi), and real_layers =
    ceil(r_cut / min periodic L).
    """
    box = np.asarray(box, dtype=np.float64)
    if xi is None:
        xi = default_xi(box, mode)
    # invert erfc by bisection: erfc is strictly decreasing
    lo, hi = 0.0, 30.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.erfc(mid) > tol:
            lo = mid
        else:
            hi = mid
    r_cut = hi / xi
    k_max = 2.0 * xi * math.sqrt(-math.log(tol))
    min_per_L = float(np.min(box[list(mode.periodic_axes)]))
    layers = int(math.ceil(r_cut / min_per_L))
    return EwaldParams(xi=float(xi), r_cut=r_cut, k_max=k_max, real_layers=layers)


@dataclass(frozen=True)
class KGrid:
    """Wave-vector set for one periodicity mode, zero mode excluded.

    vectors : (K, 3) array for P3, (K, 2) for P2, (K,) scalars for P1.
    indices : matching integer lattice indices (bookkeeping; same ordering).

    The set is closed under negation and ordered lexicographically by integer
    index, so summation order is deterministic.
    """

    mode: Periodicity
    vectors: np.ndarray
    indices: np.ndarray = field(repr=False, default=None)

    def __len__(self) -> int:
        return len(self.vectors)


def build_kgrid(box, mode: Periodicity, k_max: float) -> KGrid:
    """All nonzero wave vectors 2*pi*(n_i/L_i) with Euclidean norm <= k_max.

    An empty grid is legal (the k-space sum is then zero).
    """
    if not k_max > 0.0:
        raise ValueError(f"k_max must be positive, got {k_max}")
    box = np.asarray(box, dtype=np.float64)
    axes = list(mode.periodic_axes)
    base = 2.0 * np.pi / box[axes]
    nmax = np.floor(k_max / base).astype(np.int64)
    ranges = [np.arange(-n, n + 1, dtype=np.int64) for n in nmax]
    if mode is Periodicity.P1:
        idx = ranges[0][:, None]
    else:
        mesh = np.meshgrid(*ranges, indexing="ij")
        idx = np.stack([m.ravel() for m in mesh], axis=1)
    # lexicographic by integer index; np.lexsort sorts by last key first
    order = np.lexsort(tuple(idx[:, d] for d in reversed(range(idx.shape[1]))))
    idx = idx[order]
    nonzero = np.any(idx != 0, axis=1)
    idx = idx[nonzero]
    vecs = idx * base[None, :]
    norm = np.sqrt(np.sum(vecs * vecs, axis=1))
    keep = norm <= k_max
    idx, vecs = idx[keep], vecs[keep]
    if mode is Periodicity.P1:
        vecs = vecs[:, 0]
    vecs = np.ascontiguousarray(vecs)
    vecs.setflags(write=False)
    idx.setflags(write=False)
    return KGrid(mode=mode, vectors=vecs, indices=idx)


def build_image_vectors(box, mode: Periodicity, layers: int) -> np.ndarray:
    """Lattice shift vectors p with indices in [-layers, layers] per periodic axis.

    Returns an (P, 3) array ordered by shell (max-norm of the integer index)
    ascending, p = 0 first, lexicographic within a shell, so truncation
    corresponds to whole symmetric shells.
    """
    if layers < 0:
        raise ValueError(f"layers must be >= 0, got {layers}")
    box = np.asarray(box, dtype=np.float64)
    axes = list(mode.periodic_axes)
    rng = np.arange(-layers, layers + 1, dtype=np.int64)
    mesh = np.meshgrid(*([rng] * len(axes)), indexing="ij")
    idx = np.stack([m.ravel() for m in mesh], axis=1)
    shell = np.max(np.abs(idx), axis=1)
    lex = np.lexsort(tuple(idx[:, d] for d in reversed(range(idx.shape[1]))))
    idx = idx[lex]
    shell = shell[lex]
    order = np.argsort(shell, kind="stable")
    idx = idx[order]
    out = np.zeros((len(idx), 3), dtype=np.float64)
    for col, ax in enumerate(axes):
        out[:, ax] = idx[:, col] * box[ax]
    out = np.ascontiguousarray(out)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_system: pass/fail plus diagnostics."""

    ok: bool
    net_charge: float
    abs_charge_sum: float
    out_of_box: tuple
    coincident_pairs: tuple
    warnings: tuple

    def __str__(self):
        status = "pass" if self.ok else "FAIL"
        lines = [f"validation: {status} (net charge {self.net_charge:.6e})"]
        lines += [f"  warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def validate_system(system: ParticleSystem) -> ValidationReport:
    """Report charge neutrality, out-of-box coordinates and coincident pairs.

    A reporting operation: it never raises. Coincident pairs and out-of-box
    coordinates are warnings; failed neutrality fails the report, and callers
    treat that as a hard error for Ewald evaluations.
    """
    abs_sum = float(np.sum(np.abs(system.charges)))
    net = system.net_charge
    neutral = abs(net) <= NEUTRALITY_RTOL * abs_sum
    half = system.box / 2.0
    oob = np.where(np.any(np.abs(system.positions) > half[None, :], axis=1))[0]
    pairs = []
    pos = system.positions
    for i in range(len(pos)):
        d = np.sqrt(np.sum((pos[i + 1:] - pos[i]) ** 2, axis=1))
        for j in np.where(d == 0.0)[0]:
            pairs.append((i, i + 1 + int(j)))
    warnings = []
    if not neutral:
        warnings.append(
            f"net charge {net:.1e} exceeds tolerance {NEUTRALITY_RTOL:.1e} * {abs_sum:.6g}"
        )
    if len(oob):
        warnings.append(f"positions outside the box at indices {oob.tolist()}")
    for i, j in pairs:
        warnings.append(f"coincident pair ({i}, {j})")
    return ValidationReport(
        ok=bool(neutral),
        net_charge=net,
        abs_charge_sum=abs_sum,
        out_of_box=tuple(int(i) for i in oob),
        coincident_pairs=tuple(pairs),
        warnings=tuple(warnings),
    )


def require_neutral(system: ParticleSystem):
    """Raise ValueError for non-neutral systems (hard error in Ewald paths)."""
    if not system.is_neutral:
        raise ValueError(
            f"net charge {system.net_charge:.1e} exceeds tolerance "
            f"(relative {NEUTRALITY_RTOL:.1e}); Ewald evaluation requires neutrality"
        )


@dataclass(frozen=True)
class PotentialResult:
    """Per-target potential totals with their Ewald breakdown.

    total = real + kspace + zero_mode + self_term, componentwise (the total is
    computed as exactly that sum). zero_mode is identically zero in P3 mode;
    self_term is identically zero for off-particle targets.
    """

    total: np.ndarray
    real: np.ndarray
    kspace: np.ndarray
    zero_mode: np.ndarray
    self_term: np.ndarray

    def __post_init__(self):
        for name in ("total", "real", "kspace", "zero_mode", "self_term"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def components(self) -> dict:
        return {
            "real": self.real,
            "kspace": self.kspace,
            "zero_mode": self.zero_mode,
            "self": self.self_term,
        }

    def __len__(self) -> int:
        return len(self.total)
