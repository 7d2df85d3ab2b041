"""Few-photon core states, passive linear optics, and graph encodings.

States are sparse maps from Fock multi-indices to amplitudes, capped at a
small total photon number.  A mode unitary V acts by the stellar
substitution z -> Vz on the state's polynomial; the permanent formula is
available as an independent implementation of the same action.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .graphs import Graph
from .linalg import UnitaryMatrix

# mode unitaries are plain unitary matrices on C^n
ModeUnitary = UnitaryMatrix

PHOTON_CAP = 4


class BosonicError(ValueError):
    pass


class MultiIndex(tuple):
    """Fock occupation numbers (k_1, ..., k_n)."""

    def __new__(cls, ks):
        ks = tuple(int(k) for k in ks)
        if any(k < 0 for k in ks):
            raise BosonicError(f"negative occupation in {ks}")
        return super().__new__(cls, ks)

    @property
    def r(self) -> int:
        return sum(self)

    def factorial(self) -> int:
        out = 1
        for k in self:
            out *= math.factorial(k)
        return out


def sector_basis(n: int, r: int) -> list:
    """All multi-indices on n modes with total exactly r."""
    if n == 1:
        return [MultiIndex((r,))]
    out = []
    for first in range(r + 1):
        for rest in sector_basis(n - 1, r - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    return out


def sector_dimension(n: int, r: int) -> int:
    return math.comb(n + r - 1, r)


@dataclass(frozen=True)
class CoreState:
    """Sparse normalized state over Fock indices with total photons <= r_max."""

    n_modes: int
    r_max: int
    amplitudes: dict

    def __post_init__(self):
        if self.r_max > PHOTON_CAP:
            raise BosonicError(f"photon cap is {PHOTON_CAP}, got r_max={self.r_max}")
        clean = {}
        total = 0.0
        for k, amp in self.amplitudes.items():
            k = MultiIndex(k)
            if len(k) != self.n_modes:
                raise BosonicError(f"index {k} has wrong mode count")
            if k.r > self.r_max:
                raise BosonicError(f"index {k} exceeds photon cap {self.r_max}")
            amp = complex(amp)
            if amp != 0:
                clean[k] = amp
                total += abs(amp) ** 2
        if abs(total - 1.0) > 1e-9:
            raise BosonicError(f"core state norm^2 = {total}, expected 1")
        object.__setattr__(self, "amplitudes", clean)

    # -- polynomial (stellar) converters -------------------------------
    def to_polynomial(self) -> dict:
        """Coefficients of P(z): psi_k / sqrt(k!)."""
        return {k: amp / math.sqrt(k.factorial()) for k, amp in self.amplitudes.items()}

    @staticmethod
    def from_polynomial(n_modes: int, r_max: int, poly: dict) -> "CoreState":
        amps = {
            MultiIndex(k): c * math.sqrt(MultiIndex(k).factorial())
            for k, c in poly.items()
        }
        return CoreState(n_modes, r_max, amps)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({
            "n_modes": self.n_modes,
            "r_max": self.r_max,
            "amplitudes": [
                {"k": list(k), "amp": [amp.real, amp.imag]}
                for k, amp in sorted(self.amplitudes.items())
            ],
        })

    @staticmethod
    def from_json(text: str) -> "CoreState":
        obj = json.loads(text)
        amps = {
            MultiIndex(e["k"]): complex(e["amp"][0], e["amp"][1])
            for e in obj["amplitudes"]
        }
        return CoreState(obj["n_modes"], obj["r_max"], amps)

    def dense(self, basis: list) -> np.ndarray:
        return np.array([self.amplitudes.get(k, 0j) for k in basis])


def core_overlap(c1: CoreState, c2: CoreState) -> complex:
    """<c1|c2>."""
    if c1.n_modes != c2.n_modes:
        raise BosonicError("mode count mismatch")
    keys = set(c1.amplitudes) & set(c2.amplitudes)
    return complex(sum(c1.amplitudes[k].conjugate() * c2.amplitudes[k] for k in keys))


# ----------------------------------------------------------------------
# Graph encoding
# ----------------------------------------------------------------------

def encode_graph_bosonic(g: Graph) -> CoreState:
    """P_G(z) = 1/sqrt(12n) sum z_i^3 + 1/sqrt(2|E|) sum_{ij in E} z_i z_j.

    Amplitudes: 1/sqrt(2n) on each |3_i> and 1/sqrt(2|E|) on |1_i 1_j>;
    normalization is exact.  Graphs with no edges are rejected.
    """
    n = g.n
    e = len(g.edges)
    if e < 1:
        raise BosonicError("graph encoding needs at least one edge")
    amps = {}
    for i in range(n):
        k = [0] * n
        k[i] = 3
        amps[MultiIndex(k)] = 1.0 / math.sqrt(2 * n)
    for u, v in g.edges:
        k = [0] * n
        k[u] = k[v] = 1
        amps[MultiIndex(k)] = 1.0 / math.sqrt(2 * e)
    return CoreState(n, 3, amps)


# ----------------------------------------------------------------------
# Linear-optical action
# ----------------------------------------------------------------------

def _poly_mul(p: dict, q: dict, n: int) -> dict:
    out = {}
    for ka, ca in p.items():
        for kb, cb in q.items():
            k = tuple(a + b for a, b in zip(ka, kb))
            out[k] = out.get(k, 0j) + ca * cb
    return out


def _substitute_monomial(k: MultiIndex, v: np.ndarray) -> dict:
    """Expand prod_i (sum_j V_ij z_j)^{k_i} into monomial coefficients."""
    n = len(k)
    poly = {tuple([0] * n): 1.0 + 0j}
    for i, ki in enumerate(k):
        row = {}
        for j in range(n):
            if v[i, j] != 0:
                key = tuple(1 if t == j else 0 for t in range(n))
                row[key] = complex(v[i, j])
        for _ in range(ki):
            poly = _poly_mul(poly, row, n)
    return poly


def permanent(m: np.ndarray) -> complex:
    r = m.shape[0]
    if r == 0:
        return 1.0 + 0j
    total = 0j
    for perm in permutations(range(r)):
        prod = 1.0 + 0j
        for i, j in enumerate(perm):
            prod *= m[i, j]
        total += prod
    return total


def _repeat_matrix(v: np.ndarray, k: MultiIndex, j: MultiIndex) -> np.ndarray:
    rows = [i for i, c in enumerate(k) for _ in range(c)]
    cols = [i for i, c in enumerate(j) for _ in range(c)]
    return v[np.ix_(rows, cols)]


def transition_amplitude(v: np.ndarray, k: MultiIndex, j: MultiIndex) -> complex:
    """<k|R(V)|j> = Per(V^T[k|j]) / sqrt(k! j!) in the substitution
    convention (the transpose is pinned by the equivalence with z -> Vz)."""
    if k.r != j.r:
        return 0j
    sub = _repeat_matrix(v.T, k, j)
    return permanent(sub) / math.sqrt(k.factorial() * j.factorial())


def apply_linear_optical(v: ModeUnitary, c: CoreState,
                         method: str = "substitution",
                         adjoint: bool = False) -> CoreState:
    """R(V)|c>: the stellar substitution z -> Vz (default implementation)
    or the equivalent permanent formula.  ``adjoint`` applies V^dagger."""
    if v.dim != c.n_modes:
        raise BosonicError("mode unitary dimension mismatch")
    mat = v.matrix.conj().T if adjoint else v.matrix
    if method == "substitution":
        out_poly = {}
        for k, coeff in c.to_polynomial().items():
            for mono, w in _substitute_monomial(k, mat).items():
                out_poly[mono] = out_poly.get(mono, 0j) + coeff * w
        return CoreState.from_polynomial(c.n_modes, c.r_max, out_poly)
    if method == "permanent":
        by_sector = {}
        for j, amp in c.amplitudes.items():
            by_sector.setdefault(j.r, {})[j] = amp
        out = {}
        for r, sector in by_sector.items():
            for k in sector_basis(c.n_modes, r):
                val = sum(
                    transition_amplitude(mat, k, j) * amp
                    for j, amp in sector.items()
                )
                if abs(val) > 1e-14:
                    out[k] = out.get(k, 0j) + val
        return CoreState(c.n_modes, c.r_max, out)
    raise BosonicError(f"unknown method {method!r}")


def cubic_overlap(v: ModeUnitary) -> complex:
    """(1/n) sum_{i,k} V_{ik}^3."""
    return complex(np.sum(v.matrix**3) / v.dim)


@dataclass(frozen=True)
class PermutationProjection:
    perm: Optional[tuple]   # row i maps to column perm[i]
    phases: Optional[np.ndarray]
    residual: float
    collision: bool


def nearest_permutation_phase(v: ModeUnitary) -> PermutationProjection:
    """Project V onto the nearest permutation-times-phase-diagonal via the
    row-wise argmax assignment T_{i k_i} = V_{i k_i}/|V_{i k_i}|."""
    m = v.matrix
    n = v.dim
    cols = [int(np.argmax(np.abs(m[i]))) for i in range(n)]
    if len(set(cols)) != n:
        return PermutationProjection(None, None, float("inf"), True)
    t = np.zeros_like(m)
    phases = np.zeros(n, dtype=complex)
    for i, ki in enumerate(cols):
        ph = m[i, ki] / abs(m[i, ki])
        t[i, ki] = ph
        phases[ki] = ph
    residual = float(np.linalg.norm(m - t))
    return PermutationProjection(tuple(cols), phases, residual, False)


def permutation_mode_unitary(perm, n: int) -> ModeUnitary:
    """Mode unitary sending z_i -> z_{perm[i]} under substitution."""
    m = np.zeros((n, n), dtype=complex)
    for i in range(n):
        m[i, perm[i]] = 1.0
    return ModeUnitary(n, m)


def perturbed_permutation_unitary(rng, n: int, scale: float) -> ModeUnitary:
    """A permutation-times-phase unitary moved by a small random rotation.

    Phases are cube roots of unity so the cubic overlap of the unperturbed
    matrix is exactly 1; ``scale`` bounds the rotation angle.  Useful for
    sampling inside the delta-regime of nearest_permutation_phase.
    """
    p = rng.permutation(n)
    d = np.exp(2j * np.pi * rng.integers(0, 3, n) / 3)
    base = permutation_mode_unitary(tuple(p), n).matrix @ np.diag(d)
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (h + h.conj().T) / 2
    w, vec = np.linalg.eigh(h)
    eps = rng.uniform(0, scale)
    rot = vec @ np.diag(np.exp(1j * eps * w)) @ vec.conj().T
    return ModeUnitary(n, rot @ base)


def haar_mode_unitary(n: int, seed) -> ModeUnitary:
    """Exact Haar sample: complex Ginibre QR with the phase correction."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return ModeUnitary(n, q)


# ----------------------------------------------------------------------
# SZK samplers and TV estimation
# ----------------------------------------------------------------------

def truncated_basis(n: int, r_max: int) -> list:
    out = []
    for r in range(r_max + 1):
        out.extend(sector_basis(n, r))
    return out


def default_sigma(b: float, n: int, r: int) -> float:
    """sigma = b / n^{r/2} with unit constant."""
    return b / n ** (r / 2)


def szk_sampler(c: CoreState, sigma: float, seed,
                basis: Optional[list] = None) -> tuple:
    """One sample |c_U> + eta with U Haar and eta ~ N_C(0, sigma^2 I).

    Returns (noisy dense vector, basis, U).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = haar_mode_unitary(c.n_modes, rng)
    moved = apply_linear_optical(u, c)
    basis = basis or truncated_basis(c.n_modes, c.r_max)
    vec = moved.dense(basis)
    d = len(basis)
    eta = sigma / math.sqrt(2) * (rng.normal(size=d) + 1j * rng.normal(size=d))
    return vec + eta, basis, u


def gaussian_tv_upper(u: np.ndarray, v: np.ndarray, sigma: float) -> float:
    """Pinsker bound on the TV distance between N_C(u, sigma^2 I) and
    N_C(v, sigma^2 I): TV <= ||u - v|| / (2 sigma)."""
    return min(1.0, float(np.linalg.norm(u - v)) / (2 * sigma))


def orbit_distance(z: np.ndarray, basis: list, c: CoreState,
                   warm_starts, iters: int = 25,
                   good_enough: float = 0.0) -> float:
    """Distance from a vector to the linear-optical orbit of c.

    Refines max_U |<z|R(U)|c>| by Riemannian ascent from each warm-start
    unitary and converts the best overlap to a distance.  Stops early if
    the distance already falls below ``good_enough``.
    """
    n = c.n_modes
    z_amps = {k: a for k, a in zip(basis, z) if a != 0}
    z_norm_sq = float(np.vdot(z, z).real)
    # overlap needed to certify dist <= good_enough
    stop_at = (z_norm_sq + 1.0 - good_enough**2) / 2.0
    best = 0.0
    for u0 in warm_starts:
        _, _, val = _ascend(u0, c.amplitudes, z_amps, n, iters, stop_at=stop_at)
        best = max(best, val)
        if best >= stop_at:
            break
    return math.sqrt(max(z_norm_sq + 1.0 - 2.0 * best, 0.0))


def estimate_tv_gap(c1: CoreState, c2: CoreState, sigma: float, n_samples: int,
                    seed: int, n_reference: int = 150, n_warm: int = 3,
                    b: Optional[float] = None) -> tuple:
    """Lower-bound the total variation distance between the two samplers.

    Uses the region statistic Z = { z : dist(z, orbit of c1) <= b/2 },
    where b is the distance between the two noiseless orbits: the TV
    distance is at least P_1[Z] - P_2[Z].  Orbit distances are computed by
    warm-started ascent from the closest of n_reference cached orbit
    points.  Returns (tv_lower, diagnostics).
    """
    if c1.n_modes != c2.n_modes:
        raise BosonicError("mode count mismatch")
    rng = np.random.default_rng(seed)
    basis = truncated_basis(c1.n_modes, max(c1.r_max, c2.r_max))
    refs = []
    for _ in range(n_reference):
        u = haar_mode_unitary(c1.n_modes, rng)
        refs.append((u.matrix, apply_linear_optical(u, c1).dense(basis)))
    if b is None:
        _, best_abs, _ = optimize_overlap(c1, c2, restarts=20, seed=rng.integers(1 << 31))
        b = math.sqrt(max(2.0 - 2.0 * best_abs, 0.0))
    hits = [0, 0]
    for side, c in enumerate((c1, c2)):
        for _ in range(n_samples):
            z, _, _ = szk_sampler(c, sigma, rng, basis)
            align = [abs(np.vdot(vec, z)) for _, vec in refs]
            order = np.argsort(align)[::-1][:n_warm]
            starts = [refs[i][0] for i in order]
            if orbit_distance(z, basis, c1, starts, good_enough=b / 2) <= b / 2:
                hits[side] += 1
    p1, p2 = hits[0] / n_samples, hits[1] / n_samples
    tv_lower = p1 - p2
    half_width = 2 * math.sqrt(0.25 / n_samples)  # ~95% binomial CI each side
    diag = {"p1": p1, "p2": p2, "b": b, "sigma": sigma,
            "ci_half_width": 2 * half_width, "n_samples": n_samples}
    return tv_lower, diag


# ----------------------------------------------------------------------
# Overlap optimization over U(n)
# ----------------------------------------------------------------------

def _overlap_and_gradient(v: np.ndarray, amps1: dict, amps2: dict, n: int):
    """f = <target|R(V)|source> and its holomorphic gradient dF/dV_ab, using
    dPer(V[k|j])/dV_ab = k_a j_b Per(V[k - e_a | j - e_b]).  The target
    amplitudes need not be normalized."""
    f = 0j
    grad = np.zeros((n, n), dtype=complex)
    vt = v.T
    for k, a2 in amps2.items():
        for j, a1 in amps1.items():
            if k.r != j.r:
                continue
            w = a2.conjugate() * a1 / math.sqrt(k.factorial() * j.factorial())
            f += w * permanent(_repeat_matrix(vt, k, j))
            for a in range(n):
                if k[a] == 0:
                    continue
                ka = MultiIndex(tuple(c - (1 if t == a else 0) for t, c in enumerate(k)))
                for bcol in range(n):
                    if j[bcol] == 0:
                        continue
                    jb = MultiIndex(tuple(c - (1 if t == bcol else 0) for t, c in enumerate(j)))
                    minor = permanent(_repeat_matrix(vt, ka, jb))
                    # d/dV_{b,a} since the permanent acts on V^T
                    grad[bcol, a] += w * k[a] * j[bcol] * minor
    return f, grad


def _qr_retract(m: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(m)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _ascend(v: np.ndarray, amps1: dict, amps2: dict, n: int, iters: int,
            stop_at: float = np.inf):
    """Riemannian ascent of |<target|R(V)|source>| from a fixed start.

    Stops early once the value reaches ``stop_at``.
    """
    step = 0.5
    f, grad = _overlap_and_gradient(v, amps1, amps2, n)
    val = abs(f)
    for _ in range(iters):
        if val >= stop_at:
            break
        # Euclidean ascent direction for |f|^2, projected to the tangent
        # space of U(n), then QR retraction
        egrad = 2 * f * grad.conjugate()
        rgrad = egrad - v @ egrad.conj().T @ v
        if np.linalg.norm(rgrad) < 1e-12:
            break
        improved = False
        while step > 1e-10:
            v_new = _qr_retract(v + step * rgrad)
            f_new, grad_new = _overlap_and_gradient(v_new, amps1, amps2, n)
            if abs(f_new) > val + 1e-14:
                v, f, grad, val = v_new, f_new, grad_new, abs(f_new)
                improved = True
                step *= 1.3
                break
            step /= 2
        if not improved:
            break
    return v, f, val


def optimize_overlap(c1: CoreState, c2: CoreState, restarts: int = 50,
                     iters: int = 150, seed: int = 0,
                     trace_file: Optional[str] = None) -> tuple:
    """Random-restart Riemannian ascent of |<c2|R(V)|c1>| over U(n).

    Returns (best ModeUnitary, best |overlap|, Re overlap at the best V).
    Non-convergence is reflected in the returned value, never raised.
    """
    if c1.n_modes != c2.n_modes:
        raise BosonicError("mode count mismatch")
    n = c1.n_modes
    rng = np.random.default_rng(seed)
    best_val = -1.0
    best_v = np.eye(n, dtype=complex)
    best_f = 0j
    rows = []
    for restart in range(restarts):
        v0 = np.eye(n, dtype=complex) if restart == 0 else haar_mode_unitary(n, rng).matrix
        v, f, val = _ascend(v0, c1.amplitudes, c2.amplitudes, n, iters)
        rows.append((restart, val))
        if val > best_val:
            best_val, best_v, best_f = val, v, f
    if trace_file is not None:
        with open(trace_file, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["restart", "best_value"])
            writer.writerows(rows)
    return ModeUnitary(n, best_v), float(best_val), float(best_f.real)
