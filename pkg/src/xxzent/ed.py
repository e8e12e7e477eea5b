"""Exact diagonalization of small periodic XXZ rings.

Basis states are bit patterns with bit ``l-1`` set when site ``l`` is down.
Two-site density matrices use the ordering |uu>, |ud>, |du>, |dd> with the
first label on site ``l``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import linalg as spla

log = logging.getLogger(__name__)

MAX_SITES = 20
DENSE_LIMIT = 1000
DEGENERACY_GAP = 1e-8
KRYLOV_TOL = 1e-10
KRYLOV_MAXITER = 5000

SIGMA_Y2 = np.fliplr(np.diag([-1.0, 1.0, 1.0, -1.0]))  # sigma_y (x) sigma_y
SIGMA_X2 = np.fliplr(np.eye(4))  # global spin flip on two sites


@dataclass(frozen=True)
class SectorBasis:
    n_sites: int
    sz_twice: int | None  # None for the full 2^N space
    states: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, patterns: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.states, patterns)


def _check_size(n_sites: int) -> None:
    if not 2 <= n_sites <= MAX_SITES:
        raise ValueError(f"exact diagonalization supports 2 <= N <= {MAX_SITES}, got {n_sites}")


def sector_basis(n_sites: int, sz_twice: int) -> SectorBasis:
    _check_size(n_sites)
    if (n_sites - sz_twice) % 2 or abs(sz_twice) > n_sites:
        raise ValueError(f"2Sz={sz_twice} impossible for N={n_sites}")
    n_down = (n_sites - sz_twice) // 2
    allstates = np.arange(1 << n_sites, dtype=np.int64)
    states = allstates[np.bitwise_count(allstates) == n_down]
    return SectorBasis(n_sites, sz_twice, states)


def full_basis(n_sites: int) -> SectorBasis:
    _check_size(n_sites)
    return SectorBasis(n_sites, None, np.arange(1 << n_sites, dtype=np.int64))


def _bit(states: np.ndarray, site: int) -> np.ndarray:
    return (states >> site) & 1


def build_xxz_hamiltonian(n_sites: int, delta: float, sector: SectorBasis | None = None) -> sp.csr_matrix:
    """Sparse matrix of ``sum_l [sx sx + sy sy + delta sz sz]`` on a ring.

    N = 2 keeps both bonds (1,2) and (2,1) of the periodic sum.
    """
    _check_size(n_sites)
    basis = full_basis(n_sites) if sector is None else sector
    if basis.n_sites != n_sites:
        raise ValueError("sector built for a different chain length")
    states = basis.states
    diag = np.zeros(basis.dim)
    rows, cols = [], []
    for l in range(n_sites):
        m = (l + 1) % n_sites
        bl, bm = _bit(states, l), _bit(states, m)
        diag += delta * np.where(bl == bm, 1.0, -1.0)
        src = np.nonzero(bl != bm)[0]
        flipped = states[src] ^ ((1 << l) | (1 << m))
        rows.append(basis.index(flipped))
        cols.append(src)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    off = sp.coo_matrix((np.full(len(rows), 2.0), (rows, cols)), shape=(basis.dim, basis.dim))
    return (off + sp.diags(diag)).tocsr()


def tl_block(delta: float) -> np.ndarray:
    """2x2 Temperley-Lieb generator on the (|ud>, |du>) subspace."""
    q = _real_q(delta)
    return np.array([[-1.0 / q, 1.0], [1.0, -q]])


def phi_q(delta: float) -> np.ndarray:
    q = _real_q(delta)
    return np.array([1.0, -q]) / np.sqrt(1.0 + q * q)


def _real_q(delta: float) -> float:
    if delta < 1.0:
        raise ValueError(f"real deformation parameter needs delta >= 1, got {delta}")
    return delta + np.sqrt((delta - 1.0) * (delta + 1.0))


def build_tl_hamiltonian(n_sites: int, delta: float) -> sp.csr_matrix:
    """``N delta + 2 sum_j T_{j,j+1}`` on the full 2^N space."""
    _check_size(n_sites)
    t = tl_block(delta)
    dim = 1 << n_sites
    states = np.arange(dim, dtype=np.int64)
    h = sp.identity(dim, format="csr") * (n_sites * delta)
    for j in range(n_sites):
        k = (j + 1) % n_sites
        bj, bk = _bit(states, j), _bit(states, k)
        ud = np.nonzero((bj == 0) & (bk == 1))[0]
        du = np.nonzero((bj == 1) & (bk == 0))[0]
        swap = (1 << j) | (1 << k)
        vals = np.concatenate([np.full(len(ud), t[0, 0]), np.full(len(du), t[1, 1]),
                               np.full(len(ud), t[1, 0]), np.full(len(du), t[0, 1])])
        rows = np.concatenate([ud, du, ud ^ swap, du ^ swap])
        cols = np.concatenate([ud, du, ud, du])
        h = h + 2.0 * sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return h.tocsr()


def sz_total(sector: SectorBasis) -> sp.dia_matrix:
    n_down = np.bitwise_count(sector.states)
    return sp.diags(0.5 * (sector.n_sites - 2.0 * n_down))


# ---------------------------------------------------------------------------
# ground states

@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: np.ndarray = field(repr=False)
    basis: SectorBasis = field(repr=False)
    degeneracy_flag: bool = False
    manifold: np.ndarray = field(repr=False, default=None)  # columns span the ground level
    residual: float = 0.0

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    def states(self, mixed: bool = True) -> np.ndarray:
        if mixed and self.manifold is not None:
            return self.manifold
        return self.vector[:, None]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


def _lowest(h: sp.csr_matrix, k: int = 4):
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        w, v = np.linalg.eigh(h.toarray())
        return w[:k], v[:, :k]
    v0 = np.random.default_rng(12345).standard_normal(dim)
    w, v = spla.eigsh(h, k=min(k, dim - 1), which="SA", tol=KRYLOV_TOL,
                      maxiter=KRYLOV_MAXITER, v0=v0)
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    resid = np.linalg.norm(h @ v[:, 0] - w[0] * v[:, 0])
    if resid > 1e-9:
        w, v = spla.eigsh(h, k=min(k, dim - 1), which="SA", tol=0, maxiter=KRYLOV_MAXITER, v0=v0)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    return w, v


def ground_state_ed(n_sites: int, delta: float) -> GroundStateResult:
    """Lowest eigenpair in the 2Sz = 0 sector (even N) or 2Sz = +1 (odd N).

    For odd N the 2Sz = -1 sector is the spin-flipped copy, so the ground
    level is always degenerate.
    """
    _check_size(n_sites)
    sector = sector_basis(n_sites, n_sites % 2)
    h = build_xxz_hamiltonian(n_sites, delta, sector)
    w, v = _lowest(h)
    e0 = float(w[0])
    within = np.nonzero(w - e0 < DEGENERACY_GAP)[0]
    degenerate = bool(n_sites % 2) or len(within) > 1
    vec = _fix_phase(v[:, 0])
    manifold = None
    if len(within) > 1:
        manifold = np.column_stack([_fix_phase(v[:, i]) for i in within])
    resid = float(np.linalg.norm(h @ vec - e0 * vec))
    if resid > 1e-9:
        log.warning("ED residual %.2e for N=%d delta=%g", resid, n_sites, delta)
    return GroundStateResult(e0, vec, sector, degenerate, manifold, resid)


# ---------------------------------------------------------------------------
# reduced density matrices and concurrence

@dataclass(frozen=True)
class TwoQubitDensityMatrix:
    entries: np.ndarray

    @property
    def u_plus(self) -> float:
        return float(self.entries[0, 0].real)

    @property
    def w1(self) -> float:
        return float(self.entries[1, 1].real)

    @property
    def w2(self) -> float:
        return float(self.entries[2, 2].real)

    @property
    def u_minus(self) -> float:
        return float(self.entries[3, 3].real)

    @property
    def z(self) -> complex:
        return complex(self.entries[1, 2])

    def to_csv(self) -> str:
        return "\n".join(",".join(format(x.real, ".12g") if abs(x.imag) < 1e-15
                                  else format(complex(x), ".12g") for x in row)
                         for row in self.entries) + "\n"


def _full_vector(vec: np.ndarray, basis: SectorBasis) -> np.ndarray:
    full = np.zeros(1 << basis.n_sites, dtype=vec.dtype)
    full[basis.states] = vec
    return full


def rdm_from_vector(vec: np.ndarray, basis: SectorBasis, site: int) -> np.ndarray:
    n = basis.n_sites
    l, m = site - 1, site % n
    psi = _full_vector(vec, basis).reshape((2,) * n)
    # C-order reshape: axis 0 is the most significant bit (site N)
    axes = [n - 1 - l, n - 1 - m]
    rest = [ax for ax in range(n) if ax not in axes]
    mat = np.transpose(psi, axes + rest).reshape(4, -1)
    return mat @ mat.conj().T


def two_site_rdm(g: GroundStateResult, site: int = 1, mixed: bool = True) -> TwoQubitDensityMatrix:
    """Reduced density matrix of sites ``site`` and ``site + 1`` (mod N).

    A degenerate ground level is represented by the equal mixture over its
    computed basis when ``mixed`` is set; otherwise the phase-fixed lowest
    eigenvector is used. For odd N the mixture also covers the spin-flipped
    copy in the 2Sz = -1 sector.
    """
    n = g.n_sites
    if not 1 <= site <= n:
        raise ValueError(f"site must lie in 1..{n}, got {site}")
    vecs = g.states(mixed)
    rho = sum(rdm_from_vector(vecs[:, i], g.basis, site) for i in range(vecs.shape[1]))
    rho = rho / vecs.shape[1]
    if mixed and n % 2:
        rho = 0.5 * (rho + SIGMA_X2 @ rho @ SIGMA_X2)
    return TwoQubitDensityMatrix(rho)


def product_state_rdm(spins_down: int, n_sites: int, site: int = 1) -> TwoQubitDensityMatrix:
    basis = full_basis(n_sites)
    vec = np.zeros(basis.dim)
    vec[spins_down] = 1.0
    return TwoQubitDensityMatrix(rdm_from_vector(vec, basis, site))


def wootters_concurrence(rho: TwoQubitDensityMatrix | np.ndarray) -> float:
    r = rho.entries if isinstance(rho, TwoQubitDensityMatrix) else np.asarray(rho)
    w, v = np.linalg.eigh(r)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    tilde = SIGMA_Y2 @ r.conj() @ SIGMA_Y2
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(sqrt_rho @ tilde @ sqrt_rho), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))


def x_state_concurrence(rho: TwoQubitDensityMatrix) -> float:
    """``2 max(0, |z| - sqrt(u+ u-))`` for the block pattern of an Sz eigenstate."""
    return 2.0 * max(0.0, abs(rho.z) - float(np.sqrt(max(rho.u_plus * rho.u_minus, 0.0))))


def gzz_direct(g: GroundStateResult, mixed: bool = True) -> float:
    """``<sz_l sz_{l+1}>`` averaged over all bonds of the ring."""
    n = g.n_sites
    states = g.basis.states
    corr = np.zeros(len(states))
    for l in range(n):
        corr += np.where(_bit(states, l) == _bit(states, (l + 1) % n), 1.0, -1.0)
    corr /= n
    vecs = g.states(mixed)
    return float(np.mean([np.dot(vecs[:, i] ** 2, corr) for i in range(vecs.shape[1])]))
