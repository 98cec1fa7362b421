"""Hard-core boson (and Jordan-Wigner fermion) many-body operators.

Bit ``k`` of a basis index (least significant first) is site ``k + 1``; a
set bit is a particle. In spin language ``Z = 1 - 2n`` and ``X = b + b^+``,
so the empty site is spin up.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb

import numpy as np
import scipy.sparse as sp

from .geometry import CouplingMatrix, nearest_neighbor_chain

MAX_SITES = 24
MAX_MATERIALIZE = 2**14


class ResourceLimitError(MemoryError):
    """A request exceeds the documented memory ceiling."""


class ContractViolation(ValueError):
    """An operation was called outside its allowed domain."""


def popcount(x):
    x = np.asarray(x, dtype=np.uint64)
    # bytewise table lookup, vectorized
    table = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
    out = np.zeros(x.shape, dtype=np.int64)
    for shift in range(0, 64, 8):
        out += table[((x >> np.uint64(shift)) & np.uint64(0xFF)).astype(np.intp)]
    return out


class FockBasis:
    """Full ``2^N`` basis or a fixed particle-number sector.

    Sector states are listed in increasing integer order, which is the
    combinatorial number system order, so ``rank`` is an O(N) formula.
    """

    def __init__(self, n_sites, sector=None):
        if n_sites < 1:
            raise ValueError("need at least one site")
        if n_sites > MAX_SITES:
            raise ResourceLimitError(f"n_sites={n_sites} exceeds the ceiling of {MAX_SITES}")
        if sector is not None and not 0 <= sector <= n_sites:
            raise ValueError(f"sector {sector} outside [0, {n_sites}]")
        self.n_sites = int(n_sites)
        self.sector = None if sector is None else int(sector)
        if self.sector is None:
            self.dimension = 2**self.n_sites
            self._states = None
        else:
            self.dimension = comb(self.n_sites, self.sector)
            self._states = self._enumerate()
        # binom[p, r] = C(p, r) for the ranking formula
        p = np.arange(self.n_sites + 1)
        self._binom = np.array([[comb(int(a), r) for r in range(self.n_sites + 2)] for a in p], dtype=np.int64)

    def _enumerate(self):
        n, k = self.n_sites, self.sector
        if k == 0:
            return np.zeros(1, dtype=np.int64)
        # Gosper's hack, vectorized by building successive combinations
        out = np.empty(self.dimension, dtype=np.int64)
        s = (1 << k) - 1
        for idx in range(self.dimension):
            out[idx] = s
            c = s & -s
            r = s + c
            s = (((r ^ s) >> 2) // c) | r
        return out

    @property
    def is_full(self):
        return self.sector is None

    @property
    def states(self):
        if self._states is None:
            return np.arange(self.dimension, dtype=np.int64)
        return self._states

    def unrank(self, k):
        k = np.asarray(k, dtype=np.int64)
        return k if self._states is None else self._states[k]

    def rank(self, s):
        s = np.asarray(s, dtype=np.int64)
        if self._states is None:
            return s
        out = np.zeros(s.shape, dtype=np.int64)
        count = np.zeros(s.shape, dtype=np.int64)
        for pos in range(self.n_sites):
            bit = (s >> pos) & 1
            count += bit
            out += np.where(bit == 1, self._binom[pos, np.minimum(count, self.n_sites + 1)], 0)
        return out

    def occupations(self):
        """``(dimension, n_sites)`` 0/1 table of site occupations."""
        s = self.states
        return ((s[:, None] >> np.arange(self.n_sites)[None, :]) & 1).astype(np.int8)

    def particle_numbers(self):
        if self.sector is not None:
            return np.full(self.dimension, self.sector, dtype=np.int64)
        return popcount(self.states)

    def __eq__(self, other):
        return isinstance(other, FockBasis) and (self.n_sites, self.sector) == (other.n_sites, other.sector)

    def __hash__(self):
        return hash((self.n_sites, self.sector))

    def __repr__(self):
        return f"FockBasis(n_sites={self.n_sites}, sector={self.sector}, dimension={self.dimension})"


def build_basis(n_sites, sector=None):
    return FockBasis(n_sites, sector)


@dataclass(frozen=True)
class StateVector:
    basis: FockBasis
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (self.basis.dimension,):
            raise ValueError(f"expected {self.basis.dimension} amplitudes, got shape {a.shape}")
        object.__setattr__(self, "amps", a)

    @classmethod
    def basis_state(cls, basis, bits):
        """State with particles on the 0-based ``bits`` (iterable) or integer bitmask."""
        if not isinstance(bits, (int, np.integer)):
            bits = sum(1 << int(b) for b in bits)
        a = np.zeros(basis.dimension, dtype=complex)
        idx = int(basis.rank(np.array([bits]))[0])
        if basis.unrank(idx) != bits:
            raise ValueError(f"bitstring {bits:b} is not in {basis}")
        a[idx] = 1.0
        return cls(basis, a)

    @classmethod
    def vacuum(cls, basis):
        return cls.basis_state(basis, 0)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amps))

    def normalized(self):
        return StateVector(self.basis, self.amps / self.norm)

    def vdot(self, other):
        return complex(np.vdot(self.amps, other.amps))

    def to_full(self):
        """Embed a sector state into the full ``2^N`` basis."""
        if self.basis.is_full:
            return self
        full = FockBasis(self.basis.n_sites)
        a = np.zeros(full.dimension, dtype=complex)
        a[self.basis.states] = self.amps
        return StateVector(full, a)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Declarative Hamiltonian, all entries in MHz.

    ``-sum_{i<j} J_ij (b_i^+ b_j + h.c.) + (drive/2) sum_i X_i - detuning sum_i n_i
    + sum_{i<j} V_ij n_i n_j + sum_i mu_i n_i + sum_{i<j} K_ij Z_i Z_j + constant``.

    ``zz`` holds the ``K_ij`` couplings; they are expanded into ``V``, ``mu``
    and the constant at build time.
    """

    hopping: CouplingMatrix
    drive: float = 0.0
    detuning: float = 0.0
    density_density: np.ndarray | None = None
    fields: np.ndarray | None = None
    constant: float = 0.0
    zz: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not isinstance(self.hopping, CouplingMatrix):
            object.__setattr__(self, "hopping", CouplingMatrix(self.hopping))
        if self.drive < 0:
            raise ValueError("drive must be >= 0")
        n = self.hopping.n
        for name in ("density_density", "zz"):
            v = getattr(self, name)
            if v is not None:
                v = np.array(v, dtype=float)
                if v.shape != (n, n) or not np.array_equal(v, v.T):
                    raise ValueError(f"{name} must be a symmetric {n}x{n} table")
                object.__setattr__(self, name, v)
        if self.fields is not None:
            f = np.array(self.fields, dtype=float)
            if f.shape != (n,):
                raise ValueError(f"fields must have length {n}")
            object.__setattr__(self, "fields", f)

    @property
    def n_sites(self):
        return self.hopping.n

    def replace(self, **kw):
        return replace(self, **kw)

    def add_zz(self, i, j, K):
        zz = np.zeros((self.n_sites,) * 2) if self.zz is None else self.zz.copy()
        zz[i, j] += K
        zz[j, i] += K
        return replace(self, zz=zz)

    def expanded(self):
        """``(V, mu, constant)`` with the ZZ couplings folded in."""
        n = self.n_sites
        V = np.zeros((n, n)) if self.density_density is None else self.density_density.copy()
        mu = np.zeros(n) if self.fields is None else self.fields.copy()
        const = float(self.constant)
        if self.zz is not None:
            # K Z_i Z_j = K - 2K n_i - 2K n_j + 4K n_i n_j
            iu, ju = np.triu_indices(n, 1)
            K = self.zz[iu, ju]
            V[iu, ju] += 4.0 * K
            V[ju, iu] += 4.0 * K
            np.add.at(mu, iu, -2.0 * K)
            np.add.at(mu, ju, -2.0 * K)
            const += float(K.sum())
        return V, mu, const

    def subchain(self, keep):
        """Spec restricted to the sites flagged in ``keep`` (removed sites carry nothing)."""
        keep = np.asarray(keep, dtype=bool)
        idx = np.flatnonzero(keep)
        sub = lambda a: None if a is None else a[np.ix_(idx, idx)]
        return replace(
            self,
            hopping=self.hopping.subchain(keep),
            density_density=sub(self.density_density),
            zz=sub(self.zz),
            fields=None if self.fields is None else self.fields[idx],
        )


class ManyBodyOperator:
    """Linear operator ``offdiag + diag`` on a Fock basis.

    The off-diagonal part is stored as CSR and applied row-wise; nothing
    larger than the nonzero pattern is ever formed.
    """

    def __init__(self, basis, offdiag=None, diag=None, hermitian=True):
        self.basis = basis
        dim = basis.dimension
        self.offdiag = None if offdiag is None or offdiag.nnz == 0 else offdiag.tocsr()
        self.diag = None if diag is None or not np.any(diag) else np.asarray(diag)
        self.hermitian = hermitian
        if self.offdiag is not None and self.offdiag.shape != (dim, dim):
            raise ValueError("off-diagonal block has the wrong shape")

    @property
    def dim(self):
        return self.basis.dimension

    @property
    def dtype(self):
        kinds = [np.float64]
        if self.offdiag is not None:
            kinds.append(self.offdiag.dtype)
        if self.diag is not None:
            kinds.append(self.diag.dtype)
        return np.result_type(*kinds)

    def matvec(self, v):
        out = self.offdiag @ v if self.offdiag is not None else np.zeros_like(v, dtype=np.result_type(v, self.dtype))
        if self.diag is not None:
            out = out + (self.diag[:, None] * v if v.ndim == 2 else self.diag * v)
        return out

    def __call__(self, psi):
        if psi.basis != self.basis:
            raise ContractViolation(f"state lives on {psi.basis}, operator on {self.basis}")
        return StateVector(self.basis, self.matvec(psi.amps))

    def norm_bound(self):
        """Upper bound on the spectral norm (max absolute row sum)."""
        rows = np.zeros(self.dim)
        if self.offdiag is not None:
            rows += np.asarray(abs(self.offdiag).sum(axis=1)).ravel()
        if self.diag is not None:
            rows += np.abs(self.diag)
        return float(rows.max(initial=0.0))

    def scaled(self, c):
        return ManyBodyOperator(
            self.basis,
            None if self.offdiag is None else self.offdiag * c,
            None if self.diag is None else self.diag * c,
            self.hermitian and np.isreal(c),
        )

    def __add__(self, other):
        if other.basis != self.basis:
            raise ContractViolation("operators act on different bases")
        off = [m for m in (self.offdiag, other.offdiag) if m is not None]
        dg = [d for d in (self.diag, other.diag) if d is not None]
        return ManyBodyOperator(
            self.basis,
            sum(off[1:], off[0]) if off else None,
            sum(dg[1:], dg[0]) if dg else None,
            self.hermitian and other.hermitian,
        )

    def to_sparse(self):
        if self.dim > MAX_MATERIALIZE:
            raise ResourceLimitError(f"dimension {self.dim} exceeds the materialization ceiling {MAX_MATERIALIZE}")
        m = sp.csr_matrix((self.dim, self.dim), dtype=self.dtype)
        if self.offdiag is not None:
            m = m + self.offdiag
        if self.diag is not None:
            m = m + sp.diags(self.diag)
        return m.tocsr()

    def to_dense(self):
        return self.to_sparse().toarray()


def _hopping_block(J, basis, fermionic=False):
    """Sparse ``-sum_{i<j} J_ij (b_i^+ b_j + h.c.)`` with optional JW signs."""
    values = J.values if isinstance(J, CouplingMatrix) else np.asarray(J)
    n = basis.n_sites
    states = basis.states
    rows, cols, data = [], [], []
    iu, ju = np.nonzero(np.triu(values, 1))
    for i, j in zip(iu, ju):
        bi = (states >> i) & 1
        bj = (states >> j) & 1
        src = np.flatnonzero(bi != bj)
        if src.size == 0:
            continue
        tgt_states = states[src] ^ ((1 << int(i)) | (1 << int(j)))
        amp = np.full(src.size, -values[i, j])
        if fermionic:
            between = ((1 << int(j)) - 1) ^ ((1 << int(i + 1)) - 1)
            amp = amp * (1 - 2 * (popcount(states[src] & between) & 1))
        rows.append(basis.rank(tgt_states))
        cols.append(src)
        data.append(amp)
    if not rows:
        return None
    return sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dimension, basis.dimension),
    )


def _diagonal(spec, basis):
    V, mu, const = spec.expanded()
    occ = basis.occupations().astype(float)
    d = occ @ (mu - spec.detuning) + const
    iu, ju = np.nonzero(np.triu(V, 1))
    for i, j in zip(iu, ju):
        d += V[i, j] * occ[:, i] * occ[:, j]
    return d


def drive_operator(basis):
    """``(1/2) sum_i X_i`` on the full basis."""
    if not basis.is_full:
        raise ContractViolation("the drive changes particle number and needs the full basis")
    states = basis.states
    n = basis.n_sites
    rows = np.concatenate([states ^ (1 << k) for k in range(n)])
    cols = np.tile(states, n)
    return ManyBodyOperator(basis, sp.csr_matrix((np.full(rows.size, 0.5), (rows, cols)), shape=(basis.dimension,) * 2))


def number_operator(basis):
    return ManyBodyOperator(basis, None, basis.particle_numbers().astype(float))


def build_boson_hamiltonian(spec, basis=None, fermionic=False):
    basis = basis or FockBasis(spec.n_sites)
    if basis.n_sites != spec.n_sites:
        raise ContractViolation(f"spec has {spec.n_sites} sites, basis {basis.n_sites}")
    if spec.drive != 0 and not basis.is_full:
        raise ContractViolation("a nonzero drive does not conserve particle number; use the full basis")
    op = ManyBodyOperator(basis, _hopping_block(spec.hopping, basis, fermionic), _diagonal(spec, basis))
    if spec.drive != 0:
        op = op + drive_operator(basis).scaled(spec.drive)
    return op


def build_fermion_hamiltonian(J, basis):
    """``-sum_{i<j} J_ij (c_i^+ c_j + h.c.)`` in the bitstring basis."""
    return ManyBodyOperator(basis, _hopping_block(J, basis, fermionic=True), None)


def build_xxz_hamiltonian(J, J_prime, delta, n_sites):
    """Spec for ``-(J'/2) sum (XX + YY + delta ZZ)`` on links (2i-1, 2i) and
    ``-(J/2) sum (...)`` on links (2i, 2i+1).

    ``XX + YY = 2 (b^+ b + h.c.)``, so the hopping entries are ``J'`` and ``J``
    and the ZZ couplings are ``-delta J'/2`` and ``-delta J/2``.
    """
    if n_sites % 2:
        raise ValueError("n_sites must be even")
    hop = nearest_neighbor_chain(n_sites, J, J_prime, "topological")
    spec = HamiltonianSpec(hop)
    if delta != 0:
        zz = -0.5 * delta * hop.values
        spec = spec.replace(zz=zz)
    return spec


def apply_symmetry_SB(psi):
    """Particle-hole conjugation composed with complex conjugation."""
    if not psi.basis.is_full:
        raise ContractViolation("the particle-hole map needs the full basis")
    # complement of index s is 2^N - 1 - s
    return StateVector(psi.basis, np.conj(psi.amps[::-1]))


def z_rotation_phases(basis, sites, phi):
    """Diagonal of ``prod_k exp(-i phi/2 Z_k)`` over ``sites``."""
    occ = basis.occupations()[:, list(sites)]
    z = (1 - 2 * occ).sum(axis=1)
    return np.exp(-0.5j * phi * z)


def apply_local_z_rotation(op, sites, phi):
    """``U op U^+`` with ``U = prod_{k in sites} exp(-i phi/2 Z_k)``."""
    u = z_rotation_phases(op.basis, sites, phi)
    off = None
    if op.offdiag is not None:
        coo = op.offdiag.tocoo()
        data = coo.data * u[coo.row] * np.conj(u[coo.col])
        if np.all(np.abs(data.imag) <= 1e-15 * np.abs(data).max(initial=1.0)):
            data = data.real
        off = sp.csr_matrix((data, (coo.row, coo.col)), shape=coo.shape)
    return ManyBodyOperator(op.basis, off, op.diag, op.hermitian)


def is_hermitian(op, n_pairs=100, seed=0, rtol=1e-12):
    rng = np.random.default_rng(seed)
    scale = max(op.norm_bound(), 1.0)
    for _ in range(n_pairs):
        a = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        b = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        if abs(np.vdot(a, op.matvec(b)) - np.conj(np.vdot(b, op.matvec(a)))) > rtol * scale:
            return False
    return True


def symmetry_residual_SB(op, n_vectors=8, seed=0):
    """Relative ``max ||S H S^-1 v - H v||`` over random unit vectors."""
    if not op.basis.is_full:
        raise ContractViolation("the particle-hole map needs the full basis")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_vectors):
        v = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        v /= np.linalg.norm(v)
        # S is an involution, so S^-1 = S
        lhs = np.conj(op.matvec(np.conj(v[::-1]))[::-1])
        worst = max(worst, float(np.linalg.norm(lhs - op.matvec(v))))
    return worst / max(op.norm_bound(), 1.0)


def product_state(parts):
    """Tensor product of full-basis states; ``parts[0]`` takes the lowest bits."""
    amps = np.ones(1, dtype=complex)
    n = 0
    for psi in parts:
        if not psi.basis.is_full:
            raise ContractViolation("product states are assembled on full bases")
        amps = np.kron(psi.amps, amps)
        n += psi.basis.n_sites
    return StateVector(FockBasis(n), amps)
