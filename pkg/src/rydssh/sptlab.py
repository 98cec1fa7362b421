"""Symmetry fractionalization of the dimerized ground states.

The symmetry group is U(1) x Z2^T: ``R_phi`` acts on a two-spin unit cell as
``exp(-i phi/2 (Z_1 + Z_2))`` and the antiunitary ``S`` as ``X_1 X_2 K``.
Both commute, so an element is a pair ``(phi, antiunitary)`` meaning
``R_phi S^a``. Local spin index 0 is spin up (empty site), 1 is spin down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.diag([1.0, -1.0])


class NotSymmetricError(ValueError):
    """The MPS is not invariant under the requested symmetry element."""


class InconsistentRepresentation(ValueError):
    """Two bond matrices that should be proportional are not."""


@dataclass(frozen=True)
class MPS:
    """Translation-invariant MPS with one ``D x D`` matrix per unit-cell state.

    ``matrices[i, j]`` is the matrix for spins ``(i, j)`` of the cell.
    """

    matrices: np.ndarray
    L: int = 2
    boundary: str = "periodic_trace"

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 4 or m.shape[:2] != (2, 2) or m.shape[2] != m.shape[3]:
            raise ValueError("matrices must have shape (2, 2, D, D)")
        object.__setattr__(self, "matrices", m)

    @property
    def D(self):
        return self.matrices.shape[2]

    def flat(self):
        """Matrices indexed by the cell state ``s = i + 2 j`` (site bits LSB first)."""
        return np.array([self.matrices[s & 1, s >> 1] for s in range(4)])

    def contract(self, L=None):
        """Dense state over ``2L`` spins; spin ``k`` is bit ``k`` of the index."""
        L = self.L if L is None else L
        flat = self.flat()
        # amplitudes as a product over cells; cell c occupies bits 2c, 2c+1
        acc = flat.copy()  # (4^c, D, D) partial products, cell 0 in the low bits
        for c in range(1, L):
            acc = np.einsum("aij,bjk->baik", acc, flat).reshape(-1, self.D, self.D)
        psi = np.einsum("aii->a", acc)
        return psi


def mps_ground_states():
    """Exact dimer MPS: ``(topological D=2, trivial D=1)``."""
    top = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            top[i, j] = np.outer(np.eye(2)[i], SX[j])
    triv = SX.reshape(2, 2, 1, 1).copy()
    return MPS(top), MPS(triv)


@dataclass(frozen=True)
class GroupElement:
    phi: float = 0.0
    antiunitary: bool = False

    @property
    def sigma(self):
        return -1 if self.antiunitary else 1

    def __mul__(self, other):
        # R_phi and S commute and S^2 = 1
        phi = np.mod(self.phi + other.phi, 2 * np.pi)
        return GroupElement(float(phi), self.antiunitary ^ other.antiunitary)

    def key(self):
        p = float(np.mod(self.phi, 2 * np.pi))
        if abs(p - 2 * np.pi) < 1e-12:
            p = 0.0
        return (round(p, 12), self.antiunitary)


def R(phi):
    return GroupElement(float(np.mod(phi, 2 * np.pi)), False)


S = GroupElement(0.0, True)
IDENTITY = GroupElement(0.0, False)


def onsite_unitary(g):
    """4x4 unitary part of ``g`` on a cell, in the ``s = i + 2 j`` ordering."""
    z = np.array([1.0, -1.0])
    zsum = np.array([z[s & 1] + z[s >> 1] for s in range(4)])
    r = np.diag(np.exp(-0.5j * g.phi * zsum))
    if not g.antiunitary:
        return r
    flip = np.zeros((4, 4))
    for s in range(4):
        flip[s ^ 3, s] = 1.0
    return r @ flip


def transform(mps, g):
    """Matrices after acting with ``g`` on every cell."""
    flat = mps.flat()
    if g.antiunitary:
        flat = flat.conj()
    new = np.einsum("st,tab->sab", onsite_unitary(g), flat)
    out = np.empty_like(mps.matrices)
    for s in range(4):
        out[s & 1, s >> 1] = new[s]
    return MPS(out, mps.L, mps.boundary)


def _normalized(flat):
    """Scale so that the transfer operator has spectral radius 1."""
    D = flat.shape[1]
    E = np.einsum("sab,scd->acbd", flat, flat.conj()).reshape(D * D, D * D)
    rad = np.max(np.abs(np.linalg.eigvals(E)))
    return flat / np.sqrt(rad)


def canonical_phase(V):
    """Rescale ``V`` to ``|det V| = 1`` with its first largest entry real positive."""
    D = V.shape[0]
    V = V / abs(np.linalg.det(V)) ** (1.0 / D)
    flat = V.ravel()
    mag = np.abs(flat)
    k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-8))[0])
    return V * (np.conj(flat[k]) / mag[k])


def extract_projective(mps, g, tol=1e-8):
    """Bond matrix ``V`` and phase ``gamma`` with ``g.A = gamma V^-1 A V``.

    ``V`` is read off the dominant eigenvector of the mixed transfer operator
    between the transformed and original matrices, and is returned in the
    :func:`canonical_phase` gauge.
    """
    A = _normalized(mps.flat())
    At = _normalized(transform(mps, g).flat())
    D = A.shape[1]
    # right fixed point of the plain transfer operator
    E = np.einsum("sab,scd->acbd", A, A.conj()).reshape(D * D, D * D)
    w, v = np.linalg.eig(E)
    lam = v[:, np.argmax(np.abs(w))].reshape(D, D)
    lam = lam / np.trace(lam)
    # mixed operator X -> sum_s At^s X A^s+
    M = np.einsum("sab,scd->acbd", At, A.conj()).reshape(D * D, D * D)
    w, v = np.linalg.eig(M)
    k = int(np.argmax(np.abs(w)))
    if abs(w[k]) < 1 - tol:
        raise NotSymmetricError(f"mixed transfer eigenvalue {abs(w[k]):.6g} < 1 for {g}")
    X = v[:, k].reshape(D, D)
    V = canonical_phase(lam @ np.linalg.inv(X))
    # gamma from one nonzero matrix
    Vi = np.linalg.inv(V)
    num = np.array([np.vdot((Vi @ A[s] @ V).ravel(), At[s].ravel()) for s in range(4)])
    den = np.array([np.vdot((Vi @ A[s] @ V).ravel(), (Vi @ A[s] @ V).ravel()) for s in range(4)])
    gamma = complex(num.sum() / den.sum())
    resid = max(np.abs(At[s] - gamma * Vi @ A[s] @ V).max() for s in range(4))
    if resid > 1e-8:
        raise NotSymmetricError(f"gauge equation residual {resid:.3g} for {g}")
    return V, gamma


class ProjectiveRep:
    """Lazily extracted ``g -> (V(g), gamma(g))`` with optional extra phases."""

    def __init__(self, mps, phases=None):
        self.mps = mps
        self._phases = phases
        self._cache = {}

    def __call__(self, g):
        key = g.key()
        if key not in self._cache:
            V, gamma = extract_projective(self.mps, g)
            if self._phases is not None:
                V = V * self._phases(g)
            self._cache[key] = (V, gamma)
        return self._cache[key]

    def V(self, g):
        return self(g)[0]

    def gamma(self, g):
        return self(g)[1]

    def rephased(self, phases):
        """Same representation with ``V(g)`` multiplied by ``phases(g)``."""
        return ProjectiveRep(self.mps, phases)

    def canonical(self):
        return ProjectiveRep(self.mps)


def twisted_product(V1, g1, V2):
    """Bond action of ``g1`` followed by ``V2``: ``V1 K^a V2 K^a``."""
    return V1 @ (V2.conj() if g1.antiunitary else V2)


def cocycle(rep, g1, g2, tol=1e-10):
    """``chi`` in ``V(g1) ^{g1}V(g2) = chi V(g1 g2)``."""
    lhs = twisted_product(rep.V(g1), g1, rep.V(g2))
    rhs = rep.V(g1 * g2)
    c = np.vdot(rhs.ravel(), lhs.ravel()) / np.vdot(rhs.ravel(), rhs.ravel())
    if np.abs(lhs - c * rhs).max() > tol * max(1.0, np.abs(lhs).max()):
        raise InconsistentRepresentation(f"V({g1})V({g2}) is not proportional to V({g1 * g2})")
    return complex(c)


def kramers_index(rep):
    """Gauge-invariant sign ``V(T) V(T)^* = +-1`` for the antiunitary ``T = R_pi S``."""
    T = R(np.pi) * S
    V = rep.V(T)
    P = V @ V.conj()
    return float(np.real(P[0, 0] / abs(P[0, 0])))


def classify(mps_or_rep, phi_samples, k_max=8, threshold=0.1):
    """``"topological"`` when ``chi(S, R_phi)`` cannot be trivialized.

    A trivialization ``f(R_phi) = exp(i k phi)`` would make
    ``chi(S, R_phi) exp(2 i k phi) = 1`` for every sample. The bond matrices
    are first returned to the canonical gauge, so extra phases attached to
    the representation do not matter.
    """
    phi_samples = np.asarray(phi_samples, float)
    if phi_samples.size < 3:
        raise ValueError("need at least three sample angles")
    rep = mps_or_rep.canonical() if isinstance(mps_or_rep, ProjectiveRep) else ProjectiveRep(mps_or_rep)
    chis = np.array([cocycle(rep, S, R(p)) / cocycle(rep, R(p), S) for p in phi_samples])
    trivializable = any(
        np.all(np.abs(chis * np.exp(2j * k * phi_samples) - 1) <= threshold) for k in range(-k_max, k_max + 1)
    )
    tag = "trivial" if trivializable else "topological"
    index = kramers_index(rep)
    if (index < 0) != (tag == "topological"):
        raise InconsistentRepresentation(f"cocycle search says {tag} but the Kramers index is {index:+.0f}")
    return tag


def gauge_rotate(mps, phi, spins=(0, 1)):
    """MPS of ``prod exp(-i phi/2 Z_k)|psi>`` for the chosen spins of each cell."""
    z = np.array([1.0, -1.0])
    m = mps.matrices.copy()
    for i in range(2):
        for j in range(2):
            zz = (z[i] if 0 in spins else 0.0) + (z[j] if 1 in spins else 0.0)
            m[i, j] = m[i, j] * np.exp(-0.5j * phi * zz)
    return MPS(m, mps.L, mps.boundary)


def perturbative_oracle(J, J_prime, J_pp, statistics="boson"):
    """Second-order edge shifts ``(E2_empty, E2_filled)`` of a three-site edge."""
    if J == 0:
        raise ZeroDivisionError("the unperturbed dimer coupling J must be nonzero")
    s = {"boson": 1.0, "fermion": -1.0}[statistics]
    return -((J_prime + J_pp) ** 2) / (2 * J), -((J_prime + s * J_pp) ** 2) / (2 * J)


def three_site_shifts(J, J_prime, J_pp, statistics="boson"):
    """Exact counterparts of :func:`perturbative_oracle` from 8x8 diagonalization.

    Site 1 is the edge, sites 2-3 the dimer with coupling ``J``; ``J_prime``
    joins 1-2 and ``J_pp`` joins 1-3. Shifts are measured from ``-|J|``.
    """
    from .geometry import CouplingMatrix
    from .mbcore import FockBasis, HamiltonianSpec, build_boson_hamiltonian

    v = np.zeros((3, 3))
    v[0, 1] = v[1, 0] = J_prime
    v[1, 2] = v[2, 1] = J
    v[0, 2] = v[2, 0] = J_pp
    shifts = []
    for n in (1, 2):
        basis = FockBasis(3, n)
        op = build_boson_hamiltonian(HamiltonianSpec(CouplingMatrix(v)), basis, fermionic=statistics == "fermion")
        e = scipy.linalg.eigvalsh(op.to_dense())[0]
        shifts.append(float(e + abs(J)))
    return tuple(shifts)
