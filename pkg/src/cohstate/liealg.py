"""Unitary irreps of compact Lie algebras: construction, validation, group
elements, and Haar-measure quadrature.

Conventions (every downstream sign derives from these):

* generators ``T_a`` are Hermitian, ``[T_a, T_b] = i f_abc T_c``;
* group elements are ``exp(-i theta_a T_a)``;
* spin representations use the generator order ``(J_1, J_2, J_3)`` on the
  weight basis ``m = j, j-1, ..., -j``, so ``J_3`` is diagonal.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    ClosureFailure,
    HermiticityFailure,
    ParseError,
    ProjectionResidual,
    ValidationError,
)

__all__ = [
    "LieAlgebraRep",
    "GroupElement",
    "HaarQuadrature",
    "build_spin_rep",
    "validate_algebra",
    "exp_element",
    "conjugate_generator",
    "haar_quadrature",
    "exactness_orders",
    "load_generator_file",
]


def _maxabs(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LieAlgebraRep:
    """A unitary irrep: n Hermitian d x d generators plus verified structure
    constants f with [T_a, T_b] = i f_abc T_c.

    ``spin`` is set (to j) only for representations built by
    :func:`build_spin_rep`; operations that rely on the Euler-angle
    parametrization (quadrature, sections) require it.
    """

    n: int
    d: int
    generators: np.ndarray          # (n, d, d) complex
    structure_constants: np.ndarray  # (n, n, n) real
    label: str
    spin: float | None = None
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        gens = _readonly(np.asarray(self.generators, dtype=complex))
        f = _readonly(np.asarray(self.structure_constants, dtype=float))
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "structure_constants", f)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "d", int(self.d))
        if gens.shape != (self.n, self.d, self.d):
            raise ValidationError(
                "generator array has wrong shape",
                expected=(self.n, self.d, self.d), got=gens.shape)
        if f.shape != (self.n, self.n, self.n):
            raise ValidationError("structure constants have wrong shape", got=f.shape)

        herm = _maxabs(gens - np.conj(np.swapaxes(gens, 1, 2)))
        if herm > self.tol.herm:
            raise HermiticityFailure("generator is not Hermitian", defect=herm)
        if _maxabs(f + np.swapaxes(f, 0, 1)) > 0.0:
            raise ValidationError("structure constants are not exactly antisymmetric")

        comm = np.einsum("aij,bjk->abik", gens, gens)
        comm = comm - np.swapaxes(comm, 0, 1)
        closure = _maxabs(comm - 1j * np.einsum("abc,cij->abij", f, gens))
        if closure > self.tol.closure_rep:
            raise ClosureFailure("commutators leave the generator span", defect=closure)

        jac = (np.einsum("bcd,ade->abce", f, f)
               + np.einsum("cad,bde->abce", f, f)
               + np.einsum("abd,cde->abce", f, f))
        jdef = _maxabs(jac)
        if jdef > self.tol.jacobi:
            raise ValidationError("Jacobi identity fails", defect=jdef)

        # Gram matrix of the trace inner product; generators need not be
        # orthonormal, projections solve against it.
        gram = np.einsum("aij,bji->ab", np.conj(np.swapaxes(gens, 1, 2)), gens).real
        object.__setattr__(self, "_gram", _readonly(gram))

    def project_to_algebra(self, matrix, residual_tol=None, err=ProjectionResidual):
        """Coefficients w with ``matrix ~= w_a T_a`` via the trace inner
        product; raises ``err`` when the residual exceeds ``residual_tol``.

        Returns (w, residual). Coefficients are real parts of the Gram solve;
        the residual measures everything the span misses, including any
        anti-Hermitian component.
        """
        rhs = np.einsum("aij,ji->a", np.conj(np.swapaxes(self.generators, 1, 2)), matrix)
        w = np.linalg.solve(self._gram, rhs)
        w = w.real
        resid = _maxabs(matrix - np.tensordot(w, self.generators, axes=1))
        if residual_tol is not None and resid > residual_tol:
            raise err("matrix does not lie in the generator span", residual=resid)
        return w, resid

    def hamiltonian(self, coeffs):
        """The Hermitian matrix h_a T_a for a real coefficient vector."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.n,):
            raise ValidationError("coefficient vector has wrong length",
                                  expected=self.n, got=coeffs.shape)
        return np.tensordot(coeffs, self.generators, axes=1)

    def require_spin(self, what):
        if self.spin is None:
            raise ValidationError(
                f"{what} requires a spin representation built by build_spin_rep",
                label=self.label)
        return self.spin


@dataclass(frozen=True)
class GroupElement:
    """A unitary matrix representing a group element in a given rep."""

    matrix: np.ndarray
    rep_label: str
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = _readonly(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", m)
        d = m.shape[0]
        defect = _maxabs(m.conj().T @ m - np.eye(d))
        if defect > self.tol.unitarity:
            raise ValidationError("matrix is not unitary", defect=defect)

    def inverse(self):
        return GroupElement(self.matrix.conj().T, self.rep_label, self.tol)

    def __matmul__(self, other):
        if isinstance(other, GroupElement):
            return GroupElement(self.matrix @ other.matrix, self.rep_label, self.tol)
        return self.matrix @ other


@dataclass(frozen=True)
class HaarQuadrature:
    """Quadrature rule for the normalized Haar measure on SU(2).

    ``nodes`` stacks the group-element matrices as a (G, d, d) array;
    ``weights`` are positive and sum to one.
    """

    nodes: np.ndarray     # (G, d, d) complex
    weights: np.ndarray   # (G,) positive, sums to 1
    orders: tuple         # (n_beta, n_alpha, n_gamma)
    rep_label: str
    spin: float

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(np.asarray(self.nodes, dtype=complex)))
        w = _readonly(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "weights", w)
        if np.any(w <= 0):
            raise ValidationError("Haar weights must be positive")
        if abs(w.sum() - 1.0) > DEFAULT_TOL.weight_sum:
            raise ValidationError("Haar weights do not sum to 1", total=w.sum())

    @property
    def size(self):
        return self.weights.shape[0]

    def meets_exactness(self):
        """True when the orders hit the band limit of |g><g| matrix elements."""
        nb, na, ng = self.orders
        nb_min, na_min, ng_min = exactness_orders(self.spin)
        return nb >= nb_min and na >= na_min and ng >= ng_min


def exactness_orders(j):
    """Minimal (n_beta, n_alpha, n_gamma) for exact integration of all
    matrix elements of |g><g| in the spin-j rep."""
    return int(round(2 * j + 1)), int(round(4 * j + 1)), int(round(4 * j + 1))


def build_spin_rep(j, tol=DEFAULT_TOL):
    """Spin-j irrep of su(2) on the basis m = j, j-1, ..., -j.

    Parameters
    ----------
    j : half-integer >= 1/2

    Returns
    -------
    LieAlgebraRep with generators (J_1, J_2, J_3) and structure constants
    equal to the Levi-Civita symbol.
    """
    twoj = 2 * j
    if abs(twoj - round(twoj)) > 1e-12 or j <= 0:
        raise ValidationError("spin must be a positive half-integer", j=j)
    j = round(twoj) / 2.0
    d = int(round(twoj)) + 1

    m = j - np.arange(d)                      # m = j, j-1, ..., -j
    jp = np.zeros((d, d), dtype=complex)      # raising operator J_+
    for col in range(1, d):
        mm = m[col]
        jp[col - 1, col] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    jm = jp.conj().T
    j1 = (jp + jm) / 2
    j2 = (jp - jm) / 2.0j
    j3 = np.diag(m.astype(complex))

    eps = np.zeros((3, 3, 3))
    for a, b, c in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[a, b, c] = 1.0
        eps[b, a, c] = -1.0

    label = f"su2-spin-{int(j) if j == int(j) else f'{int(twoj)}/2'}"
    return LieAlgebraRep(n=3, d=d, generators=np.array([j1, j2, j3]),
                         structure_constants=eps, label=label, spin=j, tol=tol)


def validate_algebra(generators, label="user-algebra", tol=DEFAULT_TOL):
    """Validate user-supplied Hermitian generators and extract structure
    constants by least-squares projection of [T_a, T_b] / i onto the span.

    Raises
    ------
    HermiticityFailure, ClosureFailure
    """
    gens = np.asarray(generators, dtype=complex)
    if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
        raise ValidationError("generators must be a list of square matrices",
                              got=gens.shape)
    n, d = gens.shape[0], gens.shape[1]

    herm = _maxabs(gens - np.conj(np.swapaxes(gens, 1, 2)))
    if herm > tol.herm:
        raise HermiticityFailure("generator is not Hermitian", defect=herm)

    gram = np.einsum("aij,bji->ab", np.conj(np.swapaxes(gens, 1, 2)), gens).real
    gram_inv_rhs = np.linalg.inv(gram)

    f = np.zeros((n, n, n))
    worst = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            comm = (gens[a] @ gens[b] - gens[b] @ gens[a]) / 1j
            rhs = np.einsum("cij,ji->c", np.conj(np.swapaxes(gens, 1, 2)), comm).real
            w = gram_inv_rhs @ rhs
            resid = _maxabs(comm - np.tensordot(w, gens, axes=1))
            worst = max(worst, resid)
            f[a, b, :] = w
            f[b, a, :] = -w
    if worst > tol.closure_validate:
        raise ClosureFailure("generators do not span a closed algebra",
                             residual=worst)

    return LieAlgebraRep(n=n, d=d, generators=gens, structure_constants=f,
                         label=label, spin=None,
                         tol=tol.replace(closure_rep=max(tol.closure_rep, worst * 1.1)))


def exp_element(rep, theta, tol=None):
    """Group element exp(-i theta_a T_a) via spectral decomposition.

    The argument is Hermitian, so the eigendecomposition is exact up to
    roundoff and the result is unitary to machine precision.
    """
    tol = tol or rep.tol
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValidationError("theta must be finite")
    h = rep.hamiltonian(theta)
    evals, vecs = np.linalg.eigh(h)
    mat = (vecs * np.exp(-1j * evals)) @ vecs.conj().T
    return GroupElement(mat, rep.label, tol.replace(unitarity=tol.exp_unitarity))


def conjugate_generator(rep, g, v):
    """Coefficients w with g^{-1} (v_a T_a) g = w_b T_b.

    The conjugated matrix must stay in the generator span; a residual above
    tolerance signals a corrupted group element.
    """
    v = np.asarray(v, dtype=float)
    gm = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=complex)
    x = gm.conj().T @ rep.hamiltonian(v) @ gm
    w, _ = rep.project_to_algebra(x, residual_tol=rep.tol.conj_residual)
    return w


def _euler_elements(rep, alpha, beta, gamma):
    """Stack of exp(-i a J3) exp(-i b J2) exp(-i g J3) over a flat angle grid."""
    j1, j2, j3 = rep.generators
    m = np.real(np.diag(j3))
    e2, v2 = np.linalg.eigh(j2)
    # exp(-i beta J2) for all beta at once
    core = np.einsum("ik,bk,jk->bij", v2, np.exp(-1j * np.outer(beta, e2)), v2.conj())
    left = np.exp(-1j * np.outer(alpha, m))     # diagonal of exp(-i alpha J3)
    right = np.exp(-1j * np.outer(gamma, m))
    return left[:, :, None] * core * right[:, None, :]


def haar_quadrature(rep, n_beta, n_alpha, n_gamma, tol=None):
    """Quadrature rule for the normalized Haar measure on SU(2) in the
    Euler parametrization g = exp(-i a J3) exp(-i b J2) exp(-i g J3).

    Gauss-Legendre nodes in cos(beta) (exact for the band-limited beta
    dependence), uniform periodic grids in alpha over [0, 2pi) and gamma
    over [0, 4pi).  The rule integrates every matrix element of |g><g|
    exactly once n_beta >= 2j+1 and n_alpha, n_gamma >= 4j+1.
    """
    j = rep.require_spin("haar_quadrature")
    tol = tol or rep.tol
    if min(n_beta, n_alpha, n_gamma) < 1:
        raise ValidationError("quadrature orders must be >= 1",
                              orders=(n_beta, n_alpha, n_gamma))

    x, wx = np.polynomial.legendre.leggauss(n_beta)
    beta = np.arccos(x)
    alpha = 2 * np.pi * np.arange(n_alpha) / n_alpha
    gamma = 4 * np.pi * np.arange(n_gamma) / n_gamma

    bb, aa, gg = np.meshgrid(beta, alpha, gamma, indexing="ij")
    ww = np.broadcast_to(wx[:, None, None], bb.shape)
    nodes = _euler_elements(rep, aa.ravel(), bb.ravel(), gg.ravel())
    weights = (ww.ravel() / (2.0 * n_alpha * n_gamma))

    return HaarQuadrature(nodes=nodes, weights=weights,
                          orders=(n_beta, n_alpha, n_gamma),
                          rep_label=rep.label, spin=j)


def load_generator_file(path, tol=DEFAULT_TOL):
    """Parse the JSON generator-file format and validate the algebra.

    Schema: {"label": str, "dimension": int, "generators": [matrix, ...]}
    where each matrix is a list of rows and each entry is [re, im].
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError("invalid JSON", path=path,
                             line=exc.lineno, column=exc.colno) from exc
    required = {"label", "dimension", "generators"}
    unknown = set(doc) - required
    if unknown:
        raise ValidationError("unknown keys in generator file",
                              keys=sorted(unknown), path=path)
    missing = required - set(doc)
    if missing:
        raise ValidationError("generator file is missing keys",
                              keys=sorted(missing), path=path)
    d = doc["dimension"]
    mats = []
    for k, rows in enumerate(doc["generators"]):
        arr = np.asarray(rows, dtype=float)
        if arr.shape != (d, d, 2):
            raise ValidationError(
                "generator entries must be d x d arrays of [re, im] pairs",
                generator=k, got=arr.shape)
        mats.append(arr[..., 0] + 1j * arr[..., 1])
    return validate_algebra(np.array(mats), label=doc["label"], tol=tol)
