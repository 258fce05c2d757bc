"""Coherent-state families: fiducial vectors, the moment functional, the two
isotropy subalgebras, and the informative classification.

A fiducial vector is informative when the subalgebra fixing the state (up to
phase) and the subalgebra fixing its moment functional have equal dimension;
only then does the classical co-adjoint motion determine the quantum
evolution up to the accumulated action phase.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    ContainmentViolation,
    DegenerateOrbit,
    NormalizationError,
    RankAmbiguous,
    ValidationError,
)
from .liealg import GroupElement, LieAlgebraRep, build_spin_rep, load_generator_file

__all__ = [
    "FiducialVector",
    "MomentVector",
    "IsotropySubalgebra",
    "IsotropyReport",
    "moment_map",
    "isotropy_state",
    "isotropy_moment",
    "classify_informative",
    "coherent_state",
    "canonicalize",
    "su2_section_element",
    "preset_fiducial",
    "load_fiducial_file",
]


@dataclass(frozen=True)
class FiducialVector:
    """Normalized vector |0> in the representation space."""

    amplitudes: np.ndarray
    rep_label: str
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        amp = np.ascontiguousarray(np.asarray(self.amplitudes, dtype=complex))
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > self.tol.state_norm:
            raise NormalizationError("fiducial vector is not unit norm", norm=norm)

    @classmethod
    def normalized(cls, amplitudes, rep_label, tol=DEFAULT_TOL):
        amp = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amp / norm, rep_label, tol)


@dataclass(frozen=True)
class MomentVector:
    """Generator expectations mu_a = <0|T_a|0>, the classical phase-space point."""

    mu: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.mu, dtype=float))
        m.setflags(write=False)
        object.__setattr__(self, "mu", m)

    @property
    def norm(self):
        return float(np.linalg.norm(self.mu))


@dataclass(frozen=True)
class IsotropySubalgebra:
    """Orthonormal basis (rows) of a subalgebra in generator-coefficient space."""

    basis: np.ndarray  # (dim, n) real, orthonormal rows
    dim: int

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.basis, dtype=float))
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        if b.shape[0] != self.dim:
            raise ValidationError("basis row count disagrees with dim")
        if self.dim:
            gram = b @ b.T
            if np.max(np.abs(gram - np.eye(self.dim))) > 1e-12:
                raise ValidationError("isotropy basis is not orthonormal")

    def contains(self, vec, tol):
        """Whether vec lies in the span to within tol (Euclidean residual)."""
        vec = np.asarray(vec, dtype=float)
        if self.dim == 0:
            return np.linalg.norm(vec) <= tol
        resid = vec - self.basis.T @ (self.basis @ vec)
        return np.linalg.norm(resid) <= tol


@dataclass(frozen=True)
class IsotropyReport:
    subalg_state: IsotropySubalgebra    # fixes the state up to phase
    subalg_moment: IsotropySubalgebra   # fixes the moment functional
    containment_ok: bool
    informative: bool
    mu: MomentVector

    @property
    def dims(self):
        return (self.subalg_state.dim, self.subalg_moment.dim)


def _check_normalized(psi, tol):
    norm = np.linalg.norm(psi.amplitudes)
    if abs(norm - 1.0) > tol.norm_check:
        raise NormalizationError("state norm deviates too far from 1", norm=norm)


def moment_map(rep, psi):
    """Moment functional mu_a = <psi|T_a|psi>.

    The generators are Hermitian so each component is real in exact
    arithmetic; the imaginary residue is asserted before truncation.
    """
    _check_normalized(psi, rep.tol)
    amp = psi.amplitudes
    vals = np.einsum("i,aij,j->a", amp.conj(), rep.generators, amp)
    resid = np.max(np.abs(vals.imag))
    if resid > rep.tol.moment_imag:
        raise ValidationError("moment component has a large imaginary part",
                              residue=resid)
    return MomentVector(vals.real)


def _null_space(matrix, rank_tol, guard):
    """Null-space basis of a real matrix by SVD with a guard band.

    Raises RANK_AMBIGUOUS when any singular value sits within a factor
    ``guard`` of the cutoff, so borderline ranks are surfaced instead of
    silently rounded.
    """
    m, n = matrix.shape
    if m == 0:
        return np.eye(n), np.zeros(0)
    u, s, vh = np.linalg.svd(matrix, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return vh, s
    cut = rank_tol * smax
    lo, hi = cut / guard, cut * guard
    bad = s[(s >= lo) & (s <= hi)]
    if bad.size:
        raise RankAmbiguous(
            "singular value inside the rank guard band",
            value=float(bad[0]), cutoff=cut, guard=guard)
    rank = int(np.sum(s > cut))
    return vh[rank:], s


def isotropy_state(rep, psi, rank_tol=None):
    """Directions v whose generator v.T has psi as an eigenvector.

    Null space of v -> (I - |psi><psi|)(v_a T_a)|psi>, realified to a
    2(d-1) x n matrix over the orthogonal complement of psi.
    """
    _check_normalized(psi, rep.tol)
    tol = rep.tol
    rank_tol = tol.rank_rel if rank_tol is None else rank_tol
    amp = psi.amplitudes

    # Orthonormal basis of the complement of psi from the full SVD of psi.
    u, _, _ = np.linalg.svd(amp[:, None], full_matrices=True)
    perp = u[:, 1:]

    ims = np.einsum("ij,ajk,k->ai", perp.conj().T, rep.generators, amp)
    mat = np.concatenate([ims.real, ims.imag], axis=1).T  # 2(d-1) x n
    basis, _ = _null_space(mat, rank_tol, tol.rank_guard)
    return IsotropySubalgebra(basis=basis, dim=basis.shape[0])


def isotropy_moment(rep, psi, rank_tol=None):
    """Directions v whose co-adjoint action fixes the moment functional.

    Null space of the real n x n matrix M_ba = f_abc mu_c.
    """
    _check_normalized(psi, rep.tol)
    tol = rep.tol
    rank_tol = tol.rank_rel if rank_tol is None else rank_tol
    mu = moment_map(rep, psi).mu
    mat = np.einsum("abc,c->ab", rep.structure_constants, mu).T
    basis, _ = _null_space(mat, rank_tol, tol.rank_guard)
    return IsotropySubalgebra(basis=basis, dim=basis.shape[0])


def classify_informative(rep, psi, rank_tol=None):
    """Run both isotropy computations, check containment, compare dimensions.

    The state isotropy always lies inside the moment isotropy; a violated
    containment signals numerical inconsistency, not physics.
    """
    state = isotropy_state(rep, psi, rank_tol)
    moment = isotropy_moment(rep, psi, rank_tol)
    ok = all(moment.contains(v, rep.tol.containment) for v in state.basis)
    if not ok:
        raise ContainmentViolation(
            "state isotropy escapes the moment isotropy span",
            dims=(state.dim, moment.dim))
    return IsotropyReport(
        subalg_state=state,
        subalg_moment=moment,
        containment_ok=ok,
        informative=(state.dim == moment.dim),
        mu=moment_map(rep, psi),
    )


def coherent_state(rep, psi, g):
    """The family member g|psi> as a FiducialVector in the same rep."""
    gm = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=complex)
    out = gm @ psi.amplitudes
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > rep.tol.state_norm * 10:
        raise ValidationError("group element failed to preserve the norm", norm=norm)
    return FiducialVector(out, rep.label, rep.tol)


def su2_section_element(rep, theta, phi):
    """Section representative g(theta, phi) =
    exp(-i phi J3) exp(-i theta J2) exp(+i phi J3) for a spin rep.

    Acting on a +3-aligned fiducial it produces the coherent state whose
    moment points along (sin theta cos phi, sin theta sin phi, cos theta).
    """
    rep.require_spin("su2_section_element")
    j2, j3 = rep.generators[1], rep.generators[2]
    m = np.real(np.diag(j3))
    e2, v2 = np.linalg.eigh(j2)
    core = (v2 * np.exp(-1j * theta * e2)) @ v2.conj().T
    mat = (np.exp(-1j * phi * m)[:, None] * core) * np.exp(1j * phi * m)[None, :]
    return GroupElement(mat, rep.label, rep.tol.replace(unitarity=rep.tol.exp_unitarity))


def canonicalize(rep, psi):
    """Rotate psi so its moment vector points along the +3 axis (su(2) only).

    Returns (psi_canonical, g) with psi = g . psi_canonical; g is the section
    representative of the original moment direction, i.e. the geodesic
    rotation about mu x e3. A vanishing moment has no preferred direction
    and raises DEGENERATE_ORBIT.
    """
    rep.require_spin("canonicalize")
    mu = moment_map(rep, psi).mu
    norm = np.linalg.norm(mu)
    if norm <= rep.tol.degenerate_mu:
        raise DegenerateOrbit("moment vector vanishes; no canonical direction",
                              norm=norm)
    theta = float(np.arccos(np.clip(mu[2] / norm, -1.0, 1.0)))
    phi = 0.0 if theta == 0.0 else float(np.arctan2(mu[1], mu[0]))
    g = su2_section_element(rep, theta, phi)
    psi_c = FiducialVector(g.matrix.conj().T @ psi.amplitudes, rep.label, rep.tol)
    return psi_c, g


def preset_fiducial(rep, name):
    """Named fiducial presets used by the CLI.

    ``matsumoto``      sqrt(2/3)|1,1> + sqrt(1/3)|1,-1>, spin-1 only.
    ``highest-weight`` |j,j> in any spin rep.
    """
    if name == "matsumoto":
        if rep.spin != 1:
            raise ValidationError("the matsumoto preset lives in the spin-1 rep",
                                  spin=rep.spin)
        amp = np.array([np.sqrt(2.0 / 3.0), 0.0, np.sqrt(1.0 / 3.0)], dtype=complex)
        return FiducialVector(amp, rep.label, rep.tol)
    if name == "highest-weight":
        rep.require_spin("highest-weight preset")
        amp = np.zeros(rep.d, dtype=complex)
        amp[0] = 1.0
        return FiducialVector(amp, rep.label, rep.tol)
    raise ValidationError("unknown fiducial preset", name=name)


def load_fiducial_file(path, tol=DEFAULT_TOL):
    """Parse the fiducial-vector JSON format and return (rep, fiducial).

    Schema: {"rep": {"spin": "1"} | "generator-file path",
             "amplitudes": [[re, im], ...]}.
    The vector is renormalized on load; a warning fires when the correction
    exceeds the documented threshold.
    """
    with open(path) as fh:
        doc = json.load(fh)
    unknown = set(doc) - {"rep", "amplitudes"}
    if unknown:
        raise ValidationError("unknown keys in fiducial file",
                              keys=sorted(unknown), path=path)
    rep_spec = doc.get("rep")
    if isinstance(rep_spec, dict) and set(rep_spec) == {"spin"}:
        num, _, den = str(rep_spec["spin"]).partition("/")
        j = float(num) / float(den) if den else float(num)
        rep = build_spin_rep(j, tol=tol)
    elif isinstance(rep_spec, str):
        rep = load_generator_file(rep_spec, tol=tol)
    else:
        raise ValidationError("rep must be {'spin': ...} or a generator-file path",
                              got=rep_spec)
    arr = np.asarray(doc.get("amplitudes"), dtype=float)
    if arr.ndim != 2 or arr.shape != (rep.d, 2):
        raise ValidationError("amplitudes must be d pairs of [re, im]",
                              got=None if arr.ndim != 2 else arr.shape)
    amp = arr[:, 0] + 1j * arr[:, 1]
    norm = np.linalg.norm(amp)
    if norm == 0:
        raise NormalizationError("amplitudes are identically zero", path=path)
    if abs(norm - 1.0) > 1e-8:
        warnings.warn(f"fiducial renormalized on load (norm was {norm:.12g})",
                      stacklevel=2)
    return rep, FiducialVector(amp / norm, rep.label, tol)
