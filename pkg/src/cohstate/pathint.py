"""Resolution of identity, Berry connection, and discrete path integrals.

The overcompleteness of a coherent-state family is certified by a Haar
quadrature: the group average B = sum_g w_g |g psi><g psi| must be a
multiple of the identity for an irrep. The same quadrature then converts
short-time propagator slices into a discrete path integral: inserting the
resolution between slices reduces the matrix element of the time-ordered
evolution to a chain of kernel matrix products over the quadrature nodes.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    CanonicalizationRequired,
    QuadratureUnderresolved,
    QuadratureWarning,
    ResourceLimit,
    ValidationError,
)
from .family import canonicalize, moment_map

__all__ = [
    "IdentityCheckResult",
    "BerryProfile",
    "DiracVerdict",
    "ConvergenceRecord",
    "identity_resolution",
    "berry_connection",
    "dirac_check",
    "discrete_propagator",
]


@dataclass(frozen=True)
class IdentityCheckResult:
    """Group average B of |g psi><g psi| against its identity fit.

    ``constant`` is the best-fit c = tr(B)/d (exactly 1/d for unit
    fiducials and normalized weights); ``deviation`` is the max-abs
    entry of B - c I.
    """

    operator: np.ndarray
    constant: float
    deviation: float
    dimension: int
    quad_orders: tuple
    exact: bool

    def as_dict(self):
        return {
            "operator": [[[float(z.real), float(z.imag)] for z in row]
                         for row in self.operator],
            "constant": self.constant,
            "deviation": self.deviation,
            "dimension": self.dimension,
            "quad_orders": list(self.quad_orders),
            "exact": self.exact,
        }


@dataclass(frozen=True)
class BerryProfile:
    """Sampled azimuthal connection A_phi(theta) and its fit against
    coefficient * (cos theta - 1)."""

    theta_grid: np.ndarray
    a_phi: np.ndarray
    coefficient: float
    fit_residual: float
    mu3: float


@dataclass(frozen=True)
class DiracVerdict:
    """Quantization verdict for the Berry connection coefficient.

    The gauge string of the section is invisible only when the
    coefficient is an integer or half integer; ``admissible`` is that
    verdict at tolerance ``gap <= dirac_gap``.
    """

    coefficient: float
    nearest_admissible: float
    gap: float
    admissible: bool
    profile: BerryProfile

    def as_dict(self):
        return {
            "coefficient": self.coefficient,
            "nearest_admissible": self.nearest_admissible,
            "gap": self.gap,
            "admissible": self.admissible,
            "fit_residual": self.profile.fit_residual,
        }


@dataclass(frozen=True)
class ConvergenceRecord:
    """Discrete path integral amplitudes over a slice-count sweep."""

    slice_counts: np.ndarray
    amplitudes: np.ndarray
    exact_amplitude: complex
    errors: np.ndarray
    measured_order: float
    kernel_mode: str


def _family_states(quad, amplitudes):
    return np.einsum("gij,j->gi", quad.nodes, amplitudes)


def identity_resolution(rep, fiducial, quad):
    """Average |g psi><g psi| over the quadrature and fit c I.

    For a unit fiducial in an irrep the average is exactly I/d once the
    quadrature integrates products of two matrix elements exactly. Below
    the exactness contract the check still runs, carrying an advisory
    warning, and the deviation quantifies the quadrature defect.
    """
    exact = quad.meets_exactness()
    if not exact:
        warnings.warn(
            "quadrature below the exactness contract; identity deviation "
            f"is not certified (orders {quad.orders})", QuadratureWarning)
    states = _family_states(quad, fiducial.amplitudes)
    op = np.einsum("g,gi,gj->ij", quad.weights, states, states.conj())
    constant = float(np.trace(op).real / rep.d)
    deviation = float(np.max(np.abs(op - constant * np.eye(rep.d))))
    return IdentityCheckResult(operator=op, constant=constant,
                               deviation=deviation, dimension=rep.d,
                               quad_orders=quad.orders, exact=exact)


def berry_connection(rep, fiducial, theta_grid=None, fd_step=None):
    """Azimuthal Berry connection A_phi(theta) of the section family.

    A_phi = i <0| g^-1 d_phi g |0> at phi = 0, with d_phi by central
    finite difference; analytically it equals mu3 (cos theta - 1) on the
    north chart, so the samples are fit against (cos theta - 1) and the
    residual is part of the contract. The fiducial must already be
    canonicalized.
    """
    from .dynamics import SectionChart, _section_states

    rep.require_spin("berry_connection")
    tol = rep.tol
    mu = moment_map(rep, fiducial).mu
    if mu[0] ** 2 + mu[1] ** 2 > tol.canonical_xy:
        raise CanonicalizationRequired(
            "fiducial moment must point along the 3 axis before sampling "
            "the connection", mu=[float(x) for x in mu])

    if theta_grid is None:
        theta_grid = np.linspace(0.1, 2.5, 25)
    theta_grid = np.asarray(theta_grid, dtype=float)
    if np.any(theta_grid <= tol.chart_delta) or \
            np.any(theta_grid >= np.pi - tol.chart_delta):
        raise ValidationError("theta grid must stay inside the chart",
                              delta=tol.chart_delta)
    h = fd_step if fd_step is not None else tol.fd_step
    chart = SectionChart()
    amp = fiducial.amplitudes

    u0 = _section_states(rep, theta_grid, np.zeros_like(theta_grid), chart, amp)
    up = _section_states(rep, theta_grid, np.full_like(theta_grid, h), chart, amp)
    um = _section_states(rep, theta_grid, np.full_like(theta_grid, -h), chart, amp)
    vals = 1j * np.einsum("ti,ti->t", u0.conj(), (up - um) / (2 * h))
    if np.max(np.abs(vals.imag)) > tol.berry_imag:
        raise ValidationError("connection sample has a non-real residue",
                              residue=float(np.max(np.abs(vals.imag))))
    vals = vals.real

    basis = np.cos(theta_grid) - 1.0
    coeff = float(basis @ vals / (basis @ basis))
    residual = float(np.max(np.abs(vals - coeff * basis)))
    if residual > tol.berry_fit:
        raise ValidationError("connection samples do not follow the "
                              "(cos theta - 1) profile", residual=residual)
    return BerryProfile(theta_grid=theta_grid, a_phi=vals, coefficient=coeff,
                        fit_residual=residual, mu3=float(mu[2]))


def dirac_check(rep, fiducial, theta_grid=None):
    """Quantization verdict for the fiducial's Berry connection coefficient.

    The fiducial is canonicalized internally (so the coefficient is the
    orbit invariant ||mu||), the connection coefficient extracted from
    the (cos theta - 1) fit, and compared with the nearest half integer.
    A gap above ``dirac_gap`` means the gauge string is visible: no
    consistent phase assignment covers the whole orbit sphere.
    """
    psi_c, _ = canonicalize(rep, fiducial)
    profile = berry_connection(rep, psi_c, theta_grid=theta_grid)
    coeff = profile.coefficient
    nearest = round(2.0 * coeff) / 2.0
    gap = abs(coeff - nearest)
    return DiracVerdict(coefficient=coeff, nearest_admissible=nearest,
                        gap=gap, admissible=bool(gap <= rep.tol.dirac_gap),
                        profile=profile)


def _slice_kernel(rep, bras, kets, hmat, eps, mode, tol):
    """Kernel block K_ij between bra and ket coherent-state stacks.

    ``exact``       K_ij = <b_i| exp(-i H eps) |k_j>
    ``first-order`` K_ij = <b_i|k_j> exp(-i eps <b_i|H|k_j> / <b_i|k_j>),
                    zeroed where the overlap falls below ``overlap_cut``.
    """
    if mode == "exact":
        evals, vecs = np.linalg.eigh(hmat)
        u = (vecs * np.exp(-1j * evals * eps)) @ vecs.conj().T
        return bras.conj() @ u @ kets.T
    overlap = bras.conj() @ kets.T
    hexp = bras.conj() @ hmat @ kets.T
    mask = np.abs(overlap) >= tol.overlap_cut
    safe = np.where(mask, overlap, 1.0)
    return np.where(mask, overlap * np.exp(-1j * eps * hexp / safe), 0.0)


def _reference_amplitude(rep, schedule, psi_i, psi_f):
    """<psi_f| U(T) |psi_i> with exact per-segment spectral exponentials."""
    cur = psi_i
    for k in range(schedule.coefficients.shape[0]):
        span = float(schedule.breakpoints[k + 1] - schedule.breakpoints[k])
        evals, vecs = np.linalg.eigh(rep.hamiltonian(schedule.coefficients[k]))
        cur = (vecs * np.exp(-1j * evals * span)) @ (vecs.conj().T @ cur)
    return complex(psi_f.conj() @ cur)


def discrete_propagator(rep, fiducial, schedule, slice_counts, quad,
                        kernel_mode="exact", g_initial=None, g_final=None,
                        noise_floor=1e-13):
    """Discrete-time coherent-state path integral over a slice-count sweep.

    For each slice count N the resolution of identity is inserted between
    the N slices of step eps = T/N, giving

        A_N = (1/c)^(N-1) <g_f psi| slice (W slice)^(N-1) |g_i psi>

    with c = 1/d the identity-resolution constant and W = diag(weights).
    Slice Hamiltonians sample the schedule at slice midpoints, so the
    exact kernel reproduces the reference amplitude for every N when the
    schedule is constant across each slice; the first-order kernel error
    decays like 1/N. The measured order is the log-log slope over points
    above ``noise_floor`` (NaN when fewer than two survive).
    """
    if kernel_mode not in ("exact", "first-order"):
        raise ValidationError("kernel_mode must be 'exact' or 'first-order'",
                              got=kernel_mode)
    slice_counts = np.asarray(sorted(int(n) for n in slice_counts), dtype=int)
    if slice_counts.size < 1 or slice_counts[0] < 1:
        raise ValidationError("slice counts must be positive integers",
                              slice_counts=slice_counts)
    if not quad.meets_exactness():
        raise QuadratureUnderresolved(
            "identity insertion requires the exactness contract",
            orders=list(quad.orders))
    g = quad.size
    cost = float(slice_counts[-1]) * g * g
    if cost > rep.tol.kernel_cost_limit:
        raise ResourceLimit("slice chain exceeds the kernel cost budget",
                            cost=cost, limit=rep.tol.kernel_cost_limit)

    tol = rep.tol
    amp = fiducial.amplitudes
    psi_i = amp if g_initial is None else g_initial @ amp
    psi_f = amp if g_final is None else g_final @ amp
    t0, t1 = schedule.t_start, schedule.t_end
    horizon = t1 - t0
    states = _family_states(quad, amp)
    reference = _reference_amplitude(rep, schedule, psi_i, psi_f)
    bra_f = psi_f[None, :]
    ket_i = psi_i[None, :]

    amplitudes = []
    for n in slice_counts:
        eps = horizon / n
        mids = t0 + (np.arange(n) + 0.5) * eps
        hs = [schedule.coefficients_at(t) for t in mids]
        hmats = [rep.hamiltonian(h) for h in hs]
        if n == 1:
            amplitudes.append(complex(
                _slice_kernel(rep, bra_f, ket_i, hmats[0], eps,
                              kernel_mode, tol)[0, 0]))
            continue
        # chain right to left: earliest slice feeds the initial state
        z = _slice_kernel(rep, states, ket_i, hmats[0], eps,
                          kernel_mode, tol)[:, 0]
        same_h = all(np.array_equal(h, hs[0]) for h in hs)
        if same_h:
            k = _slice_kernel(rep, states, states, hmats[0], eps,
                              kernel_mode, tol)
            for _ in range(n - 2):
                z = k @ (quad.weights * z)
        else:
            for idx in range(1, n - 1):
                k = _slice_kernel(rep, states, states, hmats[idx], eps,
                                  kernel_mode, tol)
                z = k @ (quad.weights * z)
        u_f = _slice_kernel(rep, bra_f, states, hmats[-1], eps,
                            kernel_mode, tol)[0]
        # float power: d**(N-1) overflows 64-bit integers for modest N
        amplitudes.append(complex(float(rep.d) ** (n - 1)
                                  * (u_f * quad.weights) @ z))

    amplitudes = np.array(amplitudes)
    errors = np.abs(amplitudes - reference)
    live = errors > noise_floor
    if np.count_nonzero(live) >= 2:
        slope = np.polyfit(np.log(slice_counts[live].astype(float)),
                           np.log(errors[live]), 1)[0]
        order = float(-slope)
    else:
        order = float("nan")
    return ConvergenceRecord(slice_counts=slice_counts, amplitudes=amplitudes,
                             exact_amplitude=reference, errors=errors,
                             measured_order=order, kernel_mode=kernel_mode)
