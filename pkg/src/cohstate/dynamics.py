"""Side-by-side quantum and classical evolution on a co-adjoint orbit.

The quantum state is stepped exactly (spectral exponentials of the
piecewise-constant Hamiltonian); the classical moment vector follows the
co-adjoint flow mudot_a = f_abc h_b mu_c under classic RK4. A gauge-fixed
section turns the classical trajectory back into group representatives so
the accumulated action, overlap fidelity, and phase residual can be
compared trajectory by trajectory.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import DEFAULT_TOL
from .errors import (
    ChartExit,
    DegenerateOrbit,
    CanonicalizationRequired,
    NonsmoothPath,
    NormalizationError,
    ParseError,
    ValidationError,
)
from .family import FiducialVector, MomentVector, moment_map

__all__ = [
    "HamiltonianSchedule",
    "SectionChart",
    "TrajectoryRecord",
    "propagate_quantum",
    "flow_coadjoint",
    "section_su2",
    "action_along_path",
    "van_hove_check",
]


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Piecewise-constant Hamiltonian H(t) = h_a(t) T_a.

    ``breakpoints`` are the K+1 strictly increasing segment boundaries;
    ``coefficients`` holds one real n-vector per segment.
    """

    breakpoints: np.ndarray   # (K+1,)
    coefficients: np.ndarray  # (K, n)

    def __post_init__(self):
        bp = np.ascontiguousarray(np.asarray(self.breakpoints, dtype=float))
        co = np.ascontiguousarray(np.asarray(self.coefficients, dtype=float))
        bp.setflags(write=False)
        co.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coefficients", co)
        if bp.ndim != 1 or bp.size < 2:
            raise ValidationError("schedule needs at least one segment")
        if np.any(np.diff(bp) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if co.ndim != 2 or co.shape[0] != bp.size - 1:
            raise ValidationError("one coefficient vector per segment required",
                                  segments=bp.size - 1, got=co.shape)
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(co))):
            raise ValidationError("schedule entries must be finite")

    @property
    def t_start(self):
        return float(self.breakpoints[0])

    @property
    def t_end(self):
        return float(self.breakpoints[-1])

    @classmethod
    def constant(cls, h, t_final, t_start=0.0):
        return cls(np.array([t_start, t_final]), np.asarray(h, dtype=float)[None, :])

    @classmethod
    def from_segments(cls, segments, t_start=0.0):
        """Build from [{"until": t, "h": [...]}, ...] starting at t_start."""
        bps = [t_start]
        coeffs = []
        for k, seg in enumerate(segments):
            if not isinstance(seg, dict) or set(seg) != {"until", "h"}:
                raise ParseError("schedule segments must have exactly the keys "
                                 "'until' and 'h'", segment=k,
                                 got=sorted(seg) if isinstance(seg, dict) else seg)
            bps.append(float(seg["until"]))
            coeffs.append(np.asarray(seg["h"], dtype=float))
        return cls(np.array(bps), np.array(coeffs))

    @classmethod
    def from_json_file(cls, path, t_start=0.0):
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError("invalid JSON in schedule file", path=path,
                                 line=exc.lineno) from exc
        if not isinstance(doc, list):
            raise ParseError("schedule file must contain a JSON array", path=path)
        return cls.from_segments(doc, t_start=t_start)

    def coefficients_at(self, t):
        """Segment coefficients at time t (right-continuous lookup)."""
        idx = int(np.searchsorted(self.breakpoints, t, side="right") - 1)
        idx = min(max(idx, 0), self.coefficients.shape[0] - 1)
        return self.coefficients[idx]


@dataclass(frozen=True)
class SectionChart:
    """Gauge chart for the su(2) section, excluding a polar cap of
    half-angle ``delta`` around the singular pole."""

    chart_id: str = "north"
    delta: float = DEFAULT_TOL.chart_delta

    def __post_init__(self):
        if self.chart_id not in ("north", "south"):
            raise ValidationError("chart_id must be 'north' or 'south'",
                                  got=self.chart_id)
        if not self.delta > 0:
            raise ValidationError("chart exclusion angle must be positive",
                                  delta=self.delta)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Paired quantum/classical trajectory with action and phase diagnostics."""

    times: np.ndarray           # (N,)
    psi: np.ndarray             # (N, d) quantum states
    mu: np.ndarray              # (N, n) classical moments
    section_params: np.ndarray  # (N, 2) polar/azimuthal angles
    action: np.ndarray          # (N,) accumulated classical action
    fidelity: np.ndarray        # (N,) |<g(t) 0|psi(t)>|
    phase_residual: np.ndarray  # (N,) arg overlap - action, wrapped

    def __post_init__(self):
        for name in ("times", "psi", "mu", "section_params", "action",
                     "fidelity", "phase_residual"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name)))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.fidelity > 1 + 1e-12) or np.any(self.fidelity < 0):
            raise ValidationError("fidelity left [0, 1]",
                                  worst=float(self.fidelity.max()))
        norms = np.linalg.norm(self.psi, axis=1)
        if np.max(np.abs(norms - 1)) > 1e-10:
            raise ValidationError("quantum norm drifted",
                                  worst=float(np.max(np.abs(norms - 1))))

    def rows(self):
        for k in range(self.times.size):
            yield {
                "time": float(self.times[k]),
                "mu": [float(x) for x in self.mu[k]],
                "theta": float(self.section_params[k, 0]),
                "phi": float(self.section_params[k, 1]),
                "action": float(self.action[k]),
                "fidelity": float(self.fidelity[k]),
                "phase_residual": float(self.phase_residual[k]),
            }

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for row in self.rows():
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    def write_csv(self, path):
        n = self.mu.shape[1]
        header = (["time"] + [f"mu{a + 1}" for a in range(n)]
                  + ["theta", "phi", "action", "fidelity", "phase_residual"])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.rows():
                writer.writerow([repr(row["time"])]
                                + [repr(x) for x in row["mu"]]
                                + [repr(row["theta"]), repr(row["phi"]),
                                   repr(row["action"]), repr(row["fidelity"]),
                                   repr(row["phase_residual"])])


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    w = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def _grid(schedule, t_final, dt):
    """Step grid refining the schedule so no step crosses a breakpoint.

    Returns (times, segments) where segments is a list of
    (coefficients, step, n_steps, start_index) tuples.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive", dt=dt)
    t0 = schedule.t_start
    if t_final is None:
        t_final = schedule.t_end
    if t_final <= t0:
        raise ValidationError("t_final must exceed the schedule start",
                              t_final=t_final, t_start=t0)
    if t_final > schedule.t_end + 1e-12:
        raise ValidationError("schedule does not cover the requested horizon",
                              t_final=t_final, t_end=schedule.t_end)

    times = [np.array([t0])]
    segments = []
    start = 0
    for k in range(schedule.coefficients.shape[0]):
        a = float(schedule.breakpoints[k])
        b = min(float(schedule.breakpoints[k + 1]), t_final)
        if b <= a:
            break
        span = b - a
        n = max(1, int(np.ceil(span / dt * (1 - 1e-12))))
        step = span / n
        segments.append((schedule.coefficients[k], step, n, start))
        times.append(a + step * np.arange(1, n + 1))
        times[-1][-1] = b  # land on the breakpoint exactly
        start += n
        if b >= t_final:
            break
    return np.concatenate(times), segments


def propagate_quantum(rep, schedule, psi0, dt, t_final=None):
    """Exact quantum propagation of the piecewise-constant Hamiltonian.

    Each step applies the spectrally computed exp(-i H_k delta); within a
    segment the step matrix is constant, so the inner loop is a plain
    matrix-vector recurrence (the compiled kernel when available).

    Returns (times, states) with states[k] the state at times[k].
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > rep.tol.norm_check:
        raise NormalizationError("initial state must be unit norm",
                                 norm=float(np.linalg.norm(psi0)))
    times, segments = _grid(schedule, t_final, dt)
    states = np.empty((times.size, rep.d), dtype=complex)
    states[0] = psi0
    cur = psi0
    for h, step, n, start in segments:
        evals, vecs = np.linalg.eigh(rep.hamiltonian(h))
        u = (vecs * np.exp(-1j * evals * step)) @ vecs.conj().T
        seg = kernels.unitary_steps(np.ascontiguousarray(u),
                                    np.ascontiguousarray(cur), n)
        states[start + 1:start + n + 1] = seg[1:]
        cur = states[start + n]
    norms = np.linalg.norm(states, axis=1)
    drift = np.max(np.abs(np.diff(norms)))
    if drift > 1e-12:
        raise ValidationError("norm not preserved within a step", drift=drift)
    return times, states


def flow_coadjoint(rep, schedule, mu0, dt, t_final=None):
    """RK4 integration of the co-adjoint flow mudot_a = f_abc h_b mu_c.

    For su(2) this is mudot = h x mu. Returns (times, mus) on the same
    grid as propagate_quantum for the same schedule and dt.
    """
    mu0 = mu0.mu if isinstance(mu0, MomentVector) else np.asarray(mu0, dtype=float)
    times, segments = _grid(schedule, t_final, dt)
    mus = np.empty((times.size, rep.n), dtype=float)
    mus[0] = mu0
    cur = mu0
    for h, step, n, start in segments:
        a = np.einsum("abc,b->ac", rep.structure_constants, h)
        seg = kernels.rk4_linear_steps(np.ascontiguousarray(a),
                                       np.ascontiguousarray(cur), step, n)
        mus[start + 1:start + n + 1] = seg[1:]
        cur = mus[start + n]
    return times, mus


def _section_angles(mu, chart, tol):
    """Polar/azimuthal angles of moment vectors plus chart admission.

    mu may be a single vector or an (N, 3) stack. Raises DEGENERATE_ORBIT
    on a vanishing moment and CHART_EXIT when the polar angle enters the
    excluded cap, reporting the first offending index.
    """
    arr = np.atleast_2d(np.asarray(mu, dtype=float))
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms <= tol.degenerate_mu):
        idx = int(np.argmax(norms <= tol.degenerate_mu))
        raise DegenerateOrbit("co-adjoint orbit is a point; no section exists",
                              index=idx)
    theta = np.arccos(np.clip(arr[:, 2] / norms, -1.0, 1.0))
    phi = np.where(theta == 0.0, 0.0, np.arctan2(arr[:, 1], arr[:, 0]))
    if chart.chart_id == "north":
        bad = theta > np.pi - chart.delta
    else:
        bad = theta < chart.delta
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ChartExit("trajectory entered the excluded polar cap",
                        index=idx, theta=float(theta[idx]), chart=chart.chart_id)
    return theta, phi


def _section_states(rep, theta, phi, chart, amplitudes):
    """States g(theta_k, phi_k)|0> for angle arrays, assembled spectrally.

    North chart: g = exp(-i phi J3) exp(-i theta J2) exp(+i phi J3).
    South chart: the trailing factor flips sign, moving the gauge string
    to the north pole.
    """
    j2, j3 = rep.generators[1], rep.generators[2]
    m = np.real(np.diag(j3))
    e2, v2 = np.linalg.eigh(j2)
    sign = 1.0 if chart.chart_id == "north" else -1.0
    a = np.exp(sign * 1j * np.outer(phi, m)) * amplitudes[None, :]
    b = (np.exp(-1j * np.outer(theta, e2)) * (a @ v2.conj())) @ v2.T
    return np.exp(-1j * np.outer(phi, m)) * b


def section_su2(rep, mu, chart=None):
    """Section representative of a moment vector on the co-adjoint sphere.

    Returns (GroupElement, (theta, phi)). The fiducial is assumed
    canonicalized (its own moment on the +3 axis), so acting with the
    returned element reproduces ``mu`` exactly.
    """
    from .family import su2_section_element

    rep.require_spin("section_su2")
    chart = chart or SectionChart()
    theta, phi = _section_angles(mu.mu if isinstance(mu, MomentVector) else mu,
                                 chart, rep.tol)
    th, ph = float(theta[0]), float(phi[0])
    if chart.chart_id == "south":
        g = _south_element(rep, th, ph)
    else:
        g = su2_section_element(rep, th, ph)
    return g, (th, ph)


def _south_element(rep, theta, phi):
    from .liealg import GroupElement

    j2, j3 = rep.generators[1], rep.generators[2]
    m = np.real(np.diag(j3))
    e2, v2 = np.linalg.eigh(j2)
    core = (v2 * np.exp(-1j * theta * e2)) @ v2.conj().T
    mat = (np.exp(-1j * phi * m)[:, None] * core) * np.exp(-1j * phi * m)[None, :]
    return GroupElement(mat, rep.label, rep.tol.replace(unitarity=rep.tol.exp_unitarity))


def _check_smooth(theta, phi, tol):
    dth = np.abs(np.diff(theta))
    dph = np.abs(wrap_angle(np.diff(phi)))
    worst = max(dth.max(initial=0.0), dph.max(initial=0.0))
    if worst > tol.nonsmooth_jump:
        idx = int(np.argmax(np.maximum(dth, dph)))
        raise NonsmoothPath("section parameters jump too fast for the "
                            "discrete action", index=idx, jump=float(worst))


def action_along_path(rep, schedule, fiducial, times, theta, phi, chart=None):
    """Accumulated action S(t) along a gauge-fixed section path.

    Each step contributes the midpoint-referenced Berry increment
    i<0| g_mid^{-1} (g_{k+1} - g_k) |0> minus the classical Hamiltonian
    expectation <0| g_mid^{-1} H(t_mid) g_mid |0> times the step. Both are
    second-order accurate; the Berry increment is real up to roundoff and
    its imaginary residue is asserted before truncation.
    """
    chart = chart or SectionChart()
    tol = rep.tol
    amp = fiducial.amplitudes
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_smooth(theta, phi, tol)

    dts = np.diff(times)
    dphi = wrap_angle(np.diff(phi))
    theta_mid = 0.5 * (theta[:-1] + theta[1:])
    phi_mid = phi[:-1] + 0.5 * dphi
    t_mid = times[:-1] + 0.5 * dts

    u = _section_states(rep, theta, phi, chart, amp)          # g_k |0>
    um = _section_states(rep, theta_mid, phi_mid, chart, amp)  # g_mid |0>

    berry_inc = 1j * np.einsum("ti,ti->t", um.conj(), u[1:] - u[:-1])
    # The rate berry_inc / dt must be real to berry_imag * dt before its
    # real part is kept, so the increment bound carries dt squared.
    guard = tol.berry_imag * dts * dts
    if np.any(np.abs(berry_inc.imag) > guard):
        worst = int(np.argmax(np.abs(berry_inc.imag) - guard))
        raise ValidationError("Berry rate has a non-real residue",
                              index=worst,
                              residue=float(berry_inc.imag[worst] / dts[worst]))

    seg_idx = np.searchsorted(schedule.breakpoints, t_mid, side="right") - 1
    seg_idx = np.clip(seg_idx, 0, schedule.coefficients.shape[0] - 1)
    hmats = np.einsum("tb,bij->tij", schedule.coefficients[seg_idx], rep.generators)
    h_mid = np.einsum("ti,tij,tj->t", um.conj(), hmats, um)
    if np.max(np.abs(h_mid.imag), initial=0.0) > tol.h_imag:
        raise ValidationError("Hamiltonian expectation has a non-real residue",
                              residue=float(np.max(np.abs(h_mid.imag))))

    increments = berry_inc.real - h_mid.real * dts
    action = np.concatenate([[0.0], np.cumsum(increments)])
    return action


def van_hove_check(rep, fiducial, schedule, t_final, dt,
                   initial_theta=0.0, initial_phi=0.0, chart=None):
    """Propagate quantum and classical evolutions side by side and record
    how well the classically evolved coherent state, times the action
    phase, tracks the true quantum state.

    The fiducial must be canonicalized (moment on the +3 axis). The
    trajectory starts at the section representative of the tilted moment
    direction (initial_theta, initial_phi); with the default zero tilt the
    initial representative is the identity.

    For an informative fiducial the fidelity deficit and phase residual
    are second-order small in dt; for a non-informative one the record
    simply reports the gauge-dependent deviations.
    """
    from .family import su2_section_element

    rep.require_spin("van_hove_check")
    chart = chart or SectionChart()
    tol = rep.tol

    mu_fid = moment_map(rep, fiducial).mu
    if np.linalg.norm(mu_fid) <= tol.degenerate_mu:
        raise DegenerateOrbit("fiducial moment vanishes; no orbit to track")
    if mu_fid[0] ** 2 + mu_fid[1] ** 2 > tol.canonical_xy or mu_fid[2] < 0:
        raise CanonicalizationRequired(
            "fiducial moment must point along the +3 axis",
            mu=[float(x) for x in mu_fid])

    g0 = su2_section_element(rep, initial_theta, initial_phi)
    psi_init = g0.matrix @ fiducial.amplitudes

    times, states = propagate_quantum(rep, schedule, psi_init, dt, t_final)
    mu0 = np.einsum("i,aij,j->a", psi_init.conj(), rep.generators, psi_init).real
    _, mus = flow_coadjoint(rep, schedule, mu0, dt, t_final)

    theta, phi = _section_angles(mus, chart, tol)
    action = action_along_path(rep, schedule, fiducial, times, theta, phi, chart)

    u = _section_states(rep, theta, phi, chart, fiducial.amplitudes)
    overlaps = np.einsum("ti,ti->t", u.conj(), states)
    fidelity = np.abs(overlaps)
    residual = wrap_angle(np.angle(overlaps) - action)

    return TrajectoryRecord(
        times=times,
        psi=states,
        mu=mus,
        section_params=np.column_stack([theta, phi]),
        action=action,
        fidelity=fidelity,
        phase_residual=residual,
    )
