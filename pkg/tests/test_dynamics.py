"""Side-by-side propagation, sections, action accumulation, tracking checks."""

import csv
import json

import numpy as np
import pytest

from cohstate.dynamics import (
    HamiltonianSchedule,
    SectionChart,
    action_along_path,
    flow_coadjoint,
    propagate_quantum,
    section_su2,
    van_hove_check,
    wrap_angle,
)
from cohstate.errors import (
    CanonicalizationRequired,
    ChartExit,
    DegenerateOrbit,
    NonsmoothPath,
    NormalizationError,
    ParseError,
    ValidationError,
)
from cohstate.family import FiducialVector, canonicalize, preset_fiducial
from cohstate.liealg import build_spin_rep

from conftest import random_state


def test_schedule_validation():
    with pytest.raises(ValidationError):
        HamiltonianSchedule(np.array([0.0, 1.0, 0.5]), np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        HamiltonianSchedule(np.array([0.0, 1.0]), np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        HamiltonianSchedule(np.array([0.0, np.inf]), np.zeros((1, 3)))


def test_schedule_from_segments_and_lookup():
    sch = HamiltonianSchedule.from_segments(
        [{"until": 1.0, "h": [1.0, 0.0, 0.0]},
         {"until": 2.0, "h": [0.0, 2.0, 0.0]}])
    np.testing.assert_allclose(sch.coefficients_at(0.5), [1, 0, 0])
    np.testing.assert_allclose(sch.coefficients_at(1.5), [0, 2, 0])
    np.testing.assert_allclose(sch.coefficients_at(1.0), [0, 2, 0])


def test_schedule_segment_keys_are_strict():
    with pytest.raises(ParseError):
        HamiltonianSchedule.from_segments([{"until": 1.0, "H": [1, 0, 0]}])


def test_schedule_json_file(tmp_path):
    path = tmp_path / "sched.json"
    path.write_text(json.dumps([{"until": 2.0, "h": [0.0, 0.0, 1.0]}]))
    sch = HamiltonianSchedule.from_json_file(path)
    assert sch.t_end == 2.0


def test_propagate_no_hamiltonian_is_constant(rep_one):
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 0.0], t_final=1.0)
    times, states = propagate_quantum(rep_one, sch, fid.amplitudes, dt=1e-2)
    np.testing.assert_allclose(states,
                               np.broadcast_to(states[0], states.shape),
                               atol=1e-15)


def test_propagate_matsumoto_phase_structure(rep_one):
    # under J_3 the m = +1 and m = -1 amplitudes counter-rotate
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=1.5)
    times, states = propagate_quantum(rep_one, sch, fid.amplitudes, dt=1e-2)
    want = np.stack([np.sqrt(2 / 3) * np.exp(-1j * times),
                     np.zeros_like(times, dtype=complex),
                     np.sqrt(1 / 3) * np.exp(1j * times)], axis=1)
    np.testing.assert_allclose(states, want, atol=1e-12)


def test_propagate_eigenstate_global_phase(rep_half):
    omega = 0.7
    fid = preset_fiducial(rep_half, "highest-weight")
    sch = HamiltonianSchedule.constant([0.0, 0.0, omega], t_final=2.0)
    times, states = propagate_quantum(rep_half, sch, fid.amplitudes, dt=1e-2)
    np.testing.assert_allclose(states[:, 0], np.exp(-1j * omega * times / 2),
                               atol=1e-12)
    np.testing.assert_allclose(states[:, 1], 0.0, atol=0.0)


def test_propagate_rejects_bad_inputs(rep_one):
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=1.0)
    fid = preset_fiducial(rep_one, "matsumoto")
    with pytest.raises(ValidationError):
        propagate_quantum(rep_one, sch, fid.amplitudes, dt=-1e-3)
    with pytest.raises(NormalizationError):
        propagate_quantum(rep_one, sch, 2.0 * fid.amplitudes, dt=1e-3)


def test_grid_refines_breakpoints(rep_one):
    fid = preset_fiducial(rep_one, "highest-weight")
    sch = HamiltonianSchedule.from_segments(
        [{"until": 0.40005, "h": [1.0, 0.0, 0.0]},
         {"until": 1.0, "h": [0.0, 0.0, 1.0]}])
    times, states = propagate_quantum(rep_one, sch, fid.amplitudes, dt=1e-3)
    assert np.any(times == 0.40005)
    assert np.all(np.diff(times) > 0)
    norms = np.linalg.norm(states, axis=1)
    assert np.max(np.abs(np.diff(norms))) <= 1e-12


def test_flow_constant_without_hamiltonian(rep_one):
    sch = HamiltonianSchedule.constant([0.0, 0.0, 0.0], t_final=1.0)
    times, mus = flow_coadjoint(rep_one, sch, np.array([0.2, 0.1, 0.5]), dt=1e-2)
    np.testing.assert_allclose(mus, np.broadcast_to(mus[0], mus.shape),
                               atol=1e-15)


def test_flow_matsumoto_moment_is_invisible(rep_one):
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=np.pi)
    times, mus = flow_coadjoint(rep_one, sch, np.array([0.0, 0.0, 1 / 3]),
                                dt=1e-3)
    np.testing.assert_allclose(
        mus, np.broadcast_to(np.array([0.0, 0.0, 1 / 3]), mus.shape),
        atol=1e-12)


def test_flow_precession_direction_pins_conventions(rep_half):
    # mudot = h x mu: a Bloch vector on axis 1 precesses to axis 2 first
    omega = 1.3
    sch = HamiltonianSchedule.constant([0.0, 0.0, omega], t_final=2.0)
    times, mus = flow_coadjoint(rep_half, sch, np.array([0.5, 0.0, 0.0]),
                                dt=1e-3)
    want = 0.5 * np.stack([np.cos(omega * times), np.sin(omega * times),
                           np.zeros_like(times)], axis=1)
    np.testing.assert_allclose(mus, want, atol=1e-10)


def test_flow_preserves_orbit_radius(rep_one, rng):
    h = rng.uniform(-3, 3, size=3)
    sch = HamiltonianSchedule.constant(h, t_final=5.0)
    mu0 = rng.normal(size=3)
    times, mus = flow_coadjoint(rep_one, sch, mu0, dt=1e-3)
    radii = np.linalg.norm(mus, axis=1)
    assert np.max(np.abs(radii - radii[0])) <= 1e-10


def test_ehrenfest_match_on_piecewise_schedule(rep_one, rng):
    fid = FiducialVector(random_state(rng, 3), rep_one.label)
    sch = HamiltonianSchedule.from_segments(
        [{"until": 1.0, "h": [1.2, -0.3, 0.4]},
         {"until": 2.5, "h": [0.0, 0.8, -1.1]}])
    times, states = propagate_quantum(rep_one, sch, fid.amplitudes, dt=1e-3)
    mu_q = np.einsum("ti,aij,tj->ta", states.conj(), rep_one.generators,
                     states).real
    _, mus = flow_coadjoint(rep_one, sch, mu_q[0], dt=1e-3)
    assert np.max(np.abs(mu_q - mus)) <= 1e-10


def test_section_su2_identity_at_pole(rep_one):
    g, (theta, phi) = section_su2(rep_one, np.array([0.0, 0.0, 0.4]))
    assert theta == 0.0 and phi == 0.0
    np.testing.assert_allclose(g.matrix, np.eye(3), atol=1e-14)


def test_section_su2_equator(rep_one):
    from cohstate.liealg import exp_element

    g, (theta, phi) = section_su2(rep_one, np.array([0.7, 0.0, 0.0]))
    assert abs(theta - np.pi / 2) <= 1e-14 and phi == 0.0
    want = exp_element(rep_one, np.array([0.0, np.pi / 2, 0.0]))
    np.testing.assert_allclose(g.matrix, want.matrix, atol=1e-13)


def test_section_su2_degenerate_and_chart_exit(rep_one):
    with pytest.raises(DegenerateOrbit):
        section_su2(rep_one, np.zeros(3))
    with pytest.raises(ChartExit):
        section_su2(rep_one, np.array([1e-5, 0.0, -1.0]))
    south = SectionChart(chart_id="south")
    g, (theta, phi) = section_su2(rep_one, np.array([1e-5, 0.0, -1.0]), south)
    assert theta > np.pi - 1e-4
    with pytest.raises(ChartExit):
        section_su2(rep_one, np.array([0.0, 0.0, 1.0]), south)


def test_action_constant_path_no_hamiltonian(rep_one):
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 0.0], t_final=1.0)
    times = np.linspace(0.0, 1.0, 101)
    action = action_along_path(rep_one, sch, fid, times,
                               np.full_like(times, 0.4),
                               np.full_like(times, 0.2))
    np.testing.assert_allclose(action, 0.0, atol=1e-13)


def test_action_nonsmooth_path_rejected(rep_one):
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=1.0)
    times = np.linspace(0.0, 1.0, 11)
    theta = np.full_like(times, 0.4)
    phi = np.zeros_like(times)
    phi[5:] = 1.2  # jump above the 0.5 rad limit
    with pytest.raises(NonsmoothPath):
        action_along_path(rep_one, sch, fid, times, theta, phi)


def test_van_hove_matsumoto_counterexample(rep_one):
    # classical motion frozen, quantum overlap follows the analytic law
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=np.pi)
    rec = van_hove_check(rep_one, fid, sch, t_final=np.pi, dt=1e-3)
    law = np.sqrt(5 / 9 + (4 / 9) * np.cos(2 * rec.times))
    np.testing.assert_allclose(rec.fidelity, law, atol=1e-12)
    np.testing.assert_allclose(rec.action, -rec.times / 3, atol=1e-12)
    np.testing.assert_allclose(
        rec.mu, np.broadcast_to(np.array([0.0, 0.0, 1 / 3]), rec.mu.shape),
        atol=1e-12)


def test_van_hove_informative_tracks_quantum(rep_one):
    fid = preset_fiducial(rep_one, "highest-weight")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=2 * np.pi)
    rec = van_hove_check(rep_one, fid, sch, t_final=2 * np.pi, dt=1e-3,
                         initial_theta=np.pi / 3)
    assert np.max(1.0 - rec.fidelity) <= 1e-8
    assert np.max(np.abs(rec.phase_residual)) <= 1e-6


def test_van_hove_phase_residual_is_second_order(rep_one):
    fid = preset_fiducial(rep_one, "highest-weight")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=2 * np.pi)
    worst = {}
    for dt in (1e-3, 5e-4):
        rec = van_hove_check(rep_one, fid, sch, t_final=2 * np.pi, dt=dt,
                             initial_theta=np.pi / 3)
        worst[dt] = np.max(np.abs(rec.phase_residual))
    order = np.log2(worst[1e-3] / worst[5e-4])
    assert 1.8 <= order <= 2.2


def test_van_hove_random_spin_half_always_tracks(rep_half, rng):
    # Spin-1/2 fiducials are always informative, so tracking is exact for
    # any fiducial. Axial Hamiltonians keep the section residue at roundoff.
    for _ in range(5):
        fid, _ = canonicalize(rep_half,
                              FiducialVector(random_state(rng, 2),
                                             rep_half.label))
        omega = rng.uniform(-2, 2)
        sch = HamiltonianSchedule.constant([0.0, 0.0, omega], t_final=3.0)
        rec = van_hove_check(rep_half, fid, sch, t_final=3.0, dt=1e-3,
                             initial_theta=rng.uniform(0.3, np.pi - 0.3),
                             initial_phi=rng.uniform(-np.pi, np.pi))
        assert np.max(1.0 - rec.fidelity) <= 1e-8
        assert np.max(np.abs(rec.phase_residual)) <= 1e-6


def test_action_guard_rejects_transverse_wobble(rep_half):
    # Precession about an axis transverse to the section axis leaves an
    # O(dt^2) imaginary residue in the midpoint Berry rate, which the
    # guard (1e-8 * dt on the rate) is meant to catch at this step size.
    fid = preset_fiducial(rep_half, "highest-weight")
    sch = HamiltonianSchedule.constant([1.0, 0.0, 0.0], t_final=2.0)
    with pytest.raises(ValidationError):
        van_hove_check(rep_half, fid, sch, t_final=2.0, dt=1e-3,
                       initial_theta=1.2)


def test_van_hove_gauge_coherence(rep_one):
    fid = preset_fiducial(rep_one, "highest-weight")
    shifted = FiducialVector(fid.amplitudes * np.exp(1j * 0.7), rep_one.label)
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=3.0)
    kw = dict(t_final=3.0, dt=1e-3, initial_theta=np.pi / 3)
    a = van_hove_check(rep_one, fid, sch, **kw)
    b = van_hove_check(rep_one, shifted, sch, **kw)
    assert np.max(np.abs(a.fidelity - b.fidelity)) <= 1e-12
    assert np.max(np.abs(a.phase_residual - b.phase_residual)) <= 1e-12


def test_van_hove_requires_canonical_fiducial(rep_one):
    tilted = FiducialVector(
        np.array([np.cos(0.3), np.sin(0.3), 0.0], dtype=complex),
        rep_one.label)
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=1.0)
    with pytest.raises(CanonicalizationRequired):
        van_hove_check(rep_one, tilted, sch, t_final=1.0, dt=1e-3)


def test_van_hove_chart_exit_reports_index(rep_one):
    # precession about axis 1 sweeps over the south pole
    fid = preset_fiducial(rep_one, "highest-weight")
    sch = HamiltonianSchedule.constant([1.0, 0.0, 0.0], t_final=4.0)
    with pytest.raises(ChartExit) as err:
        van_hove_check(rep_one, fid, sch, t_final=4.0, dt=1e-3,
                       initial_theta=1e-4)
    assert err.value.context["index"] > 0


def test_trajectory_writers(tmp_path, rep_one):
    fid = preset_fiducial(rep_one, "matsumoto")
    sch = HamiltonianSchedule.constant([0.0, 0.0, 1.0], t_final=0.5)
    rec = van_hove_check(rep_one, fid, sch, t_final=0.5, dt=1e-2)

    jpath = tmp_path / "traj.jsonl"
    rec.write_jsonl(jpath)
    rows = [json.loads(line) for line in jpath.read_text().splitlines()]
    assert len(rows) == rec.times.size
    assert set(rows[0]) == {"time", "mu", "theta", "phi", "action",
                            "fidelity", "phase_residual"}
    assert rows[-1]["time"] == 0.5

    cpath = tmp_path / "traj.csv"
    rec.write_csv(cpath)
    with open(cpath) as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["time", "mu1", "mu2", "mu3", "theta", "phi",
                        "action", "fidelity", "phase_residual"]
    assert len(table) == rec.times.size + 1
    # CSV mirrors the JSONL values exactly (repr round-trip)
    assert float(table[-1][7]) == rows[-1]["fidelity"]


def test_wrap_angle_range_and_branch():
    assert wrap_angle(np.pi) == np.pi
    assert wrap_angle(-np.pi) == np.pi
    assert wrap_angle(3 * np.pi) == np.pi
    vals = wrap_angle(np.linspace(-10, 10, 1001))
    assert np.all(vals > -np.pi) and np.all(vals <= np.pi)
    np.testing.assert_allclose(wrap_angle(0.3), 0.3, atol=1e-15)
