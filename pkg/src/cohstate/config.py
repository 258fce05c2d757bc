"""Central tolerance record.

All numerical thresholds used across the package live in one frozen
dataclass so tests can tighten or relax them in a single place.
"""

from dataclasses import dataclass, asdict, replace


@dataclass(frozen=True)
class Tolerances:
    # generator / representation validation
    herm: float = 1e-12            # max-abs Hermiticity defect of a generator
    closure_rep: float = 1e-10     # closure defect allowed in a stored rep
    closure_validate: float = 1e-8  # projection residual that trips CLOSURE_FAILURE
    jacobi: float = 1e-10          # Jacobi identity defect on structure constants
    unitarity: float = 1e-10       # ||g†g - I||_max for a GroupElement
    exp_unitarity: float = 1e-12   # same bound for freshly exponentiated elements
    weight_sum: float = 1e-12      # |sum(weights) - 1| for Haar rules
    conj_residual: float = 1e-10   # span residual in conjugate_generator

    # fiducial vectors and isotropy
    state_norm: float = 1e-12      # unit-norm defect of a stored fiducial
    norm_check: float = 1e-8       # norm defect that trips NORMALIZATION
    moment_imag: float = 1e-12     # imaginary residue allowed in a moment component
    rank_rel: float = 1e-9         # relative SVD cutoff for isotropy ranks
    rank_guard: float = 10.0       # guard-band factor around the cutoff
    containment: float = 1e-8      # state-isotropy vector outside moment span
    degenerate_mu: float = 1e-12   # ||mu|| below this means a point orbit

    # sections, actions, trajectories
    chart_delta: float = 1e-3      # polar exclusion half-angle (rad)
    nonsmooth_jump: float = 0.5    # max section-parameter jump per step (rad)
    berry_imag: float = 1e-8       # imaginary residue guard in the action increment
    h_imag: float = 1e-10          # imaginary residue of a Hamiltonian expectation

    # path integrals
    overlap_cut: float = 1e-14     # first-order kernel zeroes overlaps below this
    dirac_gap: float = 1e-8        # distance to a half-integer that still passes
    berry_fit: float = 1e-8        # max residual of the (cos theta - 1) fit
    canonical_xy: float = 1e-16    # mu_1^2 + mu_2^2 allowed before "canonical" fails
    fd_step: float = 1e-6          # finite-difference step for the Berry connection
    kernel_cost_limit: float = 5e8  # N * (grid size)^2 hard cap in discrete_propagator

    def replace(self, **kwargs):
        return replace(self, **kwargs)

    def as_dict(self):
        return asdict(self)


DEFAULT_TOL = Tolerances()
