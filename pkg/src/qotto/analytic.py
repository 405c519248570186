"""Closed-form work, heat and efficiency for every cycle variant.

These expressions are evaluated directly from the drive and measurement
parameters, sharing no code path with the density-matrix simulator in
:mod:`qotto.engine`; the test suite checks the two routes against each
other.  Works and heats are in units of the reference energy, entropies
in bits, and the erasure cost carries an explicit ln 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import qmat
from .engine import ENGINE_TOL, CycleRecord, DriveSpec, EngineParams, MeasurementBasis

LN2 = math.log(2.0)

# An AnalyticRecord carries the same ledger fields as a simulated one.
AnalyticRecord = CycleRecord


@dataclass(frozen=True)
class NonAdiabaticIntermediates:
    """Scalar intermediates of the driven-cycle work algebra.

    a = 2p - 1 and b = 2 sqrt(p(1-p)) encode the drive, mu the overlap
    between the drive image of the ground state and the measurement axis;
    big_a/big_b/big_q are the squared overlaps entering the stroke
    energies (big_q = big_a for the reversed stroke-IV drive), and d is
    the discriminant sqrt((omega_x - omega_z)^2 + 4 omega_x omega_z (1-p)).
    s and s_prime select the maximizing branch of the optimality
    conditions.
    """

    a: float
    b: float
    mu: float
    big_a: float
    big_b: float
    big_q: float
    d: float
    s: int = 1
    s_prime: int = -1


def discriminant(params: EngineParams, p: float) -> float:
    arg = (params.omega_x - params.omega_z) ** 2 + 4.0 * params.omega_x * params.omega_z * (1.0 - p)
    return math.sqrt(max(arg, 0.0))  # clamp guards rounding at the adiabatic boundary


def intermediates(
    params: EngineParams, drive: DriveSpec, basis: MeasurementBasis
) -> NonAdiabaticIntermediates:
    a = 2.0 * drive.p - 1.0
    b = 2.0 * math.sqrt(drive.p * (1.0 - drive.p))
    cos_t = math.cos(basis.theta_x)
    mu = a * cos_t + b * math.sin(basis.theta_x) * math.cos(drive.alpha - basis.phi_x)
    return NonAdiabaticIntermediates(
        a=a,
        b=b,
        mu=mu,
        big_a=0.5 * (1.0 + mu),
        big_b=0.5 * (1.0 + cos_t),
        big_q=0.5 * (1.0 + mu),
        d=discriminant(params, drive.p),
    )


def _record_from_energies(e0, e1, e2, e3, **aux) -> AnalyticRecord:
    w1 = e1 - e0
    w2 = e3 - e2
    w_total = -(w1 + w2)
    q_h = e2 - e1
    q_c = e0 - e3
    eta = w_total / q_h if (q_h > ENGINE_TOL and w_total > ENGINE_TOL) else None
    return AnalyticRecord(
        e0=e0, e1=e1, e2=e2, e3=e3, w1=w1, w2=w2, w_total=w_total,
        q_c=q_c, q_h=q_h, eta=eta, **aux,
    )


def conventional_record(params: EngineParams, p: float) -> AnalyticRecord:
    """Two-bath cycle ledger for transition probability p (reversed stroke-IV drive)."""
    if params.beta_h is None:
        raise ValueError("the conventional cycle requires beta_h")
    if not (0.5 <= p <= 1.0):
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    tz, tx = params.tau_z, params.tau_x
    wz, wx = params.omega_z, params.omega_x
    e0 = -0.5 * wz * tz
    e1 = 0.5 * wx * tz * (1.0 - 2.0 * p)
    e2 = -0.5 * wx * tx
    e3 = 0.5 * wz * tx * (1.0 - 2.0 * p)
    return _record_from_energies(e0, e1, e2, e3)


def pvm_adiabatic_record(params: EngineParams, theta_x: float) -> AnalyticRecord:
    """Projective-measurement cycle at p = 1; work is (tz/2)(wx - wz) sin^2(theta)."""
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    cos2 = math.cos(theta_x) ** 2
    e0 = -0.5 * wz * tz
    e1 = -0.5 * wx * tz
    e2 = -0.5 * wx * tz * cos2
    e3 = -0.5 * wz * tz * cos2
    return _record_from_energies(e0, e1, e2, e3)


def pvm_nonadiabatic_record(
    params: EngineParams, drive: DriveSpec, basis: MeasurementBasis
) -> AnalyticRecord:
    """Projective-measurement cycle ledger at arbitrary drive."""
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    mid = intermediates(params, drive, basis)
    e0 = -0.5 * wz * tz
    e1 = 0.5 * wx * tz * (1.0 - 2.0 * drive.p)
    e2 = -0.5 * wx * tz * mid.mu * math.cos(basis.theta_x)
    e3 = -0.5 * wz * tz * mid.mu**2
    return _record_from_energies(e0, e1, e2, e3)


def pvm_nonadiabatic_work(
    params: EngineParams, drive: DriveSpec, basis: MeasurementBasis
) -> float:
    """Total work -(tz/2)[-a wx + wz - wz mu^2 + wx mu cos(theta)]."""
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    mid = intermediates(params, drive, basis)
    cos_t = math.cos(basis.theta_x)
    return -0.5 * tz * (-mid.a * wx + wz - wz * mid.mu**2 + wx * mid.mu * cos_t)


class PvmOptimum(NamedTuple):
    work: float
    basis: MeasurementBasis
    heat: float
    eta: float


def pvm_optimal(params: EngineParams, p: float, alpha: float = 0.0) -> PvmOptimum:
    """Work-maximizing measurement basis and value for a given drive.

    The maximum over (theta_x, phi_x) is (tz/4)(D - wz + wx(2p - 1)),
    attained on the phi_x = alpha branch at the angle fixed by
    cos(2 theta) = -A/hypot(A, B), sin(2 theta) = -B/hypot(A, B) with
    A = wz(b^2 - a^2) + a wx and B = b(wx - 2 a wz).  The heat entering
    during the measurement stroke at that basis is
    wx tz (a D + wx - a wz) / (4 D).
    """
    if not (0.5 <= p <= 1.0):
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    a = 2.0 * p - 1.0
    b = 2.0 * math.sqrt(p * (1.0 - p))
    big_a = wz * (b * b - a * a) + a * wx
    big_b = b * (wx - 2.0 * a * wz)
    d = discriminant(params, p)
    work = 0.25 * tz * (d - wz + a * wx)
    x = math.atan2(-big_b, -big_a)
    if x < 0.0:
        x += 2.0 * math.pi
    basis = MeasurementBasis(theta_x=0.5 * x, phi_x=alpha % (2.0 * math.pi))
    heat = wx * tz * (a * d + wx - a * wz) / (4.0 * d)
    return PvmOptimum(work=work, basis=basis, heat=heat, eta=work / heat)


class PvmBestP(NamedTuple):
    p_star: float
    work: float
    eta: float


def pvm_best_p(params: EngineParams) -> PvmBestP:
    """Transition probability maximizing the optimal projective-cycle work.

    For compression ratio gamma < 2 the maximum sits strictly inside the
    non-adiabatic region at p = 1/2 + gamma/4 with efficiency 1/2; for
    gamma >= 2 it sits at the adiabatic endpoint p = 1.
    """
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    if params.gamma < 2.0:
        return PvmBestP(
            p_star=0.5 + 0.25 * wx / wz,
            work=wx * wx * tz / (8.0 * wz),
            eta=0.5,
        )
    return PvmBestP(p_star=1.0, work=0.5 * tz * (wx - wz), eta=1.0 - wz / wx)


class PovmOptimum(NamedTuple):
    work: float
    v0: np.ndarray


# Permutation whose matrix in the product eigenbasis of sigma_x (x) sigma_x
# swaps the middle two basis states; it moves the support of the dilated
# thermal state onto the high-energy eigenspace of the measurement-stroke
# Hamiltonian.
_SWAP_MIDDLE = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def optimal_dilation_unitary() -> np.ndarray:
    """The work-optimal adiabatic joint unitary, in the computational product basis."""
    t = np.kron(qmat.HADAMARD, qmat.HADAMARD)
    return t @ _SWAP_MIDDLE @ t


def povm_adiabatic_optimal(params: EngineParams) -> PovmOptimum:
    """Optimal adiabatic generalized-measurement work and a unitary attaining it.

    The optimum over all two-outcome generalized measurements with a pure
    auxiliary is (1/2)(wx - wz)(1 + tz); running the simulated cycle with
    the returned unitary at p = 1 attains it.
    """
    work = 0.5 * (params.omega_x - params.omega_z) * (1.0 + params.tau_z)
    return PovmOptimum(work=work, v0=optimal_dilation_unitary())


def povm_work_ceiling(params: EngineParams, drive: DriveSpec) -> float:
    """Maximum gross work of the dilation cycle over all joint unitaries.

    With a pure auxiliary the drive strokes fix w1, and the remaining
    dependence on the joint unitary is linear in the post-measurement
    state, so the maximum follows from pairing sorted eigenvalues (see
    :func:`rearrangement_energy_bound`): (tz/2)(a wx - wz) + D/2.  At
    p = 1 this reduces to the adiabatic optimum (1/2)(wx - wz)(1 + tz).
    """
    tz = params.tau_z
    a = 2.0 * drive.p - 1.0
    return 0.5 * tz * (a * params.omega_x - params.omega_z) + 0.5 * discriminant(params, drive.p)


def rearrangement_energy_bound(h, rho) -> float:
    """max over unitaries U of Tr(h U rho U^dag) = sum of ascending-sorted eigenvalue products."""
    hm = qmat.validate_hermitian(h, name="h")
    rm = qmat.validate_density_matrix(rho, name="rho")
    if hm.shape != rm.shape:
        raise ValueError(f"dimension mismatch: {hm.shape} vs {rm.shape}")
    return float(np.sort(np.linalg.eigvalsh(hm)) @ np.sort(np.linalg.eigvalsh(rm)))


def binary_entropy_bits(p: float) -> float:
    """H2(p) in bits with the 0 log 0 = 0 convention."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability out of range: {p}")
    out = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            out -= q * math.log2(q)
    return out


class AuxCostRecord(NamedTuple):
    min_cost: float
    max_cost: float
    net_work_v0: float
    delta_w: float
    t_c_bound: float


def aux_cost_record(params: EngineParams, t_c: float | None = None) -> AuxCostRecord:
    """Auxiliary-reset cost ledger at cold-bath temperature t_c.

    ``t_c`` defaults to 1/beta_c; when given it replaces the cold-bath
    temperature in both the erasure cost and the optimal work, which is
    how the cost/advantage comparison is swept against temperature.
    ``min_cost`` is the erasure cost when the auxiliary is measured along
    its poles, t_c ln2 H2((1 + tz)/2); ``max_cost`` is the 1-bit ceiling
    t_c ln 2.  ``delta_w`` = (wx - wz)/2 is the temperature-independent
    work advantage of the generalized measurement over the projective
    one, and ``t_c_bound`` = delta_w / ln 2 is the temperature below
    which even the worst-case reset cost cannot erase that advantage.
    """
    if t_c is None:
        t_c = 1.0 / params.beta_c
    if not t_c > 0.0:
        raise ValueError(f"t_c must be positive, got {t_c}")
    wz, wx = params.omega_z, params.omega_x
    tz = math.tanh(0.5 * wz / t_c)
    min_cost = t_c * LN2 * binary_entropy_bits(0.5 * (1.0 + tz))
    return AuxCostRecord(
        min_cost=min_cost,
        max_cost=t_c * LN2,
        net_work_v0=0.5 * (wx - wz) * (1.0 + tz) - min_cost,
        delta_w=0.5 * (wx - wz),
        t_c_bound=0.5 * (wx - wz) / LN2,
    )


def reset_crossing_temperature(params: EngineParams) -> float:
    """Cold-bath temperature where the minimal reset cost equals delta_w.

    The minimal reset cost grows monotonically with temperature, so the
    crossing is unique; it is bracketed by doubling and located by
    bisection until the cost matches delta_w to 1e-9.
    """
    delta_w = 0.5 * (params.omega_x - params.omega_z)

    def cost(t: float) -> float:
        return t * LN2 * binary_entropy_bits(0.5 * (1.0 + math.tanh(0.5 * params.omega_z / t)))

    lo, hi = 1e-9, 1.0
    while cost(hi) < delta_w:
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("failed to bracket the reset-cost crossing")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cost(mid) < delta_w:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 and abs(cost(mid) - delta_w) < 1e-9:
            break
    return 0.5 * (lo + hi)


def delta_w_pvm_conventional(params: EngineParams, p: float) -> float:
    """Optimal projective work minus the infinite-temperature two-bath work.

    Equals (tz/4)[D - (wx - wz) + 2 wx (1-p)] >= 0, vanishing only at p = 1.
    """
    if not (0.5 <= p <= 1.0):
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    tz = params.tau_z
    wz, wx = params.omega_z, params.omega_x
    return 0.25 * tz * (discriminant(params, p) - (wx - wz) + 2.0 * wx * (1.0 - p))
