"""Stroke-level simulation of qubit Otto cycles.

Three cycle variants share strokes I (thermalize at the sigma_z
Hamiltonian), II (unitary drive) and IV (reversed drive); they differ in
stroke III, which is either a hot-bath thermalization, a non-selective
projective measurement, or a non-selective generalized measurement
realized by a joint unitary with a qubit auxiliary followed by a
projective measurement on the auxiliary.

Sign convention: energy changes in strokes II/IV are work, in strokes
I/III heat, and the reported total work is w_total = -(w1 + w2), positive
when the cycle delivers work.  Efficiency is w_total / q_h and is left
undefined (None) unless both q_h and w_total are positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .qmat import ID2, KET_MINUS, KET_PLUS, SIGMA_X, SIGMA_Z

LN2 = math.log(2.0)

TWO_PI = 2.0 * math.pi

# Works and heats below this are treated as zero when deciding whether the
# cycle ran as an engine, so rounding noise cannot fabricate an efficiency.
ENGINE_TOL = 1e-12


@dataclass(frozen=True)
class EngineParams:
    """Physical setup: level splittings and bath inverse temperatures.

    ``omega_z`` and ``omega_x`` are the spectral gaps of the two stroke
    Hamiltonians (units of the reference frequency); the engine condition
    requires omega_x > omega_z > 0.  ``beta_h`` is only meaningful for the
    conventional two-bath cycle and may be omitted otherwise.
    """

    omega_z: float
    omega_x: float
    beta_c: float
    beta_h: float | None = None

    def __post_init__(self):
        if not (self.omega_x > self.omega_z > 0.0):
            raise ValueError(
                f"engine condition omega_x > omega_z > 0 violated: "
                f"omega_x={self.omega_x}, omega_z={self.omega_z}"
            )
        if not self.beta_c > 0.0:
            raise ValueError(f"beta_c must be positive, got {self.beta_c}")
        if self.beta_h is not None and not (0.0 <= self.beta_h < self.beta_c):
            raise ValueError(f"beta_h must satisfy 0 <= beta_h < beta_c, got {self.beta_h}")

    @property
    def v_z(self) -> float:
        return 0.5 * self.beta_c * self.omega_z

    @property
    def v_x(self) -> float:
        if self.beta_h is None:
            raise ValueError("beta_h is not set")
        return 0.5 * self.beta_h * self.omega_x

    @property
    def tau_z(self) -> float:
        return math.tanh(self.v_z)

    @property
    def tau_x(self) -> float:
        return math.tanh(self.v_x)

    @property
    def gamma(self) -> float:
        """Compression ratio omega_x / omega_z."""
        return self.omega_x / self.omega_z


@dataclass(frozen=True)
class DriveSpec:
    """Drive-stroke parametrization: transition probability p and phase alpha.

    p = 1 is the adiabatic limit; p in [1/2, 1) is the non-adiabatic regime.
    """

    p: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (0.5 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [1/2, 1], got {self.p}")
        if not (0.0 <= self.alpha < TWO_PI):
            raise ValueError(f"alpha must lie in [0, 2*pi), got {self.alpha}")


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal qubit basis on the Bloch sphere whose poles are |+> and |->.

    theta_x is the polar and phi_x the azimuthal angle; theta_x = 0 gives
    the {|+>, |->} basis and theta_x = pi/2, phi_x = 0 the computational one.
    """

    theta_x: float
    phi_x: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta_x <= math.pi):
            raise ValueError(f"theta_x must lie in [0, pi], got {self.theta_x}")
        if not (0.0 <= self.phi_x < TWO_PI):
            raise ValueError(f"phi_x must lie in [0, 2*pi), got {self.phi_x}")

    def kets(self) -> tuple[np.ndarray, np.ndarray]:
        c = math.cos(0.5 * self.theta_x)
        s = math.sin(0.5 * self.theta_x)
        phase = np.exp(1.0j * self.phi_x)
        return c * KET_PLUS + phase * s * KET_MINUS, s * KET_PLUS - phase * c * KET_MINUS

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        kp, km = self.kets()
        return np.outer(kp, kp.conj()), np.outer(km, km.conj())


def _plus_projector() -> np.ndarray:
    return np.outer(KET_PLUS, KET_PLUS.conj())


@dataclass(frozen=True)
class PovmSpec:
    """Two-outcome generalized measurement given as a dilation.

    The auxiliary starts in ``aux_state`` (pure |+><+| by default), the
    joint unitary acts on (system x auxiliary), and the outcome projectors
    act on the auxiliary in ``aux_basis``.  The induced Kraus operators
    must resolve the identity within UNITARY_TOL.
    """

    joint_unitary: np.ndarray
    aux_state: np.ndarray = field(default_factory=_plus_projector)
    aux_basis: MeasurementBasis = MeasurementBasis(0.0, 0.0)

    def __post_init__(self):
        u = qmat.validate_unitary(self.joint_unitary, name="joint_unitary").copy()
        if u.shape != (4, 4):
            raise ValueError(f"joint_unitary must be 4x4, got {u.shape}")
        rho_a = qmat.validate_density_matrix(self.aux_state, name="aux_state").copy()
        if rho_a.shape != (2, 2):
            raise ValueError(f"aux_state must be 2x2, got {rho_a.shape}")
        u.setflags(write=False)
        rho_a.setflags(write=False)
        object.__setattr__(self, "joint_unitary", u)
        object.__setattr__(self, "aux_state", rho_a)
        self.validate_kraus()

    def kraus_operators(self) -> list[np.ndarray]:
        """Induced system Kraus operators, one per (outcome, auxiliary eigenstate).

        For a pure auxiliary this is the familiar two-operator family
        K_i = <psi_i| V |a>; mixed auxiliaries contribute one operator per
        nonzero spectral weight, scaled by its square root.
        """
        v4 = self.joint_unitary.reshape(2, 2, 2, 2)
        weights, states = qmat.hermitian_eig(self.aux_state)
        ops = []
        for ket_out in self.aux_basis.kets():
            for w, phi in zip(weights, states.T):
                if w <= 1e-14:
                    continue
                k = np.einsum("a,satb,b->st", ket_out.conj(), v4, phi)
                ops.append(math.sqrt(w) * k)
        return ops

    def validate_kraus(self) -> None:
        total = sum(k.conj().T @ k for k in self.kraus_operators())
        if np.max(np.abs(total - ID2)) > qmat.UNITARY_TOL:
            raise ValueError("induced Kraus operators do not resolve the identity")


@dataclass(frozen=True)
class CycleRecord:
    """Per-cycle thermodynamic ledger.

    Energies e0..e3 are the working-substance energies after strokes
    I..IV; w1/w2 are the stroke works, q_c/q_h the stroke heats.  ``eta``
    is None whenever the cycle does not operate as an engine.  The two
    aux_* fields are nonzero only for generalized-measurement cycles.
    """

    e0: float
    e1: float
    e2: float
    e3: float
    w1: float
    w2: float
    w_total: float
    q_c: float
    q_h: float
    eta: float | None
    aux_entropy: float = 0.0
    aux_reset_cost: float = 0.0

    @property
    def net_work(self) -> float:
        """Delivered work after paying the auxiliary reset cost."""
        return self.w_total - self.aux_reset_cost

    @property
    def first_law_residual(self) -> float:
        return abs(self.q_h + self.q_c - self.w_total)


def hamiltonian_h1(params: EngineParams) -> np.ndarray:
    """Stroke-I/IV Hamiltonian (omega_z / 2) sigma_z."""
    return 0.5 * params.omega_z * SIGMA_Z


def hamiltonian_h2(params: EngineParams) -> np.ndarray:
    """Stroke-II/III Hamiltonian (omega_x / 2) sigma_x."""
    return 0.5 * params.omega_x * SIGMA_X


def thermal_state(h, beta: float) -> np.ndarray:
    """Gibbs state exp(-beta h) / Z, computed in the eigenbasis of h."""
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    vals, vecs = qmat.hermitian_eig(h)
    weights = np.exp(-beta * (vals - vals.min()))  # shift guards overflow at large beta
    weights /= weights.sum()
    return (vecs * weights) @ vecs.conj().T


def drive_unitary(drive: DriveSpec) -> np.ndarray:
    """Drive-stroke unitary: maps |0> to sqrt(p)|+> + e^{i alpha} sqrt(1-p)|->."""
    rp = math.sqrt(drive.p)
    rq = math.sqrt(1.0 - drive.p)
    phase = np.exp(1.0j * drive.alpha)
    u = np.array(
        [[rp + phase * rq, rq - phase * rp], [rp - phase * rq, rq + phase * rp]],
        dtype=complex,
    ) / math.sqrt(2.0)
    return u


def pvm_stroke(rho, basis: MeasurementBasis) -> np.ndarray:
    """Non-selective projective measurement: rho -> sum_i P_i rho P_i."""
    r = qmat.validate_density_matrix(rho)
    pp, pm = basis.projectors()
    return pp @ r @ pp + pm @ r @ pm


def _povm_stroke_raw(rho, povm: PovmSpec) -> tuple[np.ndarray, np.ndarray]:
    # Dilate, rotate, dephase the auxiliary, return both marginals. No input checks.
    joint = np.kron(rho, povm.aux_state)
    v = povm.joint_unitary
    rotated = v @ joint @ v.conj().T
    pp, pm = povm.aux_basis.projectors()
    jp = np.kron(ID2, pp)
    jm = np.kron(ID2, pm)
    dephased = jp @ rotated @ jp + jm @ rotated @ jm
    reshaped = dephased.reshape(2, 2, 2, 2)
    return reshaped.trace(axis1=1, axis2=3), reshaped.trace(axis1=0, axis2=2)


def povm_stroke(rho, povm: PovmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Non-selective generalized measurement via the auxiliary dilation.

    Returns ``(system, aux_post)``, the marginals of the joint state after
    the auxiliary has been measured without post-selection.  The system
    marginal equals sum_i K_i rho K_i^dag for the induced Kraus family.
    """
    r = qmat.validate_density_matrix(rho)
    povm.validate_kraus()
    return _povm_stroke_raw(r, povm)


def _expect(h: np.ndarray, rho: np.ndarray) -> float:
    return float(np.trace(h @ rho).real)


def _make_record(e0, e1, e2, e3, aux_entropy=0.0, aux_reset_cost=0.0) -> CycleRecord:
    w1 = e1 - e0
    w2 = e3 - e2
    w_total = -(w1 + w2)
    q_h = e2 - e1
    q_c = e0 - e3
    eta = w_total / q_h if (q_h > ENGINE_TOL and w_total > ENGINE_TOL) else None
    return CycleRecord(
        e0=e0, e1=e1, e2=e2, e3=e3, w1=w1, w2=w2, w_total=w_total,
        q_c=q_c, q_h=q_h, eta=eta,
        aux_entropy=aux_entropy, aux_reset_cost=aux_reset_cost,
    )


def _strokes_i_ii(params: EngineParams, drive: DriveSpec):
    h1 = hamiltonian_h1(params)
    h2 = hamiltonian_h2(params)
    rho0 = thermal_state(h1, params.beta_c)
    u = drive_unitary(drive)
    rho1 = u @ rho0 @ u.conj().T
    return h1, h2, rho0, rho1, u


def run_conventional_cycle(params: EngineParams, drive: DriveSpec) -> CycleRecord:
    """Two-bath cycle: stroke III thermalizes at the hot inverse temperature.

    Stroke IV applies the reversed drive (the adjoint of the stroke-II
    unitary), so one drive parametrizes both work strokes.
    """
    if params.beta_h is None:
        raise ValueError("the conventional cycle requires beta_h")
    h1, h2, rho0, rho1, u = _strokes_i_ii(params, drive)
    rho2 = thermal_state(h2, params.beta_h)
    rho3 = u.conj().T @ rho2 @ u
    return _make_record(
        _expect(h1, rho0), _expect(h2, rho1), _expect(h2, rho2), _expect(h1, rho3)
    )


def run_pvm_cycle(params: EngineParams, drive: DriveSpec, basis: MeasurementBasis) -> CycleRecord:
    """Measurement-fueled cycle: stroke III is a non-selective projective measurement."""
    h1, h2, rho0, rho1, u = _strokes_i_ii(params, drive)
    rho2 = pvm_stroke(rho1, basis)
    rho3 = u.conj().T @ rho2 @ u
    return _make_record(
        _expect(h1, rho0), _expect(h2, rho1), _expect(h2, rho2), _expect(h1, rho3)
    )


def run_povm_cycle(
    params: EngineParams,
    drive: DriveSpec,
    povm: PovmSpec,
    reset_temperature: float | None = None,
) -> CycleRecord:
    """Generalized-measurement cycle with the auxiliary reset cost accounted.

    The auxiliary carries a trivial Hamiltonian, so its state changes cost
    no energy during the stroke itself; the only auxiliary cost is the
    erasure work T * S * ln 2 (S in bits) needed to reinitialize it, paid
    against the bath at ``reset_temperature`` (the cold-bath temperature
    1/beta_c unless overridden).
    """
    if reset_temperature is None:
        reset_temperature = 1.0 / params.beta_c
    if reset_temperature < 0.0:
        raise ValueError(f"reset_temperature must be nonnegative, got {reset_temperature}")
    h1, h2, rho0, rho1, u = _strokes_i_ii(params, drive)
    rho2, aux_post = povm_stroke(rho1, povm)
    rho3 = u.conj().T @ rho2 @ u
    aux_entropy = qmat.von_neumann_entropy(aux_post)
    return _make_record(
        _expect(h1, rho0), _expect(h2, rho1), _expect(h2, rho2), _expect(h1, rho3),
        aux_entropy=aux_entropy,
        aux_reset_cost=reset_temperature * LN2 * aux_entropy,
    )
