"""
Exchange Hamiltonians, single-qubit pulses and refocusing algebra
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ContractViolation, ScheduleError
from .smallmat import PAULI, ComplexMatrix, as_complex, kron, unitary_exp

SCHEDULE_TOL = 1e-12
SU2_TOL = 1e-10

AXES = ("x", "y", "z")


class ModelKind(str, Enum):
    ISING = "ising"
    XY = "xy"
    XXZ = "xxz"
    HEISENBERG = "heisenberg"
    XYZ = "xyz"


def spin_operator(axis: str) -> ComplexMatrix:
    """S_axis = sigma_axis / 2"""
    if axis not in AXES:
        raise ContractViolation(f"unknown axis {axis!r}")
    return PAULI[axis] / 2


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ContractViolation(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class ExchangeCouplings:
    """Diagonal exchange couplings (J_x, J_y, J_z)"""

    jx: float
    jy: float
    jz: float

    def __post_init__(self):
        for name in ("jx", "jy", "jz"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))

    @property
    def model(self) -> ModelKind:
        jx, jy, jz = self.jx, self.jy, self.jz
        if jx == 0 and jy == 0 and jz != 0:
            return ModelKind.ISING
        if jx == jy and jx != 0:
            if jz == 0:
                return ModelKind.XY
            if jz == jx:
                return ModelKind.HEISENBERG
            return ModelKind.XXZ
        return ModelKind.XYZ

    def angles(self, tau: float) -> "ExchangeAngles":
        return ExchangeAngles(self.jx * tau, self.jy * tau, self.jz * tau)

    @property
    def asymmetry(self) -> float:
        """Delta = (J_x - J_y) / (J_x + J_y)"""
        total = self.jx + self.jy
        if total == 0:
            raise ContractViolation("asymmetry undefined for J_x + J_y = 0")
        return (self.jx - self.jy) / total


@dataclass(frozen=True)
class ExchangeAngles:
    """Rotation angles theta_x = J_x tau, theta_y = J_y tau, phi = J_z tau

    Angles multiply S_a S_a (S = sigma/2); use ``from_pauli_angles`` for
    coefficients of sigma_a sigma_a.
    """

    theta_x: float
    theta_y: float
    phi: float

    def __post_init__(self):
        for name in ("theta_x", "theta_y", "phi"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))

    @property
    def theta_plus(self) -> float:
        return self.theta_x + self.theta_y

    @property
    def theta_minus(self) -> float:
        return self.theta_x - self.theta_y

    @classmethod
    def from_sum_difference(cls, theta_plus: float, theta_minus: float, phi: float = 0.0) -> "ExchangeAngles":
        return cls(0.5 * (theta_plus + theta_minus), 0.5 * (theta_plus - theta_minus), phi)

    @classmethod
    def from_pauli_angles(cls, vartheta_x: float, vartheta_y: float, vartheta_z: float = 0.0) -> "ExchangeAngles":
        return cls(4.0 * vartheta_x, 4.0 * vartheta_y, 4.0 * vartheta_z)


@dataclass(frozen=True)
class PulseSpec:
    """Single-qubit rotation exp(-i angle S_axis) on one qubit"""

    axis: str
    qubit: int
    angle: float

    def __post_init__(self):
        if self.axis not in AXES:
            raise ContractViolation(f"pulse axis must be one of {AXES}, got {self.axis!r}")
        if self.qubit not in (1, 2):
            raise ContractViolation(f"qubit index must be 1 or 2, got {self.qubit!r}")
        object.__setattr__(self, "angle", _finite("angle", self.angle))


@dataclass(frozen=True)
class RefocusSchedule:
    """Always-on Ising refocusing: free evolution J tau1, pulse, free evolution J(tau2 - tau1)"""

    j_tau1: float = 3.0 * math.pi / 4.0
    j_tau2: float = math.pi / 2.0
    pulse_angle: float = math.pi

    def __post_init__(self):
        for name in ("j_tau1", "j_tau2", "pulse_angle"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        residual = 2.0 * self.j_tau1 - self.j_tau2 - math.pi
        if abs(residual) > SCHEDULE_TOL:
            raise ScheduleError(
                f"schedule needs 2*J*tau1 - J*tau2 = pi, got residual {residual:.3e} "
                f"for (J*tau1, J*tau2) = ({self.j_tau1}, {self.j_tau2})"
            )
        if abs(self.j_tau2 - self.j_tau1) <= SCHEDULE_TOL:
            raise ScheduleError("J*tau2 = J*tau1 leaves nothing to refocus; pulse noise would be invisible")

    @classmethod
    def through(cls, j_tau1: float, pulse_angle: float = math.pi) -> "RefocusSchedule":
        """Valid schedule with the given first segment"""
        return cls(j_tau1, 2.0 * j_tau1 - math.pi, pulse_angle)

    def with_pulse_angle(self, pulse_angle: float) -> "RefocusSchedule":
        return replace(self, pulse_angle=pulse_angle)


def single_qubit_rotation(axis: str, angle: float) -> ComplexMatrix:
    """exp(-i angle S_axis) as a 2x2 operator"""
    half = 0.5 * float(angle)
    return ComplexMatrix(math.cos(half) * PAULI["i"].data - 1j * math.sin(half) * spin_operator(axis).data * 2)


def embed(op: ComplexMatrix, qubit: int) -> ComplexMatrix:
    """Single-qubit operator acting on ``qubit``, identity on the other"""
    if qubit == 1:
        return kron(op, PAULI["i"])
    if qubit == 2:
        return kron(PAULI["i"], op)
    raise ContractViolation(f"qubit index must be 1 or 2, got {qubit!r}")


def exchange_hamiltonian(c: ExchangeCouplings) -> ComplexMatrix:
    """H = sum_a J_a S_a^1 S_a^2"""
    h = np.zeros((4, 4), dtype=np.complex128)
    for axis, coupling in zip(AXES, (c.jx, c.jy, c.jz)):
        s = spin_operator(axis)
        h += coupling * kron(s, s).data
    return ComplexMatrix(h)


def exchange_unitary(a: ExchangeAngles) -> ComplexMatrix:
    """Closed form of exp(-i (theta_x SxSx + theta_y SySy + phi SzSz))

    Block diagonal: {|00>,|11>} mixes by theta_minus/4 with phase e^{-i phi/4},
    {|01>,|10>} mixes by theta_plus/4 with phase e^{+i phi/4}.
    """
    u = np.zeros((4, 4), dtype=np.complex128)
    outer = np.exp(-0.25j * a.phi)
    inner = np.exp(0.25j * a.phi)
    cm, sm = math.cos(0.25 * a.theta_minus), math.sin(0.25 * a.theta_minus)
    cp, sp = math.cos(0.25 * a.theta_plus), math.sin(0.25 * a.theta_plus)
    u[0, 0] = u[3, 3] = outer * cm
    u[0, 3] = u[3, 0] = -1j * outer * sm
    u[1, 1] = u[2, 2] = inner * cp
    u[1, 2] = u[2, 1] = -1j * inner * sp
    return ComplexMatrix(u)


def zz_unitary(angle: float) -> ComplexMatrix:
    """exp(-i angle S_z^1 S_z^2) = exp(-i (angle/4) sigma_z^1 sigma_z^2)"""
    return exchange_unitary(ExchangeAngles(0.0, 0.0, angle))


def pulse_unitary(p: PulseSpec) -> ComplexMatrix:
    return embed(single_qubit_rotation(p.axis, p.angle), p.qubit)


@dataclass(frozen=True, eq=False)
class Su2Triple:
    """Single-qubit generators (Z, X, Y) with [X, Y] = iZ and cyclic permutations"""

    z: ComplexMatrix
    x: ComplexMatrix
    y: ComplexMatrix

    def __post_init__(self):
        for op in (self.z, self.x, self.y):
            if op.dim != 2:
                raise ContractViolation("su(2) triple generators must be single-qubit operators")
        pairs = ((self.x, self.y, self.z), (self.y, self.z, self.x), (self.z, self.x, self.y))
        for first, second, third in pairs:
            commutator = first @ second - second @ first
            if not commutator.is_close(third * 1j, SU2_TOL):
                raise ContractViolation("operators do not satisfy su(2) commutation relations")

    @classmethod
    def about(cls, axis: str) -> "Su2Triple":
        """Angular-momentum triple whose Z is S_axis"""
        k = AXES.index(axis) if axis in AXES else -1
        if k < 0:
            raise ContractViolation(f"unknown axis {axis!r}")
        z, x, y = (spin_operator(AXES[(k + shift) % 3]) for shift in range(3))
        return cls(z=z, x=x, y=y)


def conjugate(operator: ComplexMatrix, angle: float, generator: ComplexMatrix) -> ComplexMatrix:
    """exp(-i angle G) A exp(i angle G)"""
    if operator.dim != generator.dim:
        raise ContractViolation("operator and generator dimensions differ")
    rot = unitary_exp(generator, angle)
    return rot @ operator @ rot.adjoint()


def conjugate_generator(z_angle: float, triple: Su2Triple, target_qubit: Optional[int] = None) -> ComplexMatrix:
    """C_Z^phi o X = X cos(phi) + Y sin(phi), optionally embedded on a qubit"""
    rotated = conjugate(triple.x, z_angle, triple.z)
    return rotated if target_qubit is None else embed(rotated, target_qubit)


def conjugated_exponential(z_angle: float, theta: float, triple: Su2Triple,
                           target_qubit: Optional[int] = None) -> ComplexMatrix:
    """C_Z^phi o exp(i theta X) = exp(i theta (X cos phi + Y sin phi))"""
    rotated = conjugate_generator(z_angle, triple)
    gate = unitary_exp(rotated, -as_complex(theta).real)
    return gate if target_qubit is None else embed(gate, target_qubit)


def refocus_product(j_tau1: float, j_tau2: float, pulse_angle: float) -> ComplexMatrix:
    """exp(-i th S_x^1) exp(-i (Jt2 - Jt1) SzSz) exp(i th S_x^1) exp(-i Jt1 SzSz)

    No schedule check; noisy segment lengths go through here.
    """
    pulse = pulse_unitary(PulseSpec("x", 1, pulse_angle))
    return pulse @ zz_unitary(j_tau2 - j_tau1) @ pulse.adjoint() @ zz_unitary(j_tau1)


def refocused_unitary(s: RefocusSchedule) -> ComplexMatrix:
    return refocus_product(s.j_tau1, s.j_tau2, s.pulse_angle)
