"""
Angle-noise distributions and noise-averaged state transformations

Every gate family used by the scenarios is a trigonometric polynomial in its
noisy angle, so a noise average reduces to weighting each harmonic by the
characteristic function of the angle distribution. Three interchangeable
evaluation methods produce those weights: the exact characteristic function,
Gauss quadrature, and Monte Carlo sampling.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss

from .errors import ContractViolation, HarmonicFitError
from .smallmat import ALLOWED_DIMS, ComplexMatrix, DensityMatrix

# Multipliers live on a quarter grid up to +-2, so 8*pi is a common period
HARMONIC_STEP = 0.25
MAX_MULTIPLIER = 2.0
FIT_SAMPLES = 32
FIT_PERIOD = 8.0 * math.pi
FIT_TOL = 1e-10
TERM_FLOOR = 1e-13
HERMITIAN_TERM_TOL = 1e-12

DEFAULT_HERMITE_NODES = 61
DEFAULT_LAGUERRE_NODES = 64

_OFF_GRID_PROBES = (0.3711, 1.9042, 2.7183, 4.4417, 6.0012, 7.7301, 13.1309)


class DistributionKind(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class AngleDistribution:
    """Distribution of a noisy control angle

    Gaussian width is the standard deviation. Laplace width is the scale w of
    the density (1/4w) exp(-|x - mean| / 2w); its standard deviation is
    2*sqrt(2)*w.
    """

    kind: DistributionKind
    mean: float
    width: float

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        mean, width = float(self.mean), float(self.width)
        if not math.isfinite(mean):
            raise ContractViolation(f"distribution mean must be finite, got {mean}")
        if not math.isfinite(width) or width < 0:
            raise ContractViolation(f"distribution width must be finite and >= 0, got {width}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "width", width)

    @classmethod
    def gaussian(cls, mean: float, sd: float) -> "AngleDistribution":
        return cls(DistributionKind.GAUSSIAN, mean, sd)

    @classmethod
    def laplace(cls, mean: float, scale: float) -> "AngleDistribution":
        return cls(DistributionKind.LAPLACE, mean, scale)

    @property
    def deterministic(self) -> bool:
        return self.width == 0.0

    @property
    def standard_deviation(self) -> float:
        if self.kind is DistributionKind.LAPLACE:
            return 2.0 * math.sqrt(2.0) * self.width
        return self.width

    def with_mean(self, mean: float) -> "AngleDistribution":
        return AngleDistribution(self.kind, mean, self.width)


# Averaging methods


@dataclass(frozen=True)
class ClosedForm:
    label = "closed-form"


@dataclass(frozen=True)
class Quadrature:
    nodes: int = DEFAULT_HERMITE_NODES
    laguerre_nodes: int = DEFAULT_LAGUERRE_NODES
    label = "quadrature"

    def __post_init__(self):
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ContractViolation(f"quadrature nodes must be odd and >= 3, got {self.nodes}")
        if self.laguerre_nodes < 1:
            raise ContractViolation(f"Laguerre nodes must be >= 1, got {self.laguerre_nodes}")


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int = 0
    task_index: int = 0
    label = "monte-carlo"

    def __post_init__(self):
        if self.samples < 1:
            raise ContractViolation(f"Monte Carlo needs at least one sample, got {self.samples}")
        if self.seed < 0 or self.task_index < 0:
            raise ContractViolation("seed and task index must be non-negative")

    def for_task(self, task_index: int) -> "MonteCarlo":
        return MonteCarlo(self.samples, self.seed, task_index)


AveragingMethod = Union[ClosedForm, Quadrature, MonteCarlo]


def method_label(m: AveragingMethod) -> str:
    if isinstance(m, Quadrature):
        return f"quadrature({m.nodes})"
    if isinstance(m, MonteCarlo):
        return f"monte-carlo({m.samples})"
    return m.label


def characteristic_weight(d: AngleDistribution, t: float) -> complex:
    """E[exp(i t angle)] under the distribution"""
    t = float(t)
    shift = complex(math.cos(t * d.mean), math.sin(t * d.mean))
    if d.kind is DistributionKind.GAUSSIAN:
        return shift * math.exp(-0.5 * (t * d.width) ** 2)
    return shift / (1.0 + 4.0 * (d.width * t) ** 2)


# Random streams


def substream(seed: int, task_index: int = 0, stage: int = 0) -> np.random.Generator:
    """Independent generator for (seed, task, stage), stable under any scheduling"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(task_index), int(stage)))
    return np.random.Generator(np.random.PCG64(sequence))


def sample_angles(d: AngleDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    if size < 1:
        raise ContractViolation(f"sample size must be >= 1, got {size}")
    if d.deterministic:
        return np.full(size, d.mean)
    if d.kind is DistributionKind.GAUSSIAN:
        return rng.normal(d.mean, d.width, size)
    return rng.laplace(d.mean, 2.0 * d.width, size)


def sample_angle(d: AngleDistribution, rng: np.random.Generator) -> float:
    return float(sample_angles(d, rng, 1)[0])


# Harmonic families


def _as_operator(value) -> np.ndarray:
    arr = value.data if isinstance(value, (ComplexMatrix, DensityMatrix)) else np.asarray(value, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in ALLOWED_DIMS:
        raise ContractViolation(f"family values must be 2x2 or 4x4 operators, got shape {arr.shape}")
    return arr


def _harmonic_grid() -> np.ndarray:
    steps = int(round(MAX_MULTIPLIER / HARMONIC_STEP))
    return np.arange(-steps, steps + 1) * HARMONIC_STEP


def fit_harmonics(fn: Callable[[float], np.ndarray],
                  shape: Optional[Tuple[int, ...]] = None) -> Tuple[Tuple[float, np.ndarray], ...]:
    """Recover fn(x) = sum_t exp(i t x) C_t for t on the quarter grid

    Samples one 8*pi period, takes a DFT and checks the reconstruction at
    off-grid angles. Raises HarmonicFitError when fn is not such a polynomial.
    """
    angles = np.arange(FIT_SAMPLES) * (FIT_PERIOD / FIT_SAMPLES)
    values = np.stack([np.asarray(fn(float(x)), dtype=np.complex128) for x in angles])
    if shape is not None and values.shape[1:] != tuple(shape):
        raise ContractViolation(f"family produced shape {values.shape[1:]}, expected {shape}")
    spectrum = np.fft.fft(values, axis=0) / FIT_SAMPLES

    terms = []
    for t in _harmonic_grid():
        k = int(round(t / HARMONIC_STEP)) % FIT_SAMPLES
        coeff = spectrum[k]
        if float(np.max(np.abs(coeff))) > TERM_FLOOR:
            terms.append((float(t), coeff.copy()))

    for x in _OFF_GRID_PROBES:
        approx = sum((np.exp(1j * t * x) * c for t, c in terms), np.zeros(values.shape[1:], dtype=np.complex128))
        err = float(np.max(np.abs(approx - np.asarray(fn(x), dtype=np.complex128))))
        if err > FIT_TOL:
            raise HarmonicFitError(
                f"family is not a trigonometric polynomial with multipliers in "
                f"[-{MAX_MULTIPLIER}, {MAX_MULTIPLIER}] step {HARMONIC_STEP} (residual {err:.3e} at {x})"
            )
    logger.debug(f"Fitted {len(terms)} harmonics, multipliers {[t for t, _ in terms]}")
    return tuple(terms)


@dataclass(frozen=True, eq=False)
class HarmonicFamily:
    """State family x -> rho(x) = sum_t exp(i t x) C_t, or an opaque evaluator"""

    terms: Tuple[Tuple[float, np.ndarray], ...] = ()
    evaluator: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        if not self.terms and self.evaluator is None:
            raise ContractViolation("harmonic family needs terms or an evaluator")
        clean = []
        for t, coeff in self.terms:
            t = float(t)
            if not math.isfinite(t):
                raise ContractViolation(f"harmonic multiplier must be finite, got {t}")
            clean.append((t, _as_operator(coeff)))
        object.__setattr__(self, "terms", tuple(clean))
        if clean:
            self._check_hermitian_pairs()

    def _check_hermitian_pairs(self) -> None:
        by_t: Dict[float, np.ndarray] = {t: c for t, c in self.terms}
        for t, coeff in self.terms:
            partner = by_t.get(-t)
            mirror = coeff.conj().T
            if partner is None:
                if float(np.max(np.abs(mirror))) > HERMITIAN_TERM_TOL:
                    raise ContractViolation(f"harmonic {t} has no Hermitian partner at {-t}")
            elif float(np.max(np.abs(partner - mirror))) > HERMITIAN_TERM_TOL:
                raise ContractViolation(f"C({-t}) is not the adjoint of C({t})")

    @classmethod
    def from_evaluator(cls, fn: Callable[[float], np.ndarray]) -> "HarmonicFamily":
        return cls(evaluator=fn)

    @property
    def has_terms(self) -> bool:
        return bool(self.terms)

    @property
    def dim(self) -> int:
        if self.terms:
            return self.terms[0][1].shape[0]
        return _as_operator(self.evaluator(0.0)).shape[0]

    @property
    def multipliers(self) -> Tuple[float, ...]:
        return tuple(t for t, _ in self.terms)

    def at(self, angle: float) -> np.ndarray:
        if self.terms:
            return sum((np.exp(1j * t * angle) * c for t, c in self.terms),
                       np.zeros((self.dim, self.dim), dtype=np.complex128))
        return _as_operator(self.evaluator(float(angle)))

    def fitted(self) -> "HarmonicFamily":
        """Same family with explicit terms, fitting the evaluator if needed"""
        if self.terms:
            return self
        return HarmonicFamily(terms=fit_harmonics(lambda x: _as_operator(self.evaluator(x))))

    def combine(self, weights: Dict[float, complex]) -> np.ndarray:
        return sum((weights[t] * c for t, c in self.terms),
                   np.zeros((self.dim, self.dim), dtype=np.complex128))


# Weights and node sets


@lru_cache(maxsize=32)
def _hermite_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = hermgauss(nodes)
    return x, w / math.sqrt(math.pi)


@lru_cache(maxsize=32)
def _laguerre_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return laggauss(nodes)


def quadrature_rule(d: AngleDistribution, m: Quadrature) -> Tuple[np.ndarray, np.ndarray]:
    """Angles and probability weights approximating the distribution"""
    if d.deterministic:
        return np.array([d.mean]), np.array([1.0])
    if d.kind is DistributionKind.GAUSSIAN:
        x, w = _hermite_rule(m.nodes)
        return d.mean + math.sqrt(2.0) * d.width * x, w
    u, w = _laguerre_rule(m.laguerre_nodes)
    b = 2.0 * d.width
    return np.concatenate([d.mean + b * u, d.mean - b * u]), np.concatenate([0.5 * w, 0.5 * w])


def _harmonic_weights(multipliers: Iterable[float], d: AngleDistribution, m: AveragingMethod,
                      rng: Optional[np.random.Generator], stage: int) -> Dict[float, complex]:
    positive = sorted({abs(t) for t in multipliers})
    weights: Dict[float, complex] = {}
    if d.deterministic:
        for t in positive:
            weights[t] = complex(np.exp(1j * t * d.mean))
    elif isinstance(m, ClosedForm):
        for t in positive:
            weights[t] = characteristic_weight(d, t)
    elif isinstance(m, Quadrature):
        angles, w = quadrature_rule(d, m)
        for t in positive:
            weights[t] = complex(np.dot(w, np.exp(1j * t * angles)))
    elif isinstance(m, MonteCarlo):
        gen = rng if rng is not None else substream(m.seed, m.task_index, stage)
        angles = sample_angles(d, gen, m.samples)
        for t in positive:
            weights[t] = complex(np.mean(np.exp(1j * t * angles)))
    else:
        raise ContractViolation(f"unknown averaging method {m!r}")
    weights[0.0] = 1.0 + 0.0j
    for t in positive:
        weights[-t] = weights[t].conjugate()
    return weights


def _direct_average(f: HarmonicFamily, d: AngleDistribution, m: AveragingMethod,
                    rng: Optional[np.random.Generator], stage: int) -> np.ndarray:
    if isinstance(m, Quadrature):
        angles, w = quadrature_rule(d, m)
    elif isinstance(m, MonteCarlo):
        gen = rng if rng is not None else substream(m.seed, m.task_index, stage)
        angles = sample_angles(d, gen, m.samples)
        w = np.full(angles.shape, 1.0 / angles.size)
    else:
        raise HarmonicFitError("closed-form averaging needs a harmonic family")
    total = np.zeros((f.dim, f.dim), dtype=np.complex128)
    for angle, weight in zip(angles, w):
        total += weight * f.at(float(angle))
    return total


def average_matrix(f: HarmonicFamily, d: AngleDistribution, m: AveragingMethod,
                   rng: Optional[np.random.Generator] = None, stage: int = 0) -> np.ndarray:
    """Noise average of a family as a raw operator (any allowed dimension)"""
    if d.deterministic:
        return f.at(d.mean)
    family = f
    if not f.has_terms:
        try:
            family = f.fitted()
        except HarmonicFitError:
            if isinstance(m, ClosedForm):
                raise
            logger.debug("Opaque family is not band-limited; averaging by direct evaluation")
            return _direct_average(f, d, m, rng, stage)
    return family.combine(_harmonic_weights(family.multipliers, d, m, rng, stage))


def average_state(f: HarmonicFamily, d: AngleDistribution, m: AveragingMethod,
                  rng: Optional[np.random.Generator] = None, stage: int = 0) -> DensityMatrix:
    """Noise-averaged two-qubit state E[rho(angle)]"""
    avg = average_matrix(f, d, m, rng, stage)
    if avg.shape != (4, 4):
        raise ContractViolation(f"average_state needs a two-qubit family, got shape {avg.shape}")
    drift = abs(np.trace(avg) - 1.0)
    if drift > 1e-14:
        logger.debug(f"Renormalizing averaged state, trace drift {drift:.3e}")
    return DensityMatrix(avg)


# Unitary channels


def superoperator(u: ComplexMatrix) -> np.ndarray:
    """Row-major vectorization of rho -> U rho U^dagger"""
    return np.kron(u.data, u.data.conj())


@dataclass(frozen=True)
class UnitaryFamily:
    """Gate family angle -> U(angle); equality and caching by (name, params)"""

    name: str
    params: Tuple[float, ...] = ()
    build: Callable[[float], ComplexMatrix] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.build is None:
            raise ContractViolation(f"unitary family {self.name!r} has no builder")

    def unitary(self, angle: float) -> ComplexMatrix:
        return self.build(float(angle))

    def harmonics(self) -> Tuple[Tuple[float, np.ndarray], ...]:
        return _superoperator_harmonics(self)

    def family(self, rho: DensityMatrix) -> HarmonicFamily:
        vec = rho.data.reshape(-1)
        dim = rho.data.shape[0]
        terms = tuple((t, (s @ vec).reshape(dim, dim)) for t, s in self.harmonics())
        return HarmonicFamily(terms=terms)

    def averaged_superoperator(self, d: AngleDistribution, m: AveragingMethod,
                               rng: Optional[np.random.Generator] = None, stage: int = 0) -> np.ndarray:
        if d.deterministic:
            return superoperator(self.unitary(d.mean))
        terms = self.harmonics()
        weights = _harmonic_weights([t for t, _ in terms], d, m, rng, stage)
        return sum((weights[t] * s for t, s in terms), np.zeros_like(terms[0][1]))

    def apply_averaged(self, rho: DensityMatrix, d: AngleDistribution, m: AveragingMethod,
                       rng: Optional[np.random.Generator] = None, stage: int = 0) -> DensityMatrix:
        channel = self.averaged_superoperator(d, m, rng, stage)
        dim = rho.data.shape[0]
        return DensityMatrix((channel @ rho.data.reshape(-1)).reshape(dim, dim))


@lru_cache(maxsize=256)
def _superoperator_harmonics(family: UnitaryFamily) -> Tuple[Tuple[float, np.ndarray], ...]:
    logger.debug(f"Fitting superoperator harmonics for {family.name}{family.params}")
    terms = fit_harmonics(lambda x: superoperator(family.unitary(x)))
    for _, s in terms:
        s.flags.writeable = False
    return terms


def average_through(rho: DensityMatrix, stages: Sequence[Tuple[UnitaryFamily, AngleDistribution]],
                    m: AveragingMethod) -> DensityMatrix:
    """Apply independently-averaged gate stages in order"""
    out = rho
    for index, (gate, d) in enumerate(stages):
        out = gate.apply_averaged(out, d, m, stage=index)
    return out
