"""
End-to-end noisy entangling pipelines and their oracle checks

A scenario prepares a noisy initial product state, applies a noisy exchange
gate, and compares the partial-transpose verdict of the averaged output with
the matching closed-form predicate.
"""

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import predicates as pred
from .entangle import (
    DEFAULT_VERDICT_TOL,
    EntanglementVerdict,
    is_npt,
    trace_distance,
    verdict,
    verdicts_batch,
    von_neumann_entropy,
    xy_block_populations,
)
from .errors import ConfigurationError, NoSignChangeError
from .hamiltonians import (
    ExchangeAngles,
    ExchangeCouplings,
    ModelKind,
    PulseSpec,
    RefocusSchedule,
    exchange_unitary,
    pulse_unitary,
    refocus_product,
    single_qubit_rotation,
    zz_unitary,
)
from .noisechan import (
    AngleDistribution,
    AveragingMethod,
    ClosedForm,
    DistributionKind,
    HarmonicFamily,
    MonteCarlo,
    Quadrature,
    UnitaryFamily,
    average_matrix,
    method_label,
)
from .smallmat import ComplexMatrix, DensityMatrix, basis_ket

ISING_PREP_MEAN = math.pi / 2.0
ISING_INTERACTION_MEAN = math.pi
ROTATION_PREP_MEAN = math.pi
XYZ_SUM_MEAN = math.pi / 4.0
XY_ANGLE_MEAN = math.pi / 2.0

BISECT_TOL = 1e-6


class ScenarioId(str, Enum):
    ISING_TUNABLE = "ising-tunable"
    ISING_UNTUNABLE = "ising-untunable"
    XYZ_TUNABLE = "xyz-tunable"
    XY_FAMILY = "xy-family"
    ISING_LAPLACE = "ising-laplace"
    ISING_UNTUNABLE_LAPLACE = "ising-untunable-laplace"

    @property
    def noise(self) -> DistributionKind:
        if self in (ScenarioId.ISING_LAPLACE, ScenarioId.ISING_UNTUNABLE_LAPLACE):
            return DistributionKind.LAPLACE
        return DistributionKind.GAUSSIAN

    @property
    def is_ising(self) -> bool:
        return self not in (ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY)

    @property
    def is_untunable(self) -> bool:
        return self in (ScenarioId.ISING_UNTUNABLE, ScenarioId.ISING_UNTUNABLE_LAPLACE)

    @property
    def width_name(self) -> str:
        return "capital_lambda" if self.is_untunable else "omega"


class Axis(str, Enum):
    PREP_WIDTH = "prep_width"
    INTERACTION_WIDTH = "interaction_width"


_METHOD_TYPES = (ClosedForm, Quadrature, MonteCarlo)


class ScenarioConfig(BaseModel):
    """One point of a scenario: noise widths, gate parameters, averaging method"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True, allow_inf_nan=False)

    id: ScenarioId
    prep_width: float = Field(0.0, ge=0.0)
    interaction_width: float = Field(0.0, ge=0.0)
    mean_theta_minus: Optional[float] = None
    phi: Optional[float] = None
    method: Any = Field(default_factory=ClosedForm)
    refocus: Any = None
    xyz_sampling: str = "sum-difference"
    untunable_noise: str = "pulse"
    duration_share: float = Field(0.5, ge=0.0, le=1.0)
    verdict_tolerance: float = Field(DEFAULT_VERDICT_TOL, gt=0.0)

    @field_validator("method")
    @classmethod
    def _check_method(cls, value):
        if not isinstance(value, _METHOD_TYPES):
            raise ValueError(f"method must be ClosedForm, Quadrature or MonteCarlo, got {value!r}")
        return value

    @field_validator("refocus")
    @classmethod
    def _check_refocus(cls, value):
        if value is not None and not isinstance(value, RefocusSchedule):
            raise ValueError(f"refocus must be a RefocusSchedule, got {value!r}")
        return value

    @field_validator("xyz_sampling")
    @classmethod
    def _check_sampling(cls, value):
        if value not in ("sum-difference", "independent"):
            raise ValueError(f"xyz_sampling must be 'sum-difference' or 'independent', got {value!r}")
        return value

    @field_validator("untunable_noise")
    @classmethod
    def _check_untunable_noise(cls, value):
        if value not in ("pulse", "duration"):
            raise ValueError(f"untunable_noise must be 'pulse' or 'duration', got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_fields_match_scenario(self):
        sid = self.id
        if sid is not ScenarioId.XYZ_TUNABLE:
            if self.mean_theta_minus is not None:
                raise ValueError(f"mean_theta_minus applies to xyz-tunable only, not {sid.value}")
            if self.xyz_sampling != "sum-difference":
                raise ValueError(f"xyz_sampling applies to xyz-tunable only, not {sid.value}")
        if sid not in (ScenarioId.XYZ_TUNABLE, ScenarioId.XY_FAMILY) and self.phi is not None:
            raise ValueError(f"phi applies to xyz-tunable and xy-family only, not {sid.value}")
        if not sid.is_untunable:
            if self.refocus is not None:
                raise ValueError(f"refocus schedule applies to untunable scenarios only, not {sid.value}")
            if self.untunable_noise != "pulse":
                raise ValueError(f"untunable_noise applies to untunable scenarios only, not {sid.value}")
        return self

    @classmethod
    def build(cls, **fields) -> "ScenarioConfig":
        """Construct, reporting invalid combinations as ConfigurationError"""
        try:
            return cls(**fields)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e

    @property
    def theta_minus(self) -> float:
        return 0.0 if self.mean_theta_minus is None else self.mean_theta_minus

    @property
    def phi_value(self) -> float:
        return 0.0 if self.phi is None else self.phi

    @property
    def schedule(self) -> RefocusSchedule:
        return self.refocus if self.refocus is not None else RefocusSchedule()


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    config: ScenarioConfig
    initial_state: DensityMatrix
    final_state: DensityMatrix
    verdict: EntanglementVerdict
    predicate: pred.PredicateVerdict
    initial_entropy: float
    model: ModelKind
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def method(self) -> str:
        return method_label(self.config.method)

    @property
    def seed(self) -> Optional[int]:
        m = self.config.method
        return m.seed if isinstance(m, MonteCarlo) else None


# Preparation


def _ket_projector(label: str) -> np.ndarray:
    v = basis_ket(label)
    return np.outer(v, v.conj())


@lru_cache(maxsize=None)
def _y_rotation_family() -> HarmonicFamily:
    ground = _ket_projector("0")

    def rotated(angle: float) -> np.ndarray:
        r = single_qubit_rotation("y", angle).data
        return r @ ground @ r.conj().T

    return HarmonicFamily.from_evaluator(rotated).fitted()


def _x2_rotation() -> UnitaryFamily:
    return UnitaryFamily("prep-x-qubit2", build=lambda angle: pulse_unitary(PulseSpec("x", 2, angle)))


@lru_cache(maxsize=4096)
def _prepared(sid: ScenarioId, prep_width: float, method: AveragingMethod) -> DensityMatrix:
    if sid.is_ising:
        d = AngleDistribution(sid.noise, ISING_PREP_MEAN, prep_width)
        family = _y_rotation_family()
        first = average_matrix(family, d, method, stage=0)
        second = average_matrix(family, d, method, stage=1)
        return DensityMatrix.product(ComplexMatrix(first), ComplexMatrix(second))
    d = AngleDistribution(sid.noise, ROTATION_PREP_MEAN, prep_width)
    return _x2_rotation().apply_averaged(DensityMatrix.from_ket(basis_ket("00")), d, method, stage=0)


def prepare_initial(sid: ScenarioId, prep_width: float, method: Optional[AveragingMethod] = None) -> DensityMatrix:
    """Noise-averaged initial state

    Ising scenarios rotate both qubits about y by independent angles of mean
    pi/2; XYZ and XY scenarios rotate qubit 2 about x by an angle of mean pi.
    """
    try:
        sid = ScenarioId(sid)
    except ValueError:
        raise ConfigurationError(f"unknown scenario {sid!r}") from None
    width = float(prep_width)
    if not math.isfinite(width) or width < 0:
        raise ConfigurationError(f"prep_width must be finite and >= 0, got {prep_width}")
    return _prepared(sid, width, method if method is not None else ClosedForm())


# Interaction stages


Stage = Tuple[UnitaryFamily, AngleDistribution]


def _zz_family(scale: float = 1.0) -> UnitaryFamily:
    return UnitaryFamily("zz", (scale,), build=lambda angle: zz_unitary(scale * angle))


def _interaction_stages(c: ScenarioConfig) -> Tuple[List[Stage], Optional[ComplexMatrix]]:
    """Noisy gate factors in application order, plus a fixed trailing gate"""
    sid, width, kind = c.id, c.interaction_width, c.id.noise
    if sid in (ScenarioId.ISING_TUNABLE, ScenarioId.ISING_LAPLACE):
        return [(_zz_family(), AngleDistribution(kind, ISING_INTERACTION_MEAN, width))], None

    if sid.is_untunable:
        s = c.schedule
        if c.untunable_noise == "pulse":
            family = UnitaryFamily(
                "refocus-pulse", (s.j_tau1, s.j_tau2),
                build=lambda theta: refocus_product(s.j_tau1, s.j_tau2, theta),
            )
            return [(family, AngleDistribution(kind, s.pulse_angle, width))], None
        # Exact pulse of angle pi: net phase angle 2*J*tau1 - J*tau2
        share = c.duration_share
        first = AngleDistribution(kind, s.j_tau1, width * math.sqrt(share))
        second = AngleDistribution(kind, s.j_tau2, width * math.sqrt(1.0 - share))
        return [(_zz_family(2.0), first), (_zz_family(-1.0), second)], None

    trailing = zz_unitary(c.phi_value) if c.phi_value != 0.0 else None
    if sid is ScenarioId.XYZ_TUNABLE:
        if c.xyz_sampling == "independent":
            # theta_x, theta_y independent with sd omega/sqrt(2) each
            sd = width / math.sqrt(2.0)
            x_family = UnitaryFamily("xx", build=lambda v: exchange_unitary(ExchangeAngles.from_pauli_angles(v, 0.0)))
            y_family = UnitaryFamily("yy", build=lambda v: exchange_unitary(ExchangeAngles.from_pauli_angles(0.0, v)))
            return [
                (x_family, AngleDistribution.gaussian(0.5 * (XYZ_SUM_MEAN + c.theta_minus), sd)),
                (y_family, AngleDistribution.gaussian(0.5 * (XYZ_SUM_MEAN - c.theta_minus), sd)),
            ], trailing
        plus = UnitaryFamily(
            "xyz-plus", build=lambda v: exchange_unitary(ExchangeAngles.from_sum_difference(4.0 * v, 0.0))
        )
        minus = UnitaryFamily(
            "xyz-minus", build=lambda v: exchange_unitary(ExchangeAngles.from_sum_difference(0.0, 4.0 * v))
        )
        return [
            (plus, AngleDistribution.gaussian(XYZ_SUM_MEAN, width)),
            (minus, AngleDistribution.gaussian(c.theta_minus, width)),
        ], trailing

    xy = UnitaryFamily("xy", build=lambda j: exchange_unitary(ExchangeAngles(j, j, 0.0)))
    return [(xy, AngleDistribution.gaussian(XY_ANGLE_MEAN, width))], trailing


def interaction_couplings(c: ScenarioConfig) -> ExchangeCouplings:
    """Mean couplings of the interaction gate with tau = 1"""
    if c.id.is_ising:
        return ExchangeCouplings(0.0, 0.0, ISING_INTERACTION_MEAN)
    if c.id is ScenarioId.XYZ_TUNABLE:
        a = ExchangeAngles.from_sum_difference(4.0 * XYZ_SUM_MEAN, 4.0 * c.theta_minus, c.phi_value)
        return ExchangeCouplings(a.theta_x, a.theta_y, a.phi)
    return ExchangeCouplings(XY_ANGLE_MEAN, XY_ANGLE_MEAN, c.phi_value)


def evolve_noisy(c: ScenarioConfig, initial: DensityMatrix) -> DensityMatrix:
    stages, trailing = _interaction_stages(c)
    out = initial
    # Preparation draws use stages 0 and 1
    for index, (gate, d) in enumerate(stages, start=2):
        out = gate.apply_averaged(out, d, c.method, stage=index)
    if trailing is not None:
        out = DensityMatrix(trailing.data @ out.data @ trailing.data.conj().T)
    return out


# Predicates


def predicate_for(c: ScenarioConfig) -> pred.PredicateVerdict:
    sid, lam, width = c.id, c.prep_width, c.interaction_width
    if sid is ScenarioId.ISING_TUNABLE:
        return pred.ising_gaussian_entangled(lam, width)
    if sid is ScenarioId.ISING_UNTUNABLE:
        return pred.untunable_ising_entangled(lam, width)
    if sid is ScenarioId.ISING_LAPLACE:
        return pred.ising_laplace_entangled(lam, width)
    if sid is ScenarioId.ISING_UNTUNABLE_LAPLACE:
        return pred.untunable_ising_laplace_entangled(lam, width)
    if sid is ScenarioId.XYZ_TUNABLE:
        return pred.xyz_entangled(pred.XyzReducedParams.from_widths(lam, width, c.theta_minus))
    _, w_plus, w_minus = pred.xy_family_weights(lam, width)
    return pred.classify(w_minus - w_plus)


def closed_form_threshold(c: ScenarioConfig, axis: Axis, bracket: Tuple[float, float]) -> Optional[float]:
    """Predicate threshold along an axis with the other width held at its config value"""
    axis = Axis(axis)
    sid, lam, width = c.id, c.prep_width, c.interaction_width
    along_prep = axis is Axis.PREP_WIDTH
    if sid is ScenarioId.ISING_TUNABLE:
        return pred.ising_lambda_max(width) if along_prep else pred.ising_omega_max(lam)
    if sid is ScenarioId.ISING_UNTUNABLE:
        return pred.ising_lambda_max(2.0 * width) if along_prep else 0.5 * pred.ising_omega_max(lam)
    if sid is ScenarioId.ISING_LAPLACE:
        return pred.laplace_lambda_bound(width) if along_prep else pred.laplace_omega_bound(lam)
    if sid is ScenarioId.ISING_UNTUNABLE_LAPLACE:
        return pred.laplace_lambda_bound(2.0 * width) if along_prep else 0.5 * pred.laplace_omega_bound(lam)

    def margin(x: float) -> float:
        moved = c.model_copy(update={axis.value: x})
        return predicate_for(moved).margin

    try:
        return pred.bisect_margin(margin, bracket[0], bracket[1])
    except NoSignChangeError:
        return None


# Running


def _simulate(c: ScenarioConfig) -> Tuple[DensityMatrix, DensityMatrix, Dict[str, float]]:
    timings = {}
    start = time.perf_counter()
    initial = prepare_initial(c.id, c.prep_width, c.method)
    timings["prepare"] = time.perf_counter() - start
    start = time.perf_counter()
    final = evolve_noisy(c, initial)
    timings["interaction"] = time.perf_counter() - start
    return initial, final, timings


def _verdicts(finals: Sequence[DensityMatrix], tolerances: Sequence[float]) -> List[EntanglementVerdict]:
    # one batched eigen-solve per distinct tolerance
    out: List[Optional[EntanglementVerdict]] = [None] * len(finals)
    for tol in sorted(set(tolerances)):
        index = [i for i, t in enumerate(tolerances) if t == tol]
        for i, v in zip(index, verdicts_batch([finals[i] for i in index], tol)):
            out[i] = v
    return out


def run_scenario(c: ScenarioConfig) -> ScenarioResult:
    initial, final, timings = _simulate(c)
    start = time.perf_counter()
    v = verdict(final, c.verdict_tolerance)
    timings["verdict"] = time.perf_counter() - start
    return ScenarioResult(
        config=c,
        initial_state=initial,
        final_state=final,
        verdict=v,
        predicate=predicate_for(c),
        initial_entropy=von_neumann_entropy(initial),
        model=interaction_couplings(c).model,
        timings=timings,
    )


def run_scenarios(configs: Sequence[ScenarioConfig]) -> List[ScenarioResult]:
    """Batch of scenarios sharing one eigen-solve for the verdicts"""
    simulated = [_simulate(c) for c in configs]
    start = time.perf_counter()
    verdicts = _verdicts([final for _, final, _ in simulated], [c.verdict_tolerance for c in configs])
    per_point = (time.perf_counter() - start) / max(len(configs), 1)
    results = []
    for c, (initial, final, timings), v in zip(configs, simulated, verdicts):
        timings["verdict"] = per_point
        results.append(ScenarioResult(
            config=c,
            initial_state=initial,
            final_state=final,
            verdict=v,
            predicate=predicate_for(c),
            initial_entropy=von_neumann_entropy(initial),
            model=interaction_couplings(c).model,
            timings=timings,
        ))
    return results


# Boundary search


class BoundaryReport(BaseModel):
    scenario: ScenarioId
    axis: Axis
    fixed: Dict[str, float]
    bracket: Tuple[float, float]
    threshold: float
    closed_form_threshold: Optional[float]
    deviation: Optional[float]
    iterations: int
    method: str


def _min_pt(c: ScenarioConfig) -> float:
    _, final, _ = _simulate(c)
    return verdict(final).min_pt_eigenvalue


def boundary_bisect(base: ScenarioConfig, axis: Axis, bracket: Tuple[float, float],
                    tol: float = BISECT_TOL) -> BoundaryReport:
    """Entanglement threshold of the simulated pipeline along one width axis

    ``base`` fixes every other parameter; its value on ``axis`` is ignored.
    """
    axis = Axis(axis)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 <= lo < hi:
        raise ConfigurationError(f"bracket must satisfy 0 <= lo < hi, got [{lo}, {hi}]")

    def entangled_at(x: float) -> bool:
        return is_npt(_min_pt(base.model_copy(update={axis.value: x})))

    lo_ent, hi_ent = entangled_at(lo), entangled_at(hi)
    if lo_ent == hi_ent:
        state = "entangled" if lo_ent else "separable"
        raise NoSignChangeError(
            f"{base.id.value}: output is {state} at both ends of [{lo}, {hi}] along {axis.value}",
            lo_entangled=lo_ent,
            hi_entangled=hi_ent,
        )
    iterations = 0
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if entangled_at(mid) == lo_ent:
            a = mid
        else:
            b = mid
        iterations += 1
    threshold = 0.5 * (a + b)
    closed = closed_form_threshold(base, axis, (lo, hi))
    if closed is not None and not math.isfinite(closed):
        closed = None
    fixed_name = Axis.INTERACTION_WIDTH if axis is Axis.PREP_WIDTH else Axis.PREP_WIDTH
    fixed = {fixed_name.value: getattr(base, fixed_name.value)}
    if base.id is ScenarioId.XYZ_TUNABLE:
        fixed["mean_theta_minus"] = base.theta_minus
    logger.info(f"Boundary of {base.id.value} along {axis.value}: {threshold:.7f} (closed form {closed})")
    return BoundaryReport(
        scenario=base.id,
        axis=axis,
        fixed=fixed,
        bracket=(lo, hi),
        threshold=threshold,
        closed_form_threshold=closed,
        deviation=None if closed is None else abs(threshold - closed),
        iterations=iterations,
        method=method_label(base.method),
    )


# Oracle validation


class Disagreement(BaseModel):
    prep_width: float
    interaction_width: float
    mean_theta_minus: Optional[float]
    predicate_margin: float
    min_pt_eigenvalue: float


class ValidationReport(BaseModel):
    scenario: ScenarioId
    points: int
    compared: int
    skipped_in_guard_band: int
    guard: float
    disagreements: int
    max_disagreement_margin: Optional[float]
    examples: List[Disagreement] = Field(default_factory=list)
    max_weight_deviation: Optional[float] = None
    max_method_distance: Optional[float] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    method: str
    reference_method: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.disagreements == 0


def grid_points(sid: ScenarioId, prep_values: Sequence[float], width_values: Sequence[float],
                mean_theta_minus: Optional[float] = None) -> List[Tuple[float, float, Optional[float]]]:
    zbar = mean_theta_minus if ScenarioId(sid) is ScenarioId.XYZ_TUNABLE else None
    return [(float(lam), float(w), zbar) for lam in prep_values for w in width_values]


def sample_points(sid: ScenarioId, count: int, seed: int,
                  prep_range: Tuple[float, float] = (0.0, 3.0),
                  width_range: Optional[Tuple[float, float]] = None,
                  theta_minus_range: Tuple[float, float] = (0.0, math.pi)) -> List[Tuple[float, float, Optional[float]]]:
    sid = ScenarioId(sid)
    if width_range is None:
        width_range = (0.0, 1.5) if sid is ScenarioId.XYZ_TUNABLE else (0.0, 3.0)
    rng = np.random.default_rng(seed)
    lam = rng.uniform(*prep_range, count)
    width = rng.uniform(*width_range, count)
    if sid is ScenarioId.XYZ_TUNABLE:
        zbar = rng.uniform(*theta_minus_range, count)
        return [(float(a), float(b), float(z)) for a, b, z in zip(lam, width, zbar)]
    return [(float(a), float(b), None) for a, b in zip(lam, width)]


def validate(sid: ScenarioId, points: Sequence[Tuple[float, float, Optional[float]]],
             method: Optional[AveragingMethod] = None,
             reference_method: Optional[AveragingMethod] = None,
             guard: float = 1e-3,
             extra: Optional[Dict[str, Any]] = None,
             max_examples: int = 10) -> ValidationReport:
    """Compare the closed-form predicate with the simulated PPT verdict point by point

    Points whose predicate margin lies within ``guard`` of zero are skipped.
    With ``reference_method`` the simulated states of both methods are also
    compared by trace distance.
    """
    sid = ScenarioId(sid)
    method = method if method is not None else ClosedForm()
    extra = dict(extra or {})
    if sid is ScenarioId.XYZ_TUNABLE:
        extra.setdefault("xyz_sampling", "independent")

    configs = []
    for task, (lam, width, zbar) in enumerate(points):
        m = method.for_task(task) if isinstance(method, MonteCarlo) else method
        fields = dict(id=sid, prep_width=lam, interaction_width=width, method=m, **extra)
        if sid is ScenarioId.XYZ_TUNABLE:
            fields["mean_theta_minus"] = 0.0 if zbar is None else zbar
        configs.append(ScenarioConfig.build(**fields))

    timings: Dict[str, float] = {}
    start = time.perf_counter()
    predicates = [predicate_for(c) for c in configs]
    timings["predicate"] = time.perf_counter() - start

    start = time.perf_counter()
    finals = [_simulate(c)[1] for c in configs]
    spectra_verdicts = _verdicts(finals, [c.verdict_tolerance for c in configs])
    timings[method_label(method)] = time.perf_counter() - start

    compared = skipped = 0
    failures: List[Disagreement] = []
    worst: Optional[float] = None
    weight_dev: Optional[float] = None
    for c, p, v, final in zip(configs, predicates, spectra_verdicts, finals):
        if sid is ScenarioId.XY_FAMILY:
            expected = pred.xy_family_weights(c.prep_width, c.interaction_width)
            measured = xy_block_populations(final)
            dev = max(abs(e - m) for e, m in zip(expected, measured))
            weight_dev = dev if weight_dev is None else max(weight_dev, dev)
        if abs(p.margin) < guard:
            skipped += 1
            continue
        compared += 1
        if p.entangled != is_npt(v.min_pt_eigenvalue):
            worst = abs(p.margin) if worst is None else max(worst, abs(p.margin))
            failures.append(Disagreement(
                prep_width=c.prep_width,
                interaction_width=c.interaction_width,
                mean_theta_minus=c.mean_theta_minus,
                predicate_margin=p.margin,
                min_pt_eigenvalue=v.min_pt_eigenvalue,
            ))

    distance: Optional[float] = None
    if reference_method is not None:
        start = time.perf_counter()
        for task, (c, final) in enumerate(zip(configs, finals)):
            ref = reference_method.for_task(task) if isinstance(reference_method, MonteCarlo) else reference_method
            other = _simulate(c.model_copy(update={"method": ref}))[1]
            d = trace_distance(final, other)
            distance = d if distance is None else max(distance, d)
        timings[method_label(reference_method)] = time.perf_counter() - start

    if failures:
        logger.warning(f"{sid.value}: {len(failures)} disagreements between predicate and simulation")
    return ValidationReport(
        scenario=sid,
        points=len(configs),
        compared=compared,
        skipped_in_guard_band=skipped,
        guard=guard,
        disagreements=len(failures),
        max_disagreement_margin=worst,
        examples=failures[:max_examples],
        max_weight_deviation=weight_dev,
        max_method_distance=distance,
        timings=timings,
        method=method_label(method),
        reference_method=None if reference_method is None else method_label(reference_method),
    )
