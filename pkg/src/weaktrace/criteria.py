"""The two competing weak-trace diagnostics and their comparison.

For a preselected photon |N> and a postselecting detector, the weak value
of an arm projector is the ratio of the projector-inserted transition
amplitude to the plain one. Operationally it is the g -> 0 limit of the
postselected pointer mean divided by g. That limit is discontinuous here:
at every g > 0 part of the inner-arm state leaks through the dark port E
into the outer detectors, while at g = 0 exactly nothing does.

The non-postselected alternative reads the *unconditional* pointer mean,
which equals g times the plain projector expectation at the arm's stage,
exactly, at every coupling strength; its g -> 0 limit is continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import MeterAttachment, arm_occupation, postselect, run_pipeline
from .meter import MeterConfig, NoPostselectedEventsError, sample_with_rng
from .paths import (
    ARM_FIRST_STAGE,
    Circuit,
    PhotonState,
    apply_beamsplitter,
    apply_beamsplitter_inverse,
    build_nested_mzi,
    evolve_to_stage,
    projector_expectation,
)

#: Stage after which each arm's projector (and meter) is inserted: the first
#: stage at which the arm is live. N sits at stage 0, before any splitter.
ARM_PROJECTOR_STAGE = ARM_FIRST_STAGE

_DENOM_FLOOR = 1e-15


class UndefinedWeakValueError(ValueError):
    """Weak value requested for a pre/post pair with vanishing overlap."""


def _default_circuit(circuit: Circuit | None) -> Circuit:
    return build_nested_mzi() if circuit is None else circuit


def _default_input(state: PhotonState | None) -> PhotonState:
    return PhotonState.source() if state is None else state


def _projected_transition(
    circuit: Circuit, in_state: PhotonState, arm: str, detector: str
) -> complex:
    """<detector| U(last)..U(k+1) Pi_arm U(k)..U(1) |in> with k the arm's stage."""
    k = ARM_PROJECTOR_STAGE[arm]
    mid = evolve_to_stage(circuit, in_state, k)
    projected = PhotonState({arm: mid.amplitude(arm)})
    for bs in circuit.stages[k:]:
        projected = apply_beamsplitter(projected, bs)
    return projected.amplitude(detector)


def weak_value_analytic(
    arm: str,
    in_state: PhotonState | None = None,
    detector: str = "D2",
    circuit: Circuit | None = None,
) -> complex:
    """Weak value of the arm projector for the given pre/postselection."""
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    den = evolve_to_stage(circuit, in_state, len(circuit)).amplitude(detector)
    if abs(den) < _DENOM_FLOOR:
        raise UndefinedWeakValueError(
            f"postselection on {detector} has zero amplitude; weak value undefined"
        )
    return _projected_transition(circuit, in_state, arm, detector) / den


def tsvf_backward_state(
    detector: str, stage: int, circuit: Circuit | None = None
) -> PhotonState:
    """Backward-evolved ket at ``stage``: inverse stages applied to |detector>.

    The bra of the two-state description is this state's conjugate; pairing
    it with the forward ket at the same stage reproduces transition
    amplitudes without ever evolving past the stage.
    """
    circuit = _default_circuit(circuit)
    if not 0 <= stage <= len(circuit):
        raise ValueError(f"stage index {stage} out of range 0..{len(circuit)}")
    state = PhotonState.basis(detector)
    for bs in reversed(circuit.stages[stage:]):
        state = apply_beamsplitter_inverse(state, bs)
    return state


def weak_value_tsvf(
    arm: str,
    in_state: PhotonState | None = None,
    detector: str = "D2",
    circuit: Circuit | None = None,
) -> complex:
    """Weak value from the two-state pairing <Phi|Pi_arm|Psi> / <Phi|Psi>."""
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    k = ARM_PROJECTOR_STAGE[arm]
    forward = evolve_to_stage(circuit, in_state, k)
    backward = tsvf_backward_state(detector, k, circuit)
    den = sum(
        backward.amplitude(a).conjugate() * c for a, c in forward.amplitudes.items()
    )
    if abs(den) < _DENOM_FLOOR:
        raise UndefinedWeakValueError(
            f"two-state overlap for {detector} vanishes; weak value undefined"
        )
    num = backward.amplitude(arm).conjugate() * forward.amplitude(arm)
    return num / den


def extrapolate_even_limit(g_values, ratios) -> float:
    """Richardson-style limit estimate at g = 0.

    Fits the polynomial in x = g^2 through the three smallest-g points
    (corrections to the pointer mean are even in g for the real weak
    values arising here) and evaluates it at x = 0.
    """
    pts = sorted(zip(g_values, ratios))[:3]
    xs = [g * g for g, _ in pts]
    ys = [r for _, r in pts]
    limit = 0.0
    for i, yi in enumerate(ys):
        term = yi
        for j, xj in enumerate(xs):
            if j != i:
                term *= xj / (xj - xs[i])
        limit += term
    return limit


@dataclass(frozen=True)
class WeakValueRecord:
    """Analytic weak value next to its operational finite-g estimates."""

    arm: str
    preselection: str
    detector: str
    analytic: complex
    estimates: tuple[tuple[float, float], ...]  # (g, pointer_mean / g)
    limit: float


def weak_value_operational(
    arm: str,
    detector: str,
    g_list,
    delta: float,
    in_state: PhotonState | None = None,
    circuit: Circuit | None = None,
) -> WeakValueRecord:
    """Pointer-mean readout of the weak value over a decreasing g sweep.

    For every g the full joint pipeline runs, the detector postselects, and
    the conditional pointer mean divided by g is recorded; the g -> 0 limit
    is extrapolated in g^2 from the three smallest couplings.
    """
    g_list = [float(g) for g in g_list]
    if not g_list or any(g <= 0 for g in g_list):
        raise ValueError("g sweep must be non-empty and strictly positive")
    if any(b >= a for a, b in zip(g_list, g_list[1:])):
        raise ValueError("g sweep must be strictly decreasing")
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    config = MeterConfig(delta)
    estimates = []
    for g in g_list:
        js = run_pipeline(circuit, in_state, [MeterAttachment("probe", arm, g, config)])
        sel = postselect(js, detector)
        if sel.probability <= 1e-30:
            raise NoPostselectedEventsError(
                f"postselection on {detector} has zero probability at g={g}"
            )
        estimates.append((g, sel.pointer_mean("probe") / g))
    limit = extrapolate_even_limit(*zip(*estimates))
    analytic = weak_value_analytic(arm, in_state, detector, circuit)
    return WeakValueRecord(arm, "N", detector, analytic, tuple(estimates), limit)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Protocol simulation result: (sample mean of q)/g with its standard error."""

    value: float
    stderr: float
    g: float
    n_trials: int
    n_postselected: int


def monte_carlo_weak_value(
    arm: str,
    detector: str,
    g: float,
    delta: float,
    n: int,
    seed: int,
    in_state: PhotonState | None = None,
    circuit: Circuit | None = None,
) -> MonteCarloEstimate:
    """Simulate the full operational protocol over ``n`` identical trials.

    Each trial either postselects (with the detector probability) and then
    yields one projective pointer readout, or is discarded. The number of
    successes is drawn binomially and the readouts i.i.d. from the
    conditional density, which is distributionally identical to looping
    over trials one by one.
    """
    if n < 1:
        raise ValueError("trial count must be at least 1")
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    js = run_pipeline(circuit, in_state, [MeterAttachment("probe", arm, g, MeterConfig(delta))])
    sel = postselect(js, detector)
    if sel.probability <= 1e-30:
        raise NoPostselectedEventsError(f"postselection on {detector} has zero probability")
    rng = np.random.default_rng(seed)
    n_sel = int(rng.binomial(n, min(sel.probability, 1.0)))
    if n_sel == 0:
        raise NoPostselectedEventsError(f"no successful postselections in {n} trials")
    draws = sample_with_rng(sel.meter_waves[0], n_sel, rng)
    value = float(draws.mean()) / g
    stderr = float(draws.std(ddof=1)) / math.sqrt(n_sel) / g if n_sel > 1 else float("nan")
    return MonteCarloEstimate(value, stderr, g, n, n_sel)


@dataclass(frozen=True)
class MeanValueRecord:
    """Non-postselected pointer readout for one arm at one coupling."""

    arm: str
    g: float
    pointer_mean: float
    ratio: float | None  # pointer_mean / g, undefined at g = 0
    limit: float  # projector expectation at the arm's stage (the exact g->0 value)


def weak_mean_value(
    arm: str,
    in_state: PhotonState | None = None,
    g: float = 0.1,
    delta: float = 1.0,
    circuit: Circuit | None = None,
) -> MeanValueRecord:
    """Unconditional pointer mean of a single meter on ``arm``.

    The ratio pointer_mean/g equals the projector expectation at the arm's
    stage for every g, with no weak-coupling approximation; that exactness
    is what makes the non-postselected criterion continuous at g = 0.
    """
    if g < 0:
        raise ValueError("coupling strength must be nonnegative")
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    js = run_pipeline(circuit, in_state, [MeterAttachment("probe", arm, g, MeterConfig(delta))])
    mean = js.pointer_mean("probe")
    k = ARM_PROJECTOR_STAGE[arm]
    limit = projector_expectation(evolve_to_stage(circuit, in_state, k), arm)
    ratio = mean / g if g > 0 else None
    return MeanValueRecord(arm, g, mean, ratio, limit)


@dataclass(frozen=True)
class DiscontinuityRow:
    """One coupling strength of the dark-port bookkeeping table."""

    g: float
    e_occupation: float  # P(photon in E after BS3), B-meter attached
    pointer_ratio: float | None  # D2-postselected <Q>/g; None at g = 0
    analogy_ratio: float | None  # f(g)/g for the scalar analogy f(x) = a x


@dataclass(frozen=True)
class DiscontinuityReport:
    """Finite-g rows against the untouched g = 0 configuration.

    ``rows`` all carry a strictly positive E-arm occupation and a pointer
    ratio near the extrapolated weak value; ``zero_row`` has no E-arm
    state and no defined ratio at all. ``b_signal_via_e`` records that the
    entire coupled (shift-g) part of the postselected D2 wave arrives
    through the dark arm E.
    """

    delta: float
    rows: tuple[DiscontinuityRow, ...]
    zero_row: DiscontinuityRow
    extrapolated_weak_value: float
    analogy_slope: float
    b_signal_via_e: bool

    @property
    def discontinuous(self) -> bool:
        return (
            all(r.e_occupation > 0.0 for r in self.rows)
            and self.zero_row.e_occupation == 0.0
            and abs(self.extrapolated_weak_value) > 1e-9
        )


def _b_route_amplitude_via_e(circuit: Circuit, in_state: PhotonState) -> complex:
    """<D2| U4 Pi_E U3 Pi_B U2 U1 |in>: the B-arm amplitude that reaches D2."""
    mid = evolve_to_stage(circuit, in_state, 2)
    state = PhotonState({"B": mid.amplitude("B")})
    state = apply_beamsplitter(state, circuit.stages[2])
    state = PhotonState({"E": state.amplitude("E")})
    state = apply_beamsplitter(state, circuit.stages[3])
    return state.amplitude("D2")


def discontinuity_report(
    g_grid,
    delta: float,
    in_state: PhotonState | None = None,
    circuit: Circuit | None = None,
) -> DiscontinuityReport:
    """Contrast the g -> 0 weak-value limit with the undisturbed setup.

    Per grid coupling: the E-arm occupation created by the B-arm meter and
    the D2-postselected pointer ratio; then the g = 0 row, where the E
    occupation is identically zero and the ratio does not exist. The
    scalar analogy column mirrors f(x) = a x, whose ratio f(x)/x holds the
    limit a at every x > 0 yet is undefined at x = 0.
    """
    g_grid = [float(g) for g in g_grid]
    if not g_grid or any(g <= 0 for g in g_grid):
        raise ValueError("g grid must be non-empty and strictly positive")
    if any(b >= a for a, b in zip(g_grid, g_grid[1:])):
        raise ValueError("g grid must be strictly decreasing")
    circuit = _default_circuit(circuit)
    in_state = _default_input(in_state)
    config = MeterConfig(delta)

    record = weak_value_operational("B", "D2", g_grid, delta, in_state, circuit)
    slope = record.limit
    rows = []
    for (g, ratio) in record.estimates:
        p_e = arm_occupation(
            circuit, in_state, [MeterAttachment("probe", "B", g, config)], "E", 3
        )
        rows.append(DiscontinuityRow(g, p_e, ratio, slope))
    p_e_zero = arm_occupation(
        circuit, in_state, [MeterAttachment("probe", "B", 0.0, config)], "E", 3
    )
    zero_row = DiscontinuityRow(0.0, p_e_zero, None, None)

    # the whole coupled branch of the postselected D2 wave comes through E
    g_probe = g_grid[0]
    js = run_pipeline(circuit, in_state, [MeterAttachment("probe", "B", g_probe, config)])
    sel = postselect(js, "D2")
    shifted = [b for b in sel.branches if abs(b.shifts[0] - g_probe) < 1e-12]
    via_e = _b_route_amplitude_via_e(circuit, in_state)
    coupled = sum(b.coefficient for b in shifted)
    b_signal_via_e = abs(coupled - via_e) < 1e-12

    return DiscontinuityReport(
        delta=delta,
        rows=tuple(rows),
        zero_row=zero_row,
        extrapolated_weak_value=record.limit,
        analogy_slope=slope,
        b_signal_via_e=b_signal_via_e,
    )
