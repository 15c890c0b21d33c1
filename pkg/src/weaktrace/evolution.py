"""Joint photon-meter evolution through the interferometer, exact in g.

A coupling exp(-i g Pi_arm x P_M) shifts the meter attached to one arm's
component rigidly by g and leaves every other component alone, so the
joint state stays a per-arm list of Gaussian branches, each carrying one
accumulated shift per meter. Beamsplitters mix those branch lists
linearly. No weak-coupling expansion is made anywhere; "weak" enters only
when a caller chooses a small g.

Several attachments may share a ``meter_id``: they then kick the same
pointer (the shared transverse-deviation meter of the vibrating-mirror
realization), with shifts adding up along each photon path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .meter import (
    GaussianBranch,
    MeterConfig,
    MeterWave,
    NoPostselectedEventsError,
    SHIFT_MERGE_TOL,
    branch_overlap,
    wave_norm2,
)
from .paths import (
    ARM_FIRST_STAGE,
    ARM_LAST_STAGE,
    ATOL,
    BeamSplitter,
    Circuit,
    DETECTORS,
    PhotonState,
    PipelineError,
    _check_arm,
)


class EntangledMetersError(ValueError):
    """A single-meter wave was requested from a meter-entangled component."""


@dataclass(frozen=True)
class MeterAttachment:
    """One coupling: meter ``meter_id`` measures the projector onto ``arm``.

    ``insert_after`` is the number of stages applied before the coupling
    acts; by default the first stage at which the arm is live (B after BS2,
    E after BS3, and so on).
    """

    meter_id: str
    arm: str
    g: float
    config: MeterConfig
    insert_after: int | None = None

    def __post_init__(self) -> None:
        _check_arm(self.arm)

    @property
    def insertion_stage(self) -> int:
        if self.insert_after is None:
            return ARM_FIRST_STAGE[self.arm]
        return self.insert_after

    def validate(self) -> None:
        k = self.insertion_stage
        if not ARM_FIRST_STAGE[self.arm] <= k <= ARM_LAST_STAGE[self.arm]:
            raise ValueError(
                f"arm {self.arm} is not live after stage {k} "
                f"(live {ARM_FIRST_STAGE[self.arm]}..{ARM_LAST_STAGE[self.arm]})"
            )


@dataclass(frozen=True)
class JointBranch:
    """Complex coefficient with one accumulated pointer shift per meter."""

    coefficient: complex
    shifts: tuple[float, ...]


def _merge_joint(branches) -> tuple[JointBranch, ...]:
    merged: list[JointBranch] = []
    for b in branches:
        for i, m in enumerate(merged):
            if len(b.shifts) == len(m.shifts) and all(
                abs(x - y) < SHIFT_MERGE_TOL for x, y in zip(b.shifts, m.shifts)
            ):
                merged[i] = JointBranch(m.coefficient + b.coefficient, m.shifts)
                break
        else:
            merged.append(b)
    # exact cancellations (destructive interference) leave no branch behind
    return tuple(b for b in merged if b.coefficient != 0)


@dataclass(frozen=True)
class JointState:
    """Entangled photon-meter state: per arm, a merged set of joint branches."""

    components: dict[str, tuple[JointBranch, ...]]
    meter_ids: tuple[str, ...]
    configs: tuple[MeterConfig, ...]
    stage: int = 0

    @classmethod
    def from_photon(
        cls,
        state: PhotonState,
        meter_ids: tuple[str, ...] = (),
        configs: tuple[MeterConfig, ...] = (),
        stage: int = 0,
    ) -> "JointState":
        zeros = (0.0,) * len(meter_ids)
        comps = {
            arm: (JointBranch(complex(c), zeros),)
            for arm, c in state.amplitudes.items()
            if c != 0
        }
        return cls(comps, tuple(meter_ids), tuple(configs), stage)

    def _pair_weight(self, bi: JointBranch, bj: JointBranch) -> complex:
        w = bi.coefficient.conjugate() * bj.coefficient
        for s_i, s_j, cfg in zip(bi.shifts, bj.shifts, self.configs):
            w *= branch_overlap(s_i, s_j, cfg.delta)
        return w

    def component_norm2(self, arm: str) -> float:
        branches = self.components.get(_check_arm(arm), ())
        total = 0.0
        for i, bi in enumerate(branches):
            total += abs(bi.coefficient) ** 2
            for bj in branches[i + 1:]:
                total += 2.0 * self._pair_weight(bi, bj).real
        return total

    def component_moment(self, arm: str, slot: int) -> float:
        """Un-normalized <Q_slot> contribution of one arm's component."""
        branches = self.components.get(arm, ())
        total = 0.0
        for i, bi in enumerate(branches):
            total += abs(bi.coefficient) ** 2 * bi.shifts[slot]
            for bj in branches[i + 1:]:
                mid = 0.5 * (bi.shifts[slot] + bj.shifts[slot])
                total += 2.0 * mid * self._pair_weight(bi, bj).real
        return total

    def norm2(self) -> float:
        return sum(self.component_norm2(arm) for arm in self.components)

    def pointer_mean(self, meter_id: str) -> float:
        """Unconditional pointer mean of one meter, all photon outcomes kept."""
        slot = self.meter_ids.index(meter_id)
        n2 = self.norm2()
        if n2 <= 1e-30:
            raise NoPostselectedEventsError("state has zero norm")
        return sum(self.component_moment(a, slot) for a in self.components) / n2


def _with_meter(js: JointState, meter_id: str, config: MeterConfig) -> JointState:
    """Register a new meter slot (shift 0 everywhere) if not already present."""
    if meter_id in js.meter_ids:
        slot = js.meter_ids.index(meter_id)
        if js.configs[slot].delta != config.delta:
            raise ValueError(f"meter {meter_id!r} attached twice with different delta")
        return js
    comps = {
        arm: tuple(JointBranch(b.coefficient, b.shifts + (0.0,)) for b in branches)
        for arm, branches in js.components.items()
    }
    return JointState(comps, js.meter_ids + (meter_id,), js.configs + (config,), js.stage)


def apply_measurement(js: JointState, att: MeterAttachment) -> JointState:
    """Shift the meter branch displacements on the attachment's arm by g.

    Exact in g: the target arm's component is translated rigidly, every
    other component is untouched.
    """
    if not ARM_FIRST_STAGE[att.arm] <= js.stage <= ARM_LAST_STAGE[att.arm]:
        raise ValueError(f"arm {att.arm} is not live at stage {js.stage}")
    js = _with_meter(js, att.meter_id, att.config)
    slot = js.meter_ids.index(att.meter_id)
    comps = dict(js.components)
    if att.arm in comps:
        comps[att.arm] = _merge_joint(
            JointBranch(
                b.coefficient,
                b.shifts[:slot] + (b.shifts[slot] + att.g,) + b.shifts[slot + 1:],
            )
            for b in comps[att.arm]
        )
    return JointState(comps, js.meter_ids, js.configs, js.stage)


def _apply_stage(js: JointState, bs: BeamSplitter) -> JointState:
    for arm in bs.outputs:
        if js.component_norm2(arm) > ATOL:
            raise PipelineError(
                f"BS{bs.ident}: nonzero amplitude already present on output port {arm}"
            )
    m = bs.amplitude_matrix
    in1 = js.components.get(bs.inputs[0], ())
    in2 = js.components.get(bs.inputs[1], ())
    comps = {
        arm: branches
        for arm, branches in js.components.items()
        if arm not in bs.inputs and arm not in bs.outputs
    }
    for row, out in enumerate(bs.outputs):
        mixed = [JointBranch(m[row, 0] * b.coefficient, b.shifts) for b in in1]
        mixed += [JointBranch(m[row, 1] * b.coefficient, b.shifts) for b in in2]
        merged = _merge_joint(mixed)
        if merged:
            comps[out] = merged
    return JointState(comps, js.meter_ids, js.configs, js.stage + 1)


def run_pipeline(
    circuit: Circuit,
    input_state: PhotonState,
    attachments: list[MeterAttachment] | tuple[MeterAttachment, ...] = (),
    upto: int | None = None,
) -> JointState:
    """Evolve |input> x |meters> through the stages, couplings interleaved.

    With no attachments this reduces to the pure path-space evolution. The
    returned state has unit total norm (every coupling is unitary).
    """
    upto = len(circuit) if upto is None else upto
    if not 0 <= upto <= len(circuit):
        raise ValueError(f"stage index {upto} out of range 0..{len(circuit)}")
    meter_ids: list[str] = []
    configs: list[MeterConfig] = []
    for att in attachments:
        att.validate()
        if att.meter_id not in meter_ids:
            meter_ids.append(att.meter_id)
            configs.append(att.config)
        elif configs[meter_ids.index(att.meter_id)].delta != att.config.delta:
            raise ValueError(f"meter {att.meter_id!r} attached twice with different delta")
    js = JointState.from_photon(input_state, tuple(meter_ids), tuple(configs))
    for att in attachments:
        if att.insertion_stage == 0:
            js = apply_measurement(js, att)
    for k, bs in enumerate(circuit.stages[:upto], start=1):
        js = _apply_stage(js, bs)
        for att in attachments:
            if att.insertion_stage == k:
                js = apply_measurement(js, att)
    return js


@dataclass(frozen=True)
class PostselectResult:
    """Un-normalized conditional meter state after projecting onto a detector."""

    probability: float
    branches: tuple[JointBranch, ...]
    meter_ids: tuple[str, ...]
    configs: tuple[MeterConfig, ...]

    def _as_state(self) -> JointState:
        return JointState({"N": self.branches}, self.meter_ids, self.configs)

    def pointer_mean(self, meter_id: str) -> float:
        """Conditional <Q> of one meter given the detector fired."""
        if self.probability <= 1e-30:
            raise NoPostselectedEventsError("postselection probability is zero")
        st = self._as_state()
        slot = self.meter_ids.index(meter_id)
        return st.component_moment("N", slot) / self.probability

    @property
    def meter_waves(self) -> tuple[MeterWave, ...]:
        """One un-normalized MeterWave per meter.

        Exact for a single meter. With several meters the conditional state
        must factorize across them (checked via the coefficient matrix);
        each factor is returned scaled so its squared norm equals the
        postselection probability, with an arbitrary global phase.
        """
        if len(self.meter_ids) == 1:
            return (
                MeterWave(
                    tuple(GaussianBranch(b.coefficient, b.shifts[0]) for b in self.branches),
                    self.configs[0],
                ),
            )
        return tuple(self._factor_slot(k) for k in range(len(self.meter_ids)))

    def _factor_slot(self, slot: int) -> MeterWave:
        if not self.branches:
            return MeterWave((), self.configs[slot])
        shifts_k: list[float] = []
        rest: list[tuple[float, ...]] = []
        for b in self.branches:
            s = b.shifts[slot]
            r = b.shifts[:slot] + b.shifts[slot + 1:]
            if all(abs(s - x) >= SHIFT_MERGE_TOL for x in shifts_k):
                shifts_k.append(s)
            if all(
                any(abs(a - b_) >= SHIFT_MERGE_TOL for a, b_ in zip(r, x)) for x in rest
            ):
                rest.append(r)
        mat = np.zeros((len(shifts_k), len(rest)), dtype=complex)
        for b in self.branches:
            i = next(i for i, s in enumerate(shifts_k) if abs(b.shifts[slot] - s) < SHIFT_MERGE_TOL)
            r = b.shifts[:slot] + b.shifts[slot + 1:]
            j = next(
                j for j, x in enumerate(rest)
                if all(abs(a - b_) < SHIFT_MERGE_TOL for a, b_ in zip(r, x))
            )
            mat[i, j] += b.coefficient
        u, s, _ = np.linalg.svd(mat)
        if s.size > 1 and s[1] > 1e-10 * s[0]:
            raise EntangledMetersError(
                f"meter {self.meter_ids[slot]!r}: conditional state is entangled across meters"
            )
        raw = MeterWave(
            tuple(GaussianBranch(complex(c), sh) for c, sh in zip(u[:, 0], shifts_k)),
            self.configs[slot],
        )
        n2 = wave_norm2(raw)
        scale = np.sqrt(self.probability / n2) if n2 > 0 else 0.0
        return MeterWave(
            tuple(GaussianBranch(b.coefficient * scale, b.shift) for b in raw.branches),
            self.configs[slot],
        )


def postselect(js: JointState, detector: str) -> PostselectResult:
    """Project onto a detector arm: probability plus conditional meter state."""
    if detector not in DETECTORS:
        raise ValueError(f"detector must be one of {DETECTORS}, got {detector!r}")
    branches = js.components.get(detector, ())
    prob = js.component_norm2(detector)
    return PostselectResult(prob, branches, js.meter_ids, js.configs)


def arm_occupation(
    circuit: Circuit,
    input_state: PhotonState,
    attachments: list[MeterAttachment] | tuple[MeterAttachment, ...],
    arm: str,
    stage: int,
) -> float:
    """Probability of finding the photon in ``arm`` after ``stage`` stages.

    Meters are marginalized; exact at any coupling strength.
    """
    _check_arm(arm)
    if not 0 <= stage <= len(circuit):
        raise ValueError(f"stage index {stage} out of range 0..{len(circuit)}")
    if not ARM_FIRST_STAGE[arm] <= stage <= ARM_LAST_STAGE[arm]:
        raise ValueError(f"arm {arm} is not live at stage {stage}")
    js = run_pipeline(circuit, input_state, attachments, upto=stage)
    return js.component_norm2(arm)
