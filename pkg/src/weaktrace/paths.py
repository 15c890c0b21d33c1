"""Single-photon path space of the nested Mach-Zehnder interferometer.

A photon state is a complex amplitude per labeled arm. The setup is four
50-50 beamsplitters: BS1 splits the source arm N into the outer arm A and
the inner-interferometer feed D, BS2 splits D into the inner arms B and C,
BS3 recombines B and C into the detector arm D3 and the dark arm E, and
BS4 recombines A and E into the detector arms D1 and D2. The inner
interferometer is tuned so that B and C interfere destructively into E;
an undisturbed photon therefore never reaches E.

Each beamsplitter stores the conventional 2x2 matrix relating output kets
to input kets,

    (|out1>, |out2>)^T = transfer (|in1>, |in2>)^T,
    transfer = (1/sqrt 2) [[1, i], [i, 1]],

which acts on amplitude vectors through its conjugate transpose:
``a_out = transfer^dagger @ a_in``, i.e. ``|in1> -> (|out1> - i|out2>)/sqrt2``
and ``|in2> -> (-i|out1> + |out2>)/sqrt2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Closed set of arm labels. N is the source arm; N0 and D0 are the unused
#: vacuum input ports of BS1 and BS2; D1..D3 are detector arms.
ARMS: tuple[str, ...] = ("N", "N0", "A", "D", "D0", "B", "C", "E", "D1", "D2", "D3")

DETECTORS: tuple[str, ...] = ("D1", "D2", "D3")

#: Stage index (number of beamsplitters applied) at which an arm first can
#: carry amplitude, and the last stage index before it is consumed.
ARM_FIRST_STAGE: dict[str, int] = {
    "N": 0, "N0": 0, "D0": 0,
    "A": 1, "D": 1,
    "B": 2, "C": 2,
    "E": 3, "D3": 3,
    "D1": 4, "D2": 4,
}
ARM_LAST_STAGE: dict[str, int] = {
    "N": 0, "N0": 0, "D0": 1,
    "A": 3, "D": 1,
    "B": 2, "C": 2,
    "E": 3, "D3": 4,
    "D1": 4, "D2": 4,
}

ATOL = 1e-12


class PipelineError(ValueError):
    """A stage was applied to a state that already occupies its output ports."""


def _check_arm(arm: str) -> str:
    if arm not in ARMS:
        raise ValueError(f"unknown arm label {arm!r}; expected one of {ARMS}")
    return arm


@dataclass(frozen=True)
class PhotonState:
    """Complex amplitude per arm; absent labels carry amplitude zero."""

    amplitudes: dict[str, complex]

    def __post_init__(self) -> None:
        for arm in self.amplitudes:
            _check_arm(arm)

    @classmethod
    def basis(cls, arm: str) -> "PhotonState":
        return cls({_check_arm(arm): 1.0 + 0.0j})

    @classmethod
    def source(cls) -> "PhotonState":
        """The photon entering the setup from the source, |N>."""
        return cls.basis("N")

    def amplitude(self, arm: str) -> complex:
        return complex(self.amplitudes.get(_check_arm(arm), 0.0))

    def norm2(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.amplitudes.values()))

    def support(self) -> tuple[str, ...]:
        return tuple(a for a in ARMS if abs(self.amplitudes.get(a, 0.0)) > ATOL)


@dataclass(frozen=True)
class BeamSplitter:
    """A 2-input/2-output unitary stage with explicit port assignment.

    ``transfer`` is the matrix relating output kets to input kets; the
    amplitude-vector action is by its conjugate transpose (module docstring).
    """

    ident: int
    inputs: tuple[str, str]
    outputs: tuple[str, str]
    transfer: np.ndarray

    def __post_init__(self) -> None:
        for arm in (*self.inputs, *self.outputs):
            _check_arm(arm)
        if set(self.inputs) & set(self.outputs):
            raise ValueError(f"BS{self.ident}: input and output ports must be disjoint")
        t = np.asarray(self.transfer, dtype=complex)
        if t.shape != (2, 2):
            raise ValueError(f"BS{self.ident}: transfer must be 2x2")
        if not np.allclose(t.conj().T @ t, np.eye(2), atol=ATOL, rtol=0.0):
            raise ValueError(f"BS{self.ident}: transfer is not unitary to {ATOL}")
        object.__setattr__(self, "transfer", t)

    @property
    def amplitude_matrix(self) -> np.ndarray:
        """Matrix sending input-port amplitudes to output-port amplitudes."""
        return self.transfer.conj().T


@dataclass(frozen=True)
class Circuit:
    """Ordered beamsplitter stages forming a directed acyclic layout."""

    stages: tuple[BeamSplitter, ...]

    def __post_init__(self) -> None:
        produced: dict[str, int] = {}
        consumed: dict[str, int] = {}
        for k, bs in enumerate(self.stages):
            for arm in bs.outputs:
                if arm in produced:
                    raise ValueError(f"arm {arm} is an output of two stages")
                produced[arm] = k
            for arm in bs.inputs:
                if arm in consumed:
                    raise ValueError(f"arm {arm} is an input of two stages")
                if arm in produced and produced[arm] >= k:
                    raise ValueError(f"arm {arm} consumed before it is produced")
                consumed[arm] = k

    def __len__(self) -> int:
        return len(self.stages)


_BALANCED = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex) / np.sqrt(2.0)


def build_nested_mzi() -> Circuit:
    """The four-stage nested interferometer with the fixed port assignment.

    Applying it to |N> gives -i(sqrt2|A> + |B> + i|C>)/2 after BS2 and
    -i(|A> + |D3>)/sqrt2 after BS3 (dark port E empty).
    """
    return Circuit((
        BeamSplitter(1, ("N", "N0"), ("D", "A"), _BALANCED),
        BeamSplitter(2, ("D", "D0"), ("C", "B"), _BALANCED),
        BeamSplitter(3, ("B", "C"), ("D3", "E"), _BALANCED),
        BeamSplitter(4, ("A", "E"), ("D1", "D2"), _BALANCED),
    ))


def apply_beamsplitter(state: PhotonState, bs: BeamSplitter) -> PhotonState:
    """Route the amplitudes on ``bs.inputs`` onto ``bs.outputs``.

    Raises PipelineError if the state already has amplitude on an output
    port (the stage would not be a well-formed step of the forward pipeline).
    """
    for arm in bs.outputs:
        if abs(state.amplitudes.get(arm, 0.0)) > ATOL:
            raise PipelineError(
                f"BS{bs.ident}: nonzero amplitude already present on output port {arm}"
            )
    a_in = np.array([state.amplitude(p) for p in bs.inputs])
    a_out = bs.amplitude_matrix @ a_in
    amps = {a: c for a, c in state.amplitudes.items() if a not in bs.inputs and a not in bs.outputs}
    amps[bs.outputs[0]] = complex(a_out[0])
    amps[bs.outputs[1]] = complex(a_out[1])
    return PhotonState(amps)


def apply_beamsplitter_inverse(state: PhotonState, bs: BeamSplitter) -> PhotonState:
    """Undo a stage: route output-port amplitudes back onto the input ports."""
    for arm in bs.inputs:
        if abs(state.amplitudes.get(arm, 0.0)) > ATOL:
            raise PipelineError(
                f"BS{bs.ident} inverse: nonzero amplitude already present on input port {arm}"
            )
    a_out = np.array([state.amplitude(p) for p in bs.outputs])
    a_in = bs.transfer @ a_out
    amps = {a: c for a, c in state.amplitudes.items() if a not in bs.inputs and a not in bs.outputs}
    amps[bs.inputs[0]] = complex(a_in[0])
    amps[bs.inputs[1]] = complex(a_in[1])
    return PhotonState(amps)


def evolve_to_stage(circuit: Circuit, state: PhotonState, k: int) -> PhotonState:
    """State after the first ``k`` stages; ``k = 0`` is the identity."""
    if not 0 <= k <= len(circuit):
        raise ValueError(f"stage index {k} out of range 0..{len(circuit)}")
    for bs in circuit.stages[:k]:
        state = apply_beamsplitter(state, bs)
    return state


def projector_expectation(state: PhotonState, arm: str) -> float:
    """Probability |<arm|state>|^2 of finding the photon in the given arm."""
    return float(abs(state.amplitude(arm)) ** 2)
