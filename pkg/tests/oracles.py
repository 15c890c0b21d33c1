"""Independent brute-force cross-checks for the test suite.

Everything here is built directly from the fixed beamsplitter ket maps,
dense 11-dimensional matrix products, and grid quadrature with FFT-based
pointer translations. Nothing imports the library's branch algebra, so
agreement between the two routes is a real check.
"""

from __future__ import annotations

import numpy as np

ARMS = ("N", "N0", "A", "D", "D0", "B", "C", "E", "D1", "D2", "D3")
IDX = {arm: i for i, arm in enumerate(ARMS)}

_S = 1.0 / np.sqrt(2.0)

# (inputs) -> (outputs) per stage, fixed convention:
# |in1> -> (|out1> - i|out2>)/sqrt2, |in2> -> (-i|out1> + |out2>)/sqrt2
STAGE_PORTS = [
    (("N", "N0"), ("D", "A")),
    (("D", "D0"), ("C", "B")),
    (("B", "C"), ("D3", "E")),
    (("A", "E"), ("D1", "D2")),
]


def _stage_unitary(inputs, outputs):
    u = np.eye(len(ARMS), dtype=complex)
    i1, i2 = IDX[inputs[0]], IDX[inputs[1]]
    o1, o2 = IDX[outputs[0]], IDX[outputs[1]]
    for a in (i1, i2, o1, o2):
        u[a, a] = 0.0
    u[o1, i1] = _S
    u[o2, i1] = -1j * _S
    u[o1, i2] = -1j * _S
    u[o2, i2] = _S
    # backfill the unused output->input block so the matrix stays unitary;
    # pipeline states never occupy output ports before a stage.
    u[i1, o1] = _S
    u[i2, o1] = -1j * _S
    u[i1, o2] = -1j * _S
    u[i2, o2] = _S
    return u


STAGE_MATRICES = [_stage_unitary(i, o) for i, o in STAGE_PORTS]


def evolve_vector(k: int, amplitudes: dict | None = None) -> np.ndarray:
    """Photon-only evolution by dense matrix products (first k stages)."""
    v = np.zeros(len(ARMS), dtype=complex)
    if amplitudes is None:
        v[IDX["N"]] = 1.0
    else:
        for arm, c in amplitudes.items():
            v[IDX[arm]] = c
    for u in STAGE_MATRICES[:k]:
        v = u @ v
    return v


ARM_STAGE = {"N": 0, "N0": 0, "D0": 0, "A": 1, "D": 1, "B": 2, "C": 2, "E": 3, "D3": 3}


def oracle_weak_value(arm: str, detector: str, amplitudes: dict | None = None) -> complex:
    """Projected transition ratio from dense matrix products."""
    k = ARM_STAGE[arm]
    mid = evolve_vector(k, amplitudes)
    proj = np.zeros_like(mid)
    proj[IDX[arm]] = mid[IDX[arm]]
    for u in STAGE_MATRICES[k:]:
        proj = u @ proj
    full = evolve_vector(4, amplitudes)
    return proj[IDX[detector]] / full[IDX[detector]]


# ---------------------------------------------------------------- quadrature

def gaussian(q, shift, delta):
    return (np.pi * delta) ** -0.25 * np.exp(-((q - shift) ** 2) / (2.0 * delta))


def quad_overlap(a, b, delta, points=200001, span=14.0):
    lo = min(a, b) - span * np.sqrt(delta)
    hi = max(a, b) + span * np.sqrt(delta)
    q = np.linspace(lo, hi, points)
    return np.trapezoid(gaussian(q, a, delta) * gaussian(q, b, delta), q)


def quad_first_moment(a, b, delta, points=200001, span=14.0):
    lo = min(a, b) - span * np.sqrt(delta)
    hi = max(a, b) + span * np.sqrt(delta)
    q = np.linspace(lo, hi, points)
    return np.trapezoid(q * gaussian(q, a, delta) * gaussian(q, b, delta), q)


def quad_wave_stats(branches, delta, points=None, span=10.0):
    """(norm2, mean) of sum_i c_i phi_{s_i} by trapezoid quadrature."""
    shifts = [s for _, s in branches]
    lo = min(shifts) - span * np.sqrt(delta)
    hi = max(shifts) + span * np.sqrt(delta)
    if points is None:
        points = 4096
    q = np.linspace(lo, hi, points)
    wave = sum(c * gaussian(q, s, delta) for c, s in branches)
    density = np.abs(wave) ** 2
    norm2 = np.trapezoid(density, q)
    mean = np.trapezoid(q * density, q) / norm2
    return norm2, mean


# ------------------------------------------------------- joint grid simulator

def _fft_translate(f, q, g, axis=-1):
    k = 2.0 * np.pi * np.fft.fftfreq(q.size, d=q[1] - q[0])
    phase = np.exp(-1j * k * g)
    shape = [1] * f.ndim
    shape[axis] = k.size
    return np.fft.ifft(np.fft.fft(f, axis=axis) * phase.reshape(shape), axis=axis)


class JointGridSim:
    """Photon (11-dim) x meter (position grid) brute-force evolution.

    ``attachments`` are (arm, g, stage, axis) tuples; couplings on the same
    axis share one pointer. One or two meter axes are supported.
    """

    def __init__(self, delta, axes=1, span=40.0, points=16384):
        self.delta = delta
        self.axes = axes
        if axes == 1:
            self.q = np.linspace(-span, span, points)
            self.psi = np.zeros((len(ARMS), points), dtype=complex)
            self.psi[IDX["N"]] = gaussian(self.q, 0.0, delta)
        elif axes == 2:
            pts = min(points, 768)
            self.q = np.linspace(-span, span, pts)
            g1 = gaussian(self.q, 0.0, delta)
            self.psi = np.zeros((len(ARMS), pts, pts), dtype=complex)
            self.psi[IDX["N"]] = np.outer(g1, g1)
        else:
            raise ValueError("axes must be 1 or 2")

    def _couple(self, arm, g, axis):
        w = self.psi[IDX[arm]]
        if self.axes == 1:
            self.psi[IDX[arm]] = _fft_translate(w, self.q, g)
        else:
            self.psi[IDX[arm]] = _fft_translate(w, self.q, g, axis=axis)

    def run(self, attachments, upto=4):
        for arm, g, stage, *axis in attachments:
            if stage == 0:
                self._couple(arm, g, axis[0] if axis else 0)
        for k in range(upto):
            self.psi = np.tensordot(STAGE_MATRICES[k], self.psi, axes=(1, 0))
            for arm, g, stage, *axis in attachments:
                if stage == k + 1:
                    self._couple(arm, g, axis[0] if axis else 0)
        return self

    def _integrate(self, dens):
        if self.axes == 1:
            return np.trapezoid(dens, self.q)
        return np.trapezoid(np.trapezoid(dens, self.q, axis=-1), self.q, axis=-1)

    def prob(self, arm):
        return float(self._integrate(np.abs(self.psi[IDX[arm]]) ** 2))

    def conditional_mean(self, arm, axis=0):
        dens = np.abs(self.psi[IDX[arm]]) ** 2
        p = self._integrate(dens)
        if self.axes == 1:
            return float(np.trapezoid(self.q * dens, self.q) / p)
        grid = self.q[:, None] if axis == 0 else self.q[None, :]
        return float(self._integrate(grid * dens) / p)

    def unconditional_mean(self, axis=0):
        total = 0.0
        for arm in ARMS:
            dens = np.abs(self.psi[IDX[arm]]) ** 2
            if self.axes == 1:
                total += np.trapezoid(self.q * dens, self.q)
            else:
                grid = self.q[:, None] if axis == 0 else self.q[None, :]
                total += self._integrate(grid * dens)
        return float(total)

    def total_norm2(self):
        return float(sum(self._integrate(np.abs(self.psi[IDX[a]]) ** 2) for a in ARMS))
