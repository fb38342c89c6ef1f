"""Eight-basis remote state preparation and the blind-computation layer.

``qfac8`` turns one prepared gadget into a single server-side qubit
(|0> + exp(i*theta)|1>)/sqrt(2) whose angle theta = pi*k/4 is known only to
the client: theta2/theta3 come from the client's phase table, theta1 from
the server's Hadamard outcome on the key register.

On top of the prepared qubits, ``ubqc_run`` executes a 1D-cluster
measurement-based computation of a J-gate circuit (J(phi) = H Rz(phi)) with
blinded measurement angles, and ``succ_ubqc`` chains the full gadget
pipeline, the qfactory, and the cluster computation end to end. A dense
statevector evaluator of the same circuits serves as the comparison oracle.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass

import numpy as np

from . import tables
from .bits import dot
from .gadget_prep import Gadget, PipelineConfig, gdgprep_full
from .keychain import KeyPair
from .protocols import (HonestServer, ProtocolParams, Transcript,
                        basis_test_multi)

OCTANT = math.pi / 4


@dataclass(frozen=True)
class AngleOctant:
    """An angle k*pi/4 decomposed as pi*t1 + (pi/2)*t2 + (pi/4)*t3."""

    t1: int
    t2: int
    t3: int

    @property
    def index(self) -> int:
        return (4 * self.t1 + 2 * self.t2 + self.t3) % 8

    @property
    def radians(self) -> float:
        return OCTANT * self.index


@dataclass
class PreparedQubit:
    """A server-held qubit plus the client's secret angle for it."""

    alpha: complex
    beta: complex
    angle: AngleOctant

    def fidelity_vs_angle(self) -> float:
        """Overlap with the ideal (|0> + exp(i*theta)|1>)/sqrt(2)."""
        target = cmath.exp(1j * self.angle.radians)
        return abs(self.alpha + target.conjugate() * self.beta) ** 2 / 2


def qfac8(oracle, gadget: Gadget, params: ProtocolParams, server, rng,
          transcript: Transcript | None = None):
    """One gadget -> one 8-basis qubit on the server.

    Returns (PreparedQubit | None, index register name, Transcript). The
    finished qubit is unentangled from the rest of the server state, so it
    is extracted into explicit amplitudes for the computation layer.
    """
    tr = transcript or Transcript()
    pair, reg = gadget

    bt = basis_test_multi(oracle, pair, reg, params.test_rounds, params,
                          server, rng)
    tr.messages.extend(bt.messages)
    if not bt.passed:
        tr.finish(False, f"basis test: {bt.fail_reason}")
        return None, "", tr

    t2, t3 = rng.randrange(2), rng.randrange(2)
    ptable = tables.phase_lt_build(oracle, pair, 2 * t2 + t3, 4,
                                   params.pad_len, rng, ordered=True)
    tr.send("client", "qf.phase_table", tables.serialize_table(ptable.table))

    idx_reg = server.state.fresh_name("qb")
    server.derive_index_register(reg, ptable, idx_reg)
    d = server.phase_and_measure(reg, ptable)
    tr.send("server", "qf.d", d)
    if len(d) != pair.width or set(d) - {"0", "1"}:
        tr.finish(False, "malformed d")
        return None, idx_reg, tr

    t1 = dot(d, pair.delta())
    tr.finish(True)
    angle = AngleOctant(t1, t2, t3)
    alpha, beta = server.state.extract_qubit(idx_reg)
    return PreparedQubit(alpha, beta, angle), idx_reg, tr


# -- dense circuit oracle --------------------------------------------------


def j_gate(phi: float) -> np.ndarray:
    """J(phi) = H Rz(phi), the universal single-qubit building block."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    rz = np.diag([1, cmath.exp(1j * phi)])
    return h @ rz


def dense_output_prob(circuit_octants: list[int]) -> float:
    """P(output = 1) for J(phi_n)...J(phi_1)|+> measured in Z."""
    psi = np.array([1, 1], dtype=complex) / math.sqrt(2)
    for k in circuit_octants:
        psi = j_gate(OCTANT * k) @ psi
    return float(abs(psi[1]) ** 2)


# -- blind 1D-cluster computation ------------------------------------------

_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def ubqc_run(qubits: list[PreparedQubit], circuit_octants: list[int],
             rng) -> tuple[int, list[int], list[int]]:
    """One blind shot of the circuit on n+1 prepared qubits.

    Qubit i is entangled to its successor and measured at the blinded angle

        delta_i = theta_i - (-1)^x * phi_i + pi*r_i

    (as an octant index mod 8). Byproduct frame: x' = m xor z xor r,
    z' = x; the final qubit is measured in Z and the output bit is
    corrected by x. Returns (output bit, delta octants, raw outcomes).
    """
    n = len(circuit_octants)
    if len(qubits) != n + 1:
        raise ValueError("need n+1 qubits for an n-gate circuit")
    carrier = np.array([qubits[0].alpha, qubits[0].beta], dtype=complex)
    x = z = 0
    deltas: list[int] = []
    outcomes: list[int] = []
    for i, phi in enumerate(circuit_octants):
        r = rng.randrange(2)
        sign = -1 if x == 0 else 1
        delta = (qubits[i].angle.index + sign * phi + 4 * r) % 8
        deltas.append(delta)

        nxt = np.array([qubits[i + 1].alpha, qubits[i + 1].beta],
                       dtype=complex)
        joint = _CZ @ np.kron(carrier, nxt)
        # project the carrier onto (|0> +/- exp(i*delta)|1>)/sqrt(2)
        e = cmath.exp(-1j * OCTANT * delta)
        branch0 = (joint[0:2] + e * joint[2:4]) / math.sqrt(2)
        branch1 = (joint[0:2] - e * joint[2:4]) / math.sqrt(2)
        p0 = float(np.vdot(branch0, branch0).real)
        p1 = float(np.vdot(branch1, branch1).real)
        m = 0 if rng.random() * (p0 + p1) <= p0 else 1
        carrier = (branch0 if m == 0 else branch1)
        carrier = carrier / np.linalg.norm(carrier)
        outcomes.append(m)

        x, z = m ^ z ^ r, x
    p_one = float(abs(carrier[1]) ** 2)
    o = 1 if rng.random() < p_one else 0
    return o ^ x, deltas, outcomes


def reblind(qubit: PreparedQubit, rng) -> PreparedQubit:
    """Rotate a prepared qubit by a fresh random octant.

    Models preparing a fresh qubit for the next shot without rerunning the
    factory: the extra Rz(k*pi/4) shifts the secret angle by k and leaves
    any preparation imperfection untouched.
    """
    k = rng.randrange(8)
    a = qubit.angle
    idx = (a.index + k) % 8
    return PreparedQubit(
        qubit.alpha,
        qubit.beta * cmath.exp(1j * OCTANT * k),
        AngleOctant((idx >> 2) & 1, (idx >> 1) & 1, idx & 1),
    )


def ubqc_shots(qubits: list[PreparedQubit], circuit_octants: list[int],
               rng, shots: int, fresh_angles: bool = True):
    """Repeated blind shots; returns (count of 1s, all delta octants).

    With ``fresh_angles`` every shot re-blinds each qubit first, as a real
    run would prepare fresh qubits; without it the same angles repeat and
    the aggregated deltas are no longer uniform.
    """
    ones = 0
    all_deltas: list[int] = []
    for _ in range(shots):
        qs = [reblind(q, rng) for q in qubits] if fresh_angles else qubits
        out, deltas, _ = ubqc_run(qs, circuit_octants, rng)
        ones += out
        all_deltas.extend(deltas)
    return ones, all_deltas


# -- the full stack --------------------------------------------------------


def prepare_qubits(oracle, gadgets: list[Gadget], params: ProtocolParams,
                   server, rng, tr: Transcript):
    qubits = []
    for g in gadgets:
        qb, _, sub = qfac8(oracle, g, params, server, rng)
        tr.messages.extend(sub.messages)
        if qb is None:
            return None
        qubits.append(qb)
    return qubits


def succ_ubqc(oracle, config: PipelineConfig, circuit_octants: list[int],
              server, rng, shots: int = 1):
    """Pipeline -> qfactory per gadget -> blind cluster computation.

    The pipeline must yield at least n+1 gadgets for an n-gate circuit.
    Returns (ones count, delta octants, Transcript).
    """
    tr = Transcript()
    gadgets, sub, _ = gdgprep_full(oracle, config, server, rng)
    tr.messages.extend(sub.messages)
    if not sub.passed:
        tr.finish(False, sub.fail_reason)
        return None, [], tr

    need = len(circuit_octants) + 1
    if len(gadgets) < need:
        tr.finish(False, "pipeline yielded too few gadgets")
        return None, [], tr
    params = config.params_for_round(config.rounds() or 1)
    qubits = prepare_qubits(oracle, gadgets[:need], params, server, rng, tr)
    if qubits is None:
        tr.finish(False, "qfactory failed")
        return None, [], tr

    ones, deltas = ubqc_shots(qubits, circuit_octants, rng, shots)
    tr.send("client", "ubqc.result", f"shots={shots} ones={ones}")
    tr.finish(True)
    return ones, deltas, tr
