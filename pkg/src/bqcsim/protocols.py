"""Atomic interactive sub-protocols.

Each protocol is a client routine that drives a server object through typed
messages. The server side is pluggable: :class:`HonestServer` implements the
intended quantum behavior on a SparseState; adversaries subclass it and
override individual responses (see :mod:`bqcsim.adversary`).

Every run appends its messages to a :class:`Transcript`, which serializes to
line records so equal seeds replay byte-identically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import tables
from .bits import dot, random_bits, xor
from .keychain import KeyPair, combine_keys
from .state import SparseState


@dataclass
class ProtocolParams:
    pad_len: int = 8          # table/pad length
    kappa_out: int = 8        # output key / hash length
    test_rounds: int = 2      # T, rounds of repeated basis testing
    refresh_rounds: int = 1   # J, security refreshing rounds
    kappa: int = 8            # nominal security parameter
    mode: str = "toy"         # "toy" or "paper"

    def check(self) -> list[str]:
        """In "paper" mode, report (never enforce) the asymptotic guidance."""
        notes = []
        if self.mode == "paper":
            if self.pad_len < 4 * self.kappa:
                notes.append("pad_len below the asymptotic 4*eta guidance")
            if self.kappa_out <= self.pad_len:
                notes.append("kappa_out should exceed pad_len asymptotically")
        if self.pad_len < 1 or self.kappa_out < 1:
            raise ValueError("pad_len and kappa_out must be >= 1")
        return notes


class Transcript:
    """Append-only message log with a single pass/fail verdict."""

    def __init__(self):
        self.messages: list[tuple[str, str, str]] = []
        self.verdict: str | None = None
        self.fail_reason: str | None = None

    def send(self, sender: str, tag: str, payload: str = "") -> None:
        self.messages.append((sender, tag, payload))

    def finish(self, ok: bool, reason: str | None = None) -> None:
        if self.verdict is not None:
            raise RuntimeError("verdict already set")
        self.verdict = "pass" if ok else "fail"
        self.fail_reason = reason

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def serialize(self) -> str:
        lines = [f"{s}\t{t}\t{p}" for s, t, p in self.messages]
        lines.append(f"verdict\t{self.verdict}\t{self.fail_reason or ''}")
        return "\n".join(lines) + "\n"


class HonestServer:
    """The server the protocols are designed for.

    Holds the quantum memory and answers every client message with the
    honest behavior. All oracle traffic is charged to the "server" party.
    """

    party = "server"

    def __init__(self, oracle, seed: int = 0):
        self.oracle = oracle
        self.rng = random.Random(seed)
        self.state = SparseState()

    def prepare_gadget(self, name: str, pair: KeyPair) -> str:
        return self.state.add_gadget(name, pair.x0, pair.x1)

    # -- padded Hadamard test ---------------------------------------------

    def respond_pad_hadamard(self, reg: str, pad: str, kappa_out: int) -> str:
        h = self.state.fresh_name("ph_h")
        self.state.add_register(h, "0" * kappa_out)
        self.oracle.query_superposed(self.state, reg, h, self.party, prefix=pad)
        w = self.state.fresh_name("ph_w")
        self.state.merge_registers([reg, h], w)
        return self.state.measure_hadamard(w, self.rng)

    # -- basis test --------------------------------------------------------

    def respond_basis_test(self, regs: list[str], table) -> str:
        """Decrypt the test table coherently, read r, erase the scratch."""
        scratch = self.state.fresh_name("bt")
        self.state.add_register(scratch, "0" * table.payload_len)
        tables.lt_eval_coherent(self.oracle, self.state, regs, scratch,
                                table, self.party)
        value = self.state.measure_computational(scratch, self.rng)
        tables.lt_eval_coherent(self.oracle, self.state, regs, scratch,
                                table, self.party)
        self.state.discard_register(scratch)
        return value

    # -- combine -----------------------------------------------------------

    def respond_combine(self, reg_a: str, reg_b: str, tag_a0: str,
                        tag_b0: str, pads: tuple[str, str],
                        out_reg: str) -> int:
        """Measure the XOR of the two gadgets' subscripts.

        Subscripts are identified by comparing global tags of the branch
        values against the published tag of each pair's 0-key; the two
        registers are then merged (with the subscript pad prefixed) into
        one output gadget register.
        """
        st = self.state
        ia, ib = st._index(reg_a), st._index(reg_b)
        sub_cache: dict[tuple[str, int], int] = {}

        def subscript(val: str, which: int) -> int:
            key = (val, which)
            if key not in sub_cache:
                t = self.oracle.tag(val, party=self.party)
                sub_cache[key] = 0 if t == (tag_a0 if which == 0 else tag_b0) else 1
            return sub_cache[key]

        weights = {0: 0.0, 1: 0.0}
        for k, v in st.branches.items():
            o = subscript(k[ia], 0) ^ subscript(k[ib], 1)
            weights[o] += abs(v) ** 2
        outcome = 0 if self.rng.random() * (weights[0] + weights[1]) <= weights[0] else 1
        st.branches = {
            k: v for k, v in st.branches.items()
            if subscript(k[ia], 0) ^ subscript(k[ib], 1) == outcome
        }
        st.renormalize()
        wa = st.width(reg_a)
        st.merge_registers([reg_a, reg_b], out_reg)
        pad_w = len(pads[0])
        if pad_w:
            st.transform_register(
                out_reg,
                lambda val: pads[subscript(val[:wa], 0)] + val,
                st.width(out_reg) + pad_w,
            )
        return outcome


    # -- gadget preparation ------------------------------------------------

    def eval_robust(self, help_reg: str, k2: KeyPair, x3_reg: str,
                    table, out_reg: str) -> str:
        """Build the plaintext K2 gadget and run the branching table."""
        k2_reg = self.state.fresh_name("k2")
        self.state.add_gadget(k2_reg, k2.x0, k2.x1)
        return tables.robust_eval(self.oracle, self.state, help_reg, k2_reg,
                                  x3_reg, table, out_reg, self.party)

    def depermute_split(self, out_reg: str, perm: list[int],
                        width2: int, names: tuple[str, str]) -> None:
        from .bits import invert_perm

        self.state.apply_bitwise_permutation(out_reg, invert_perm(perm))
        total = self.state.width(out_reg)
        self.state.split_register(out_reg, [width2, total - width2], list(names))

    def extend_gadget(self, reg: str, lam_reg: str, table) -> None:
        """Append the decrypted refresh key to an existing gadget register."""
        scratch = self.state.fresh_name("ext")
        self.state.add_register(scratch, "0" * table.payload_len)
        tables.lt_eval_coherent(self.oracle, self.state, [reg, lam_reg],
                                scratch, table, self.party)
        self.state.merge_registers([reg, scratch], reg)

    def prepend_pad(self, reg: str, pad: str) -> None:
        self.state.transform_register(reg, lambda v: pad + v,
                                      self.state.width(reg) + len(pad))

    # -- 8-basis qfactory --------------------------------------------------

    def derive_index_register(self, reg: str, ptable, idx_reg: str) -> str:
        """Branch index bit from which phase-table row opens (x0 row first)."""
        row0 = ptable.table.rows[0]
        self.oracle.count(self.party, 2)
        cache: dict[str, str] = {}

        def fn(val: str, old: str) -> str:
            b = cache.get(val)
            if b is None:
                t = self.oracle._lookup(row0.tag_pad + val, len(row0.tag))
                b = cache[val] = "0" if t == row0.tag else "1"
            return b

        self.state.add_register(idx_reg, "0")
        self.state.map_pair(reg, idx_reg, fn)
        return idx_reg

    def phase_and_measure(self, reg: str, ptable) -> str:
        """Apply the phase table, then Hadamard-measure the key register."""
        tables.phase_eval(self.oracle, self.state, reg, ptable, self.party)
        return self.state.measure_hadamard(reg, self.rng)


# -- client-side protocol drivers ------------------------------------------


def pad_hadamard(oracle, pair: KeyPair, reg: str, params: ProtocolParams,
                 server, rng, transcript: Transcript | None = None) -> Transcript:
    """Padded Hadamard test on one gadget (consumes it on the server)."""
    tr = transcript or Transcript()
    pad = random_bits(rng, params.pad_len)
    tr.send("client", "ph.pad", pad)
    d = server.respond_pad_hadamard(reg, pad, params.kappa_out)
    tr.send("server", "ph.d", d)
    want = pair.width + params.kappa_out
    if not isinstance(d, str) or len(d) != want or set(d) - {"0", "1"}:
        tr.finish(False, "malformed d")
        return tr
    h0 = oracle.query_classical(pad + pair.x0, params.kappa_out)
    h1 = oracle.query_classical(pad + pair.x1, params.kappa_out)
    w0, w1 = pair.x0 + h0, pair.x1 + h1
    tail = d[-params.kappa_out:]
    if tail == "0" * params.kappa_out:
        tr.finish(False, "all-zero tail")
    elif dot(d, w0) != dot(d, w1):
        tr.finish(False, "parity mismatch")
    else:
        tr.finish(True)
    return tr


def basis_test_single(oracle, pair: KeyPair, reg: str, params: ProtocolParams,
                      server, rng, transcript: Transcript | None = None,
                      extra_regs: tuple = ()) -> Transcript:
    """Single-round basis test: both keys decrypt to the same fresh r."""
    tr = transcript or Transcript()
    r = random_bits(rng, params.kappa_out)
    table = tables.lt_build(
        oracle, [(pair.x0, r), (pair.x1, r)],
        params.pad_len, params.kappa_out, rng,
    )
    tr.send("client", "bt.table", tables.serialize_table(table))
    answer = server.respond_basis_test([reg], table)
    tr.send("server", "bt.r", answer)
    tr.finish(answer == r, None if answer == r else "wrong r")
    return tr


def basis_test_multi(oracle, pair: KeyPair, reg: str, rounds: int,
                     params: ProtocolParams, server, rng) -> Transcript:
    """T sequential single-round tests with fresh r each round."""
    tr = Transcript()
    for t in range(rounds):
        sub = basis_test_single(oracle, pair, reg, params, server, rng)
        tr.messages.extend(sub.messages)
        if not sub.passed:
            tr.finish(False, f"round {t}: {sub.fail_reason}")
            return tr
    tr.finish(True)
    return tr


def basis_test_two(oracle, pair1: KeyPair, reg1: str, pair3: KeyPair,
                   reg3: str, rounds: int, params: ProtocolParams,
                   server, rng) -> Transcript:
    """Multi-round test on the second pair, then one round on the first."""
    tr = basis_test_multi(oracle, pair3, reg3, rounds, params, server, rng)
    if not tr.passed:
        return tr
    tr2 = basis_test_single(oracle, pair1, reg1, params, server, rng)
    tr.messages.extend(tr2.messages)
    if not tr2.passed:
        out = Transcript()
        out.messages = tr.messages
        out.finish(False, tr2.fail_reason)
        return out
    return tr


def combine(oracle, pair_a: KeyPair, pair_b: KeyPair, reg_a: str, reg_b: str,
            params: ProtocolParams, server, rng, improved: bool = True,
            out_reg: str | None = None):
    """Combine two gadgets into one by measuring the subscript XOR.

    Returns (new KeyPair or None, Transcript, output register name).
    """
    tr = Transcript()
    tag_a0 = oracle.tag(pair_a.x0)
    tag_b0 = oracle.tag(pair_b.x0)
    tr.send("client", "cb.tags", tag_a0 + "," + tag_b0)
    pads = ("", "")
    if improved:
        pads = (random_bits(rng, params.pad_len), random_bits(rng, params.pad_len))
        # binding commitments of the four keys under fresh pads
        commits = []
        for p in (pair_a, pair_b):
            for b in (0, 1):
                rpad = random_bits(rng, params.pad_len)
                commits.append(rpad + ":" + oracle.query_classical(
                    rpad + p[b], params.kappa_out))
        tr.send("client", "cb.commits", ";".join(commits))
        tr.send("client", "cb.pads", pads[0] + "," + pads[1])
    name = out_reg or f"cb_{reg_a}_{reg_b}"
    outcome = server.respond_combine(reg_a, reg_b, tag_a0, tag_b0, pads, name)
    tr.send("server", "cb.outcome", str(outcome))
    if outcome not in (0, 1):
        tr.finish(False, "non-bit response")
        return None, tr, name
    new_pair = combine_keys(pair_a, pair_b, outcome, pads)
    tr.finish(True)
    return new_pair, tr, name
