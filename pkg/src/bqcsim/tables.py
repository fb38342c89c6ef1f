"""Lookup-table constructions and their coherent evaluators.

Every table row is an encryption under one (possibly concatenated) key:

    row = (ct_pad, H(ct_pad || key) xor payload, tag_pad, H(tag_pad || key))

A holder of the key finds its row by the tag and unmasks the payload; the
pads make every row's hash inputs fresh. On top of single rows the module
builds plain lookup tables, reversible (forward + backward) tables, the
branching two-gadget reversible table with its secret output permutation,
and phase tables.

Server-side evaluators act on a SparseState branch by branch: the decrypted
payload is XORed into a target register, which keeps every evaluation an
involution and therefore reversible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bits import apply_perm, invert_perm, random_bits, xor
from .keychain import KeyPair


class UndecryptableBranch(ValueError):
    pass


# Row tags below this width collide too often at desk scale (a false tag
# match silently decrypts the wrong payload), so every table pads its tag
# length up to the floor. Security parameters only ever lengthen tags.
TAG_MIN = 64


@dataclass(frozen=True)
class TableRow:
    ct_pad: str
    ct: str
    tag_pad: str
    tag: str


@dataclass
class LookupTable:
    rows: list[TableRow]
    payload_len: int
    key_len: int


@dataclass
class ReversibleTable:
    forward: LookupTable
    backward: LookupTable


@dataclass
class RobustTable:
    forward: LookupTable
    backward: LookupTable
    perm: list[int] = field(default_factory=list)


@dataclass
class PhaseTable:
    table: LookupTable
    denominator: int


# -- row primitives --------------------------------------------------------


def enc(oracle, key: str, payload: str, pad_len: int, tag_len: int,
        rng, party: str = "client") -> TableRow:
    if pad_len < 1:
        raise ValueError("pad length must be >= 1")
    tag_len = max(tag_len, TAG_MIN)
    ct_pad = random_bits(rng, pad_len)
    tag_pad = random_bits(rng, pad_len)
    mask = oracle.query_classical(ct_pad + key, len(payload), party)
    tag = oracle.query_classical(tag_pad + key, tag_len, party)
    return TableRow(ct_pad, xor(mask, payload), tag_pad, tag)


def dec_row(oracle, row: TableRow, key: str, party: str = "client"):
    """Payload if the key opens this row, else None."""
    tag = oracle.query_classical(row.tag_pad + key, len(row.tag), party)
    if tag != row.tag:
        return None
    mask = oracle.query_classical(row.ct_pad + key, len(row.ct), party)
    return xor(mask, row.ct)


# -- plain lookup tables ---------------------------------------------------


def lt_build(oracle, mapping, pad_len: int, tag_len: int, rng,
             shuffle: bool = True, party: str = "client") -> LookupTable:
    """Build a table from [(key or key-tuple, payload), ...].

    Multi-key entries are concatenated before encryption.
    """
    rows = []
    payload_len = key_len = 0
    seen = set()
    for keys, payload in mapping:
        key = "".join(keys) if isinstance(keys, (tuple, list)) else keys
        if key in seen:
            raise ValueError("duplicate input key in table mapping")
        seen.add(key)
        rows.append(enc(oracle, key, payload, pad_len, tag_len, rng, party))
        payload_len, key_len = len(payload), len(key)
    if shuffle:
        rng.shuffle(rows)
    return LookupTable(rows, payload_len, key_len)


def lt_decrypt(oracle, table: LookupTable, key: str, party: str = "client"):
    for row in table.rows:
        payload = dec_row(oracle, row, key, party)
        if payload is not None:
            return payload
    return None


def lt_eval_coherent(oracle, state, key_regs: list[str], out_reg: str,
                     table: LookupTable, party: str = "server") -> None:
    """XOR each branch's decrypted payload into out_reg.

    One superposed query per row check plus one per payload unmask is
    charged to the evaluating party. Raises on any branch whose keys open
    no row (honest evaluation must abort there).
    """
    oracle.count(party, 2 * len(table.rows))
    cache: dict[str, str] = {}

    def decrypt(key: str) -> str:
        hit = cache.get(key)
        if hit is None:
            for row in table.rows:
                tag = oracle._lookup(row.tag_pad + key, len(row.tag))
                if tag == row.tag:
                    mask = oracle._lookup(row.ct_pad + key, len(row.ct))
                    hit = cache[key] = xor(mask, row.ct)
                    break
            else:
                raise UndecryptableBranch(f"no row opens under branch key")
        return hit

    state.map_multi(
        key_regs, [out_reg],
        lambda keys, outs: (xor(outs[0], decrypt("".join(keys))),),
    )


# -- reversible tables -----------------------------------------------------


def revlt_build(oracle, in_pairs: list[KeyPair], out_pairs: list[KeyPair],
                pad_len: int, rng, party: str = "client") -> ReversibleTable:
    """Bijection between key tuples: forward x_b -> y_b, backward inverts.

    Tag lengths follow the keys they authenticate: output length forward,
    input length backward.
    """
    if len(in_pairs) != len(out_pairs):
        raise ValueError("pair count mismatch")
    n = len(in_pairs)
    out_len = sum(p.width for p in out_pairs)
    in_len = sum(p.width for p in in_pairs)
    fwd, bwd = [], []
    for combo in range(1 << n):
        bs = [(combo >> i) & 1 for i in range(n)]
        key_in = "".join(p[b] for p, b in zip(in_pairs, bs))
        key_out = "".join(p[b] for p, b in zip(out_pairs, bs))
        fwd.append((key_in, key_out))
        bwd.append((key_out, key_in))
    return ReversibleTable(
        lt_build(oracle, fwd, pad_len, out_len, rng, party=party),
        lt_build(oracle, bwd, pad_len, in_len, rng, party=party),
    )


def rev_eval(oracle, state, in_regs: list[str], table: ReversibleTable,
             out_reg: str, party: str = "server") -> str:
    """Coherently re-encode gadget registers through a reversible table.

    |x_b>|0>  ->  |x_b>|y_b>  ->  |0>|y_b>  and the zeroed input registers
    are discarded. Returns the output register name.
    """
    state.add_register(out_reg, "0" * table.forward.payload_len)
    lt_eval_coherent(oracle, state, in_regs, out_reg, table.forward, party)
    if len(in_regs) > 1:
        merged = state.fresh_name("zin")
        state.merge_registers(in_regs, merged)
    else:
        merged = in_regs[0]
    lt_eval_coherent(oracle, state, [out_reg], merged, table.backward, party)
    state.discard_register(merged)
    return out_reg


# -- branching reversible table --------------------------------------------


def robust_rlt_build(oracle, k_help: KeyPair, k2: KeyPair, k3: KeyPair,
                     y2: KeyPair, y3: KeyPair, perm: list[int], pad_len: int,
                     rng, party: str = "client") -> RobustTable:
    """Two-branch reversible table with a secret output bit-permutation.

    Identity-style on helper branch b1=0, CNOT-style on b1=1:
        help_b1 || x2_b2 || x3_b3  ->  perm(y2_b2 || y3_(b3 xor b1*b2))
    The backward table inverts each helper branch separately. Tag length
    equals the pad length on both sides.
    """
    if len(perm) != y2.width + y3.width:
        raise ValueError("permutation must cover the concatenated outputs")
    fwd, bwd = [], []
    for b1 in (0, 1):
        for b2 in (0, 1):
            for b3 in (0, 1):
                out = apply_perm(y2[b2] + y3[b3 ^ (b1 & b2)], perm)
                fwd.append((k_help[b1] + k2[b2] + k3[b3], out))
                bwd.append((k_help[b1] + out, k2[b2] + k3[b3]))
    return RobustTable(
        lt_build(oracle, fwd, pad_len, pad_len, rng, party=party),
        lt_build(oracle, bwd, pad_len, pad_len, rng, party=party),
        list(perm),
    )


def robust_eval(oracle, state, help_reg: str, x2_reg: str, x3_reg: str,
                table: RobustTable, out_reg: str,
                party: str = "server") -> str:
    """Forward-then-backward evaluation of the branching table.

    Consumes the x2/x3 registers, leaves the helper register in place
    (it factorizes out exactly) and returns the permuted output register.
    """
    state.add_register(out_reg, "0" * table.forward.payload_len)
    lt_eval_coherent(oracle, state, [help_reg, x2_reg, x3_reg], out_reg,
                     table.forward, party)
    merged = state.fresh_name("zin")
    state.merge_registers([x2_reg, x3_reg], merged)
    lt_eval_coherent(oracle, state, [help_reg, out_reg], merged,
                     table.backward, party)
    state.discard_register(merged)
    return out_reg


# -- phase tables ----------------------------------------------------------


def phase_lt_build(oracle, pair: KeyPair, n: int, denominator: int,
                   pad_len: int, rng, ordered: bool = False,
                   party: str = "client") -> PhaseTable:
    """Table realizing the relative phase exp(i*pi*n/D) on a gadget.

    The secret offset m is sampled from [0, D); payloads are m and m + n
    without modular reduction so the evaluated phases are exact for every
    m. With ``ordered`` the x0 row comes first, which lets the evaluating
    server derive the branch index from which row opens.
    """
    m = rng.randrange(denominator)
    width = max((2 * denominator - 1).bit_length(),
                (denominator - 1 + n).bit_length())
    mapping = [
        (pair.x0, format(m, f"0{width}b")),
        (pair.x1, format(m + n, f"0{width}b")),
    ]
    table = lt_build(oracle, mapping, pad_len, pad_len, rng,
                     shuffle=not ordered, party=party)
    return PhaseTable(table, denominator)


def phase_eval(oracle, state, reg: str, ptable: PhaseTable,
               party: str = "server") -> None:
    """Decrypt the offset, phase each branch, then un-decrypt the scratch."""
    import math

    scratch = state.fresh_name("ph")
    state.add_register(scratch, "0" * ptable.table.payload_len)
    lt_eval_coherent(oracle, state, [reg], scratch, ptable.table, party)
    state.apply_phase_per_branch(
        scratch, lambda v: math.pi * int(v, 2) / ptable.denominator
    )
    lt_eval_coherent(oracle, state, [reg], scratch, ptable.table, party)
    state.discard_register(scratch)


def serialize_table(table: LookupTable) -> str:
    """Canonical text layout for transcripts: row count then row fields."""
    lines = [f"rows={len(table.rows)} payload={table.payload_len} key={table.key_len}"]
    for r in table.rows:
        lines.append(f"{r.ct_pad},{r.ct},{r.tag_pad},{r.tag}")
    return "\n".join(lines)
