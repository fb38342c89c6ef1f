"""Sparse statevector over tuples of named bitstring registers.

The server's quantum memory is a normalized map from branch value-tuples to
complex amplitudes. Honest protocol states only ever contain a small number
of branches (at most 2 per gadget register), so every operation enumerates
branches rather than a 2^n Hilbert space.

The one non-obvious primitive is :meth:`SparseState.measure_hadamard`. A
register can be hundreds of bits wide, so the outcome ``d`` is never sampled
by enumerating 2^width candidates. Instead: for the small set of values the
register takes across branches, only the parities ``d . (s_j xor s_1)``
affect the outcome distribution, so we sample a consistent parity assignment
with probability proportional to the interference weight and then draw ``d``
uniformly from the affine solution set of the corresponding GF(2) linear
system.
"""

from __future__ import annotations

import cmath
import math

from .bits import bits_to_int, int_to_bits, parity

ATOL = 1e-9


class EntangledDiscardError(ValueError):
    pass


class SparseState:
    def __init__(self):
        self.registers: list[tuple[str, int]] = []
        self.branches: dict[tuple[str, ...], complex] = {(): 1.0 + 0.0j}
        self._name_counter = 0

    # -- bookkeeping -------------------------------------------------------

    def fresh_name(self, prefix: str = "r") -> str:
        self._name_counter += 1
        return f"{prefix}{self._name_counter}"

    def _index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.registers):
            if n == name:
                return i
        raise KeyError(f"no register named {name!r}")

    def width(self, name: str) -> int:
        return self.registers[self._index(name)][1]

    def register_names(self) -> list[str]:
        return [n for n, _ in self.registers]

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.branches.values()))

    def renormalize(self) -> None:
        n = self.norm()
        if n < ATOL:
            raise ValueError("state has collapsed to zero norm")
        self.branches = {k: v / n for k, v in self.branches.items()}

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > ATOL:
            raise AssertionError(f"state norm {self.norm()} drifted from 1")

    # -- construction ------------------------------------------------------

    def add_register(self, name: str, value: str) -> str:
        """Tensor on a register in a computational basis state."""
        if any(n == name for n, _ in self.registers):
            raise ValueError(f"register {name!r} already exists")
        self.registers.append((name, len(value)))
        self.branches = {k + (value,): v for k, v in self.branches.items()}
        return name

    def add_gadget(self, name: str, x0: str, x1: str) -> str:
        """Tensor on a register in state (|x0> + |x1>)/sqrt(2)."""
        if x0 == x1:
            raise ValueError("gadget requires two different keys")
        if len(x0) != len(x1):
            raise ValueError("gadget keys must have equal width")
        if any(n == name for n, _ in self.registers):
            raise ValueError(f"register {name!r} already exists")
        self.registers.append((name, len(x0)))
        s = 1 / math.sqrt(2)
        new = {}
        for k, v in self.branches.items():
            new[k + (x0,)] = v * s
            new[k + (x1,)] = v * s
        self.branches = new
        return name

    # -- branch maps -------------------------------------------------------

    def map_register(self, name: str, fn) -> None:
        """Apply a value-wise bijection to one register."""
        i = self._index(name)
        w = self.registers[i][1]
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            nv = fn(k[i])
            if len(nv) != w:
                raise ValueError("map_register changed register width")
            nk = k[:i] + (nv,) + k[i + 1:]
            new[nk] = new.get(nk, 0) + v
        self.branches = {k: v for k, v in new.items() if abs(v) > ATOL}

    def map_pair(self, src: str, dst: str, fn) -> None:
        """dst_value <- fn(src_value, dst_value), branch by branch."""
        i, j = self._index(src), self._index(dst)
        w = self.registers[j][1]
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            nv = fn(k[i], k[j])
            if len(nv) != w:
                raise ValueError("map_pair changed register width")
            nk = k[:j] + (nv,) + k[j + 1:]
            new[nk] = new.get(nk, 0) + v
        self.branches = {k: v for k, v in new.items() if abs(v) > ATOL}

    def map_multi(self, key_regs: list[str], dst_regs: list[str], fn) -> None:
        """dst values <- fn(key values, dst values); fn returns a tuple."""
        ki = [self._index(r) for r in key_regs]
        di = [self._index(r) for r in dst_regs]
        widths = [self.registers[i][1] for i in di]
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            outs = fn(tuple(k[i] for i in ki), tuple(k[i] for i in di))
            if len(outs) != len(di) or any(
                len(o) != w for o, w in zip(outs, widths)
            ):
                raise ValueError("map_multi output widths mismatch")
            nk = list(k)
            for i, o in zip(di, outs):
                nk[i] = o
            nk = tuple(nk)
            new[nk] = new.get(nk, 0) + v
        self.branches = {k: v for k, v in new.items() if abs(v) > ATOL}

    def transform_register(self, name: str, fn, new_width: int | None = None) -> None:
        """Like map_register but the image may have a different width."""
        i = self._index(name)
        w = new_width if new_width is not None else self.registers[i][1]
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            nv = fn(k[i])
            if len(nv) != w:
                raise ValueError("transform_register width mismatch")
            nk = k[:i] + (nv,) + k[i + 1:]
            new[nk] = new.get(nk, 0) + v
        self.registers[i] = (name, w)
        self.branches = {k: v for k, v in new.items() if abs(v) > ATOL}

    def apply_phase_per_branch(self, name: str, phase_fn) -> None:
        """Multiply each branch amplitude by exp(i * phase_fn(value))."""
        i = self._index(name)
        self.branches = {
            k: v * cmath.exp(1j * phase_fn(k[i])) for k, v in self.branches.items()
        }

    def apply_bitwise_permutation(self, name: str, perm) -> None:
        from .bits import apply_perm

        if len(perm) != self.width(name):
            raise ValueError("permutation length mismatch")
        self.map_register(name, lambda s: apply_perm(s, perm))

    # -- measurements ------------------------------------------------------

    def measure_computational(self, name: str, rng) -> str:
        i = self._index(name)
        weights: dict[str, float] = {}
        for k, v in self.branches.items():
            weights[k[i]] = weights.get(k[i], 0.0) + abs(v) ** 2
        values = sorted(weights)
        total = sum(weights.values())
        pick = rng.random() * total
        acc = 0.0
        outcome = values[-1]
        for val in values:
            acc += weights[val]
            if pick <= acc:
                outcome = val
                break
        self.branches = {k: v for k, v in self.branches.items() if k[i] == outcome}
        self.renormalize()
        return outcome

    def measure_hadamard(self, name: str, rng) -> str:
        """Hadamard-measure every qubit of a register.

        Returns the outcome string ``d``, removes the register, and applies
        the residual phase (-1)^(d . s) for each branch's former value ``s``.
        """
        i = self._index(name)
        w = self.registers[i][1]

        values = sorted({k[i] for k in self.branches})
        ref = bits_to_int(values[0])
        diffs = [bits_to_int(s) ^ ref for s in values[1:]]

        # Incremental GF(2) echelon basis of the difference span; for each
        # diff record its representation as a combo (bitmask) over basis
        # vectors, so parities of d . diff follow from parities on the basis.
        basis: list[int] = []
        echelon: dict[int, tuple[int, int]] = {}  # lead bit -> (vec, combo)
        reprs: list[int] = []  # combo bitmask per diff
        for d in diffs:
            v, combo = d, 0
            while v:
                lead = v.bit_length() - 1
                if lead not in echelon:
                    break
                evec, ecombo = echelon[lead]
                v ^= evec
                combo ^= ecombo
            if v:
                t = len(basis)
                basis.append(v)
                echelon[v.bit_length() - 1] = (v, 1 << t)
                combo ^= 1 << t
            reprs.append(combo)

        # weight of each parity assignment on the basis vectors
        rank = len(basis)
        # group amplitudes by context (all other registers)
        ctx_amps: dict[tuple[str, ...], dict[str, complex]] = {}
        for k, v in self.branches.items():
            ctx = k[:i] + k[i + 1:]
            ctx_amps.setdefault(ctx, {})[k[i]] = v

        weights = []
        for combo in range(1 << rank):
            val_par = {values[0]: 0}
            for vi, rep in enumerate(reprs):
                val_par[values[vi + 1]] = parity(combo & rep)
            wsum = 0.0
            for amps in ctx_amps.values():
                acc = 0j
                for s, a in amps.items():
                    acc += a * (-1) ** val_par[s]
                wsum += abs(acc) ** 2
            weights.append(wsum)

        total = sum(weights)
        pick = rng.random() * total
        acc = 0.0
        chosen = len(weights) - 1
        for ci, wt in enumerate(weights):
            acc += wt
            if pick <= acc:
                chosen = ci
                break
        target = [(chosen >> b) & 1 for b in range(rank)]

        # sample d uniformly from {d : d . basis_b = target_b for all b}
        d_int = self._solve_affine(basis, target, w, rng)
        d = int_to_bits(d_int, w)

        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            sgn = (-1) ** parity(d_int & bits_to_int(k[i]))
            ctx = k[:i] + k[i + 1:]
            new[ctx] = new.get(ctx, 0) + v * sgn
        self.registers.pop(i)
        self.branches = {k: v for k, v in new.items() if abs(v) > ATOL}
        self.renormalize()
        return d

    @staticmethod
    def _solve_affine(rows: list[int], rhs: list[int], width: int, rng) -> int:
        """Uniform solution of d . rows[j] = rhs[j] over GF(2)^width."""
        # Gaussian elimination on the constraint matrix.
        echelon: dict[int, tuple[int, int]] = {}  # lead bit -> (row, rhs)
        for r, b in zip(rows, rhs):
            while r:
                lead = r.bit_length() - 1
                if lead not in echelon:
                    echelon[lead] = (r, b)
                    break
                prow, prhs = echelon[lead]
                r ^= prow
                b ^= prhs
            if not r and b:
                raise ValueError("inconsistent parity system")
        d = 0
        for bit in range(width):
            if bit not in echelon and rng.random() < 0.5:
                d |= 1 << bit
        # fix pivot bits from low to high; each row only touches lower bits
        for pbit in sorted(echelon):
            prow, prhs = echelon[pbit]
            if parity(d & (prow & ~(1 << pbit))) != prhs:
                d |= 1 << pbit
        return d

    # -- register plumbing -------------------------------------------------

    def split_register(self, name: str, widths: list[int],
                       new_names: list[str]) -> list[str]:
        i = self._index(name)
        if sum(widths) != self.registers[i][1]:
            raise ValueError("split widths must sum to register width")
        self.registers[i:i + 1] = list(zip(new_names, widths))
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            parts, off = [], 0
            for w in widths:
                parts.append(k[i][off:off + w])
                off += w
            new[k[:i] + tuple(parts) + k[i + 1:]] = v
        self.branches = new
        return new_names

    def merge_registers(self, names: list[str], new_name: str) -> str:
        idxs = [self._index(n) for n in names]
        total = sum(self.registers[i][1] for i in idxs)
        keep = [j for j in range(len(self.registers)) if j not in idxs]
        pos = min(idxs)
        new_regs = []
        for j in range(len(self.registers)):
            if j == pos:
                new_regs.append((new_name, total))
            if j not in idxs:
                new_regs.append(self.registers[j])
        new: dict[tuple[str, ...], complex] = {}
        for k, v in self.branches.items():
            merged = "".join(k[i] for i in idxs)
            out, inserted = [], False
            for j in range(len(self.registers)):
                if j == pos:
                    out.append(merged)
                    inserted = True
                if j not in idxs:
                    out.append(k[j])
            new[tuple(out)] = v
        self.registers = new_regs
        self.branches = new
        return new_name

    def rename_register(self, old: str, new: str) -> None:
        i = self._index(old)
        self.registers[i] = (new, self.registers[i][1])

    def discard_register(self, name: str) -> None:
        """Remove an unentangled register (constant or factorizable)."""
        i = self._index(name)
        ctx_amps: dict[tuple[str, ...], dict[str, complex]] = {}
        for k, v in self.branches.items():
            ctx = k[:i] + k[i + 1:]
            ctx_amps.setdefault(ctx, {})[k[i]] = v
        factor = self._factor_out(ctx_amps)
        self.registers.pop(i)
        self.branches = factor

    def extract_qubit(self, name: str) -> tuple[complex, complex]:
        """Remove an unentangled 1-bit register and return its (alpha, beta)."""
        i = self._index(name)
        if self.registers[i][1] != 1:
            raise ValueError("extract_qubit needs a 1-bit register")
        ctx_amps: dict[tuple[str, ...], dict[str, complex]] = {}
        for k, v in self.branches.items():
            ctx = k[:i] + k[i + 1:]
            ctx_amps.setdefault(ctx, {})[k[i]] = v
        first = next(iter(ctx_amps.values()))
        gnorm = math.sqrt(sum(abs(a) ** 2 for a in first.values()))
        alpha = first.get("0", 0j) / gnorm
        beta = first.get("1", 0j) / gnorm
        factor = self._factor_out(ctx_amps)
        self.registers.pop(i)
        self.branches = factor
        return alpha, beta

    @staticmethod
    def _factor_out(ctx_amps) -> dict[tuple[str, ...], complex]:
        """Verify product structure and return the context-side factor."""
        first = next(iter(ctx_amps.values()))
        support = set(first)
        gnorm = math.sqrt(sum(abs(a) ** 2 for a in first.values()))
        g = {s: a / gnorm for s, a in first.items()}
        s0 = next(iter(support))
        out: dict[tuple[str, ...], complex] = {}
        for ctx, amps in ctx_amps.items():
            if set(amps) != support:
                raise EntangledDiscardError("entangled discard")
            r = amps[s0] / g[s0]
            for s in support:
                if abs(amps[s] - r * g[s]) > 1e-7:
                    raise EntangledDiscardError("entangled discard")
            out[ctx] = r
        return out

    # -- comparison --------------------------------------------------------

    def fidelity(self, other: "SparseState") -> float:
        """|<other|self>|^2, matching registers by name."""
        mine = {n: w for n, w in self.registers}
        theirs = {n: w for n, w in other.registers}
        if mine != theirs:
            raise ValueError("register mismatch between states")
        order = [other._index(n) for n, _ in self.registers]
        inner = 0j
        for k, v in other.branches.items():
            mk = tuple(k[i] for i in order)
            a = self.branches.get(mk)
            if a is not None:
                inner += a * v.conjugate()
        return abs(inner) ** 2

    def dump(self) -> str:
        """Sorted text rendering of branches, for golden-file comparison."""
        lines = ["registers: " + " ".join(f"{n}:{w}" for n, w in self.registers)]
        for k in sorted(self.branches):
            v = self.branches[k]
            lines.append(f"{'|'.join(k)}\t{v.real:+.9f}{v.imag:+.9f}j")
        return "\n".join(lines)


def gadget_state(pairs_with_names) -> SparseState:
    """Build the tensor product of gadgets [(name, x0, x1), ...]."""
    st = SparseState()
    for name, x0, x1 in pairs_with_names:
        st.add_gadget(name, x0, x1)
    return st
