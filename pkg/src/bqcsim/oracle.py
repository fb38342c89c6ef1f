"""Lazily-sampled random oracle.

The oracle is a keyed PRF: output bits for a query ``(input, out_len)`` are
derived deterministically from ``(seed, input, out_len)`` with BLAKE2b, so
two instances with equal seeds agree on every query without storing a table.
On top of the base function the module provides:

* superposed queries -- branch-wise XOR of ``H(input)`` into a target
  register of a :class:`~bqcsim.state.SparseState` (one counted query per
  call, matching the quantum-query model);
* global tags -- ``H(tag-prefix || x)`` on a reserved domain that no honest
  protocol input can reach (the prefix contains a character outside
  {'0','1'});
* blinded views -- layered re-randomization on a declared input set, fresh
  and independent of the base outputs, pass-through everywhere else;
* per-party query counters for adversary budget accounting.
"""

from __future__ import annotations

import hashlib

from .bits import xor

_TAG_PREFIX = "#"  # reserved: honest inputs are pure {'0','1'} strings


class QueryBudgetExceeded(RuntimeError):
    pass


class RandomOracle:
    """A lazily-sampled random function, reproducible from a 64-bit seed."""

    def __init__(self, seed: int, tag_len: int | None = None):
        self.seed = seed
        self.tag_len = tag_len
        self.counters: dict[str, int] = {}
        self.budgets: dict[str, int] = {}
        # blind layers: (frozenset of inputs, per-layer salt)
        self._layers: list[tuple[frozenset[str], int]] = []

    # -- raw PRF -----------------------------------------------------------

    def _prf(self, inp: str, out_len: int, salt: int) -> str:
        out = []
        need = out_len
        block = 0
        while need > 0:
            h = hashlib.blake2b(
                f"{self.seed}|{salt}|{out_len}|{block}|{inp}".encode(),
                digest_size=32,
            ).digest()
            chunk = "".join(format(b, "08b") for b in h)
            out.append(chunk[:need])
            need -= len(chunk)
            block += 1
        return "".join(out)

    def _lookup(self, inp: str, out_len: int) -> str:
        for inputs, salt in reversed(self._layers):
            if inp in inputs:
                return self._prf(inp, out_len, salt)
        return self._prf(inp, out_len, 0)

    # -- accounting --------------------------------------------------------

    def count(self, party: str, n: int = 1) -> None:
        new = self.counters.get(party, 0) + n
        budget = self.budgets.get(party)
        if budget is not None and new > budget:
            raise QueryBudgetExceeded(
                f"party {party!r} exceeded query budget {budget}"
            )
        self.counters[party] = new

    def set_budget(self, party: str, budget: int) -> None:
        self.budgets[party] = budget

    # -- query modes -------------------------------------------------------

    def query_classical(self, inp: str, out_len: int, party: str = "client") -> str:
        if out_len < 1:
            raise ValueError("out_len must be >= 1")
        self.count(party)
        return self._lookup(inp, out_len)

    def query_superposed(self, state, in_reg: str, out_reg: str,
                         party: str = "server", prefix: str = "") -> None:
        """XOR H(prefix || value of in_reg) into out_reg, branch by branch.

        Amplitudes are untouched; the mapping is an XOR so applying it twice
        restores the state. Counted as one query regardless of branch count.
        """
        out_len = state.width(out_reg)
        self.count(party)
        cache: dict[str, str] = {}

        def update(vin: str, vout: str) -> str:
            h = cache.get(vin)
            if h is None:
                h = cache[vin] = self._lookup(prefix + vin, out_len)
            return xor(vout, h)

        state.map_pair(in_reg, out_reg, update)

    def tag(self, x: str, tag_len: int | None = None, party: str = "client") -> str:
        """Global tag H(tag-prefix || x); default length is twice |x|."""
        if not x:
            raise ValueError("cannot tag the empty string")
        n = tag_len or self.tag_len or 2 * len(x)
        self.count(party)
        return self._lookup(_TAG_PREFIX + x, n)

    # -- blinding ----------------------------------------------------------

    def blind(self, inputs) -> "RandomOracle":
        """A view re-randomized exactly on ``inputs``; the base is unchanged."""
        view = RandomOracle(self.seed, self.tag_len)
        view._layers = self._layers + [(frozenset(inputs), len(self._layers) + 1)]
        view.counters = self.counters  # shared accounting
        view.budgets = self.budgets
        return view
