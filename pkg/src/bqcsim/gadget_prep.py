"""The remote-gadget-preparation pipeline.

Stages, bottom to top:

* ``gdgprep_basic``   -- one helper + one input gadget -> two fresh gadgets,
  via the branching reversible table and a padded Hadamard test.
* ``gdgprep_1p1``     -- basis tests, then the basic step.
* ``gdgprep_1pn``     -- one helper shared across n inputs -> 2n gadgets.
* ``gdgprep_logk``    -- iterated doubling with one helper per round.
* ``gdgprep_repeat``  -- M independent doubling blocks + block permutation.
* ``security_refreshing`` -- consume J fresh gadgets to extend and re-pad
  the keys of N existing gadgets (N + J -> N).
* ``gdgprep_oneround``-- repeat -> refresh -> combine, S sweeps.
* ``gdgprep_full``    -- the complete pipeline: one initial quantum message,
  then T purely classical doubling rounds, each followed by a refresh.

Every stage returns its output gadgets as (KeyPair, register) tuples plus a
transcript and a StageReport whose gadget arithmetic is asserted by tests.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import tables
from .bits import random_bits
from .keychain import KeyPair, extend_keys_refresh, permute_blocks, sample_key_pair
from .protocols import (ProtocolParams, Transcript, basis_test_two, combine,
                        pad_hadamard)

Gadget = tuple[KeyPair, str]  # client-side key pair + server register name


@dataclass
class StageReport:
    stage: str
    gadgets_in: int
    gadgets_out: int
    helpers_consumed: int
    verdict: str
    queries: int = 0

    def line(self) -> str:
        return (f"{self.stage}\t{self.gadgets_in}\t{self.gadgets_out}"
                f"\t{self.helpers_consumed}\t{self.verdict}\t{self.queries}")


@dataclass
class PipelineConfig:
    """Toy-scale pipeline parameters; everything explicit.

    In "paper" mode the asymptotic defaults (eta = kappa^(B4+6),
    N = kappa * threshold, T = ceil(log(L/N)), J = eta) are computed and
    logged, but the run still uses the explicit values: the asymptotic
    numbers are proof-driven and astronomically large.
    """

    kappa: int = 8
    L: int = 8
    N: int = 2
    key_width: int = 4
    kappa_out: int = 8
    pad_base: int = 4
    J: int = 1
    test_rounds: int = 1
    mode: str = "toy"
    b4: int = 1
    threshold: int = 1

    def rounds(self) -> int:
        t = math.log2(self.L / self.N)
        if abs(t - round(t)) > 1e-9 or t < 0:
            raise ValueError("L/N must be a power of two")
        return int(round(t))

    def paper_values(self) -> dict:
        eta = self.kappa ** (self.b4 + 6)
        n = self.kappa * self.threshold
        return {
            "eta": eta,
            "N": n,
            "T": math.ceil(math.log2(max(self.L / max(n, 1), 1))) or 1,
            "J": eta,
            "test_rounds": 15000 * 3 ** (8 * max(1, self.kappa.bit_length())),
        }

    def params_for_round(self, t: int) -> ProtocolParams:
        return ProtocolParams(
            pad_len=self.pad_base * t,
            kappa_out=self.kappa_out,
            test_rounds=self.test_rounds,
            refresh_rounds=self.J,
            kappa=self.kappa,
            mode=self.mode,
        )


def _fail(tr: Transcript, stage: str, reason: str, n_in: int):
    if tr.verdict is None:
        tr.finish(False, f"{stage}: {reason}")
    return [], tr, [StageReport(stage, n_in, 0, 0, "fail")]


# -- basic step ------------------------------------------------------------


def gdgprep_basic(oracle, helper: Gadget, k3: Gadget,
                  params: ProtocolParams, server, rng,
                  skip_verdict: bool = False):
    """Helper + input gadget -> two output gadgets (2 -> 2)."""
    tr = Transcript()
    h_pair, h_reg = helper
    k3_pair, k3_reg = k3
    kout = params.kappa_out
    k2 = sample_key_pair(rng, k3_pair.width)
    y2 = sample_key_pair(rng, kout)
    y3 = sample_key_pair(rng, kout)
    perm = list(range(2 * kout))
    rng.shuffle(perm)
    table = tables.robust_rlt_build(oracle, h_pair, k2, k3_pair, y2, y3,
                                    perm, params.pad_len, rng)
    tr.send("client", "gp.robust_fwd", tables.serialize_table(table.forward))
    tr.send("client", "gp.robust_bwd", tables.serialize_table(table.backward))
    tr.send("client", "gp.k2", k2.x0 + "," + k2.x1)

    out_reg = f"{k3_reg}_out"
    server.eval_robust(h_reg, k2, k3_reg, table, out_reg)

    ph = pad_hadamard(oracle, h_pair, h_reg, params, server, rng)
    tr.messages.extend(ph.messages)
    if not ph.passed and not skip_verdict:
        tr.finish(False, f"pad hadamard: {ph.fail_reason}")
        return [], tr, [StageReport("basic", 2, 0, 1, "fail")]

    tr.send("client", "gp.perm", ",".join(map(str, perm)))
    r2, r3 = f"{out_reg}a", f"{out_reg}b"
    server.depermute_split(out_reg, perm, kout, (r2, r3))
    tr.finish(True)
    report = StageReport("basic", 2, 2, 1, "pass")
    return [(y2, r2), (y3, r3)], tr, [report]


def gdgprep_1p1(oracle, helper: Gadget, k3: Gadget,
                params: ProtocolParams, server, rng):
    """Basis tests first, then the basic step (2 -> 2)."""
    tr = basis_test_two(oracle, helper[0], helper[1], k3[0], k3[1],
                        params.test_rounds, params, server, rng)
    if not tr.passed:
        return _fail(tr, "1p1", f"basis test: {tr.fail_reason}", 2)
    out, tr2, reps = gdgprep_basic(oracle, helper, k3, params, server, rng)
    tr2.messages[:0] = tr.messages
    reps.insert(0, StageReport("1p1", 2, len(out), 1, tr2.verdict))
    return out, tr2, reps


def gdgprep_1pn(oracle, helper: Gadget, k3_list: list[Gadget],
                params: ProtocolParams, server, rng):
    """One shared helper turns n gadgets into 2n."""
    tr = Transcript()
    h_pair, h_reg = helper
    n = len(k3_list)
    kout = params.kappa_out

    for pair, reg in k3_list:
        bt = basis_test_two(oracle, h_pair, h_reg, pair, reg,
                            params.test_rounds, params, server, rng)
        tr.messages.extend(bt.messages)
        if not bt.passed:
            return _fail(tr, "1pn", f"basis test: {bt.fail_reason}", n + 1)

    plan = []
    for i, (k3_pair, k3_reg) in enumerate(k3_list):
        k2 = sample_key_pair(rng, k3_pair.width)
        y2 = sample_key_pair(rng, kout)
        y3 = sample_key_pair(rng, kout)
        perm = list(range(2 * kout))
        rng.shuffle(perm)
        table = tables.robust_rlt_build(oracle, h_pair, k2, k3_pair, y2, y3,
                                        perm, params.pad_len, rng)
        tr.send("client", f"gp.robust[{i}]",
                tables.serialize_table(table.forward))
        tr.send("client", f"gp.k2[{i}]", k2.x0 + "," + k2.x1)
        out_reg = f"{k3_reg}_out"
        server.eval_robust(h_reg, k2, k3_reg, table, out_reg)
        plan.append((y2, y3, perm, out_reg))

    ph = pad_hadamard(oracle, h_pair, h_reg, params, server, rng)
    tr.messages.extend(ph.messages)
    if not ph.passed:
        return _fail(tr, "1pn", f"pad hadamard: {ph.fail_reason}", n + 1)

    out: list[Gadget] = []
    for i, (y2, y3, perm, out_reg) in enumerate(plan):
        tr.send("client", f"gp.perm[{i}]", ",".join(map(str, perm)))
        r2, r3 = f"{out_reg}a", f"{out_reg}b"
        server.depermute_split(out_reg, perm, kout, (r2, r3))
        out.extend([(y2, r2), (y3, r3)])
    tr.finish(True)
    return out, tr, [StageReport("1pn", n + 1, 2 * n, 1, "pass")]


def gdgprep_logk(oracle, helpers: list[Gadget], seed: Gadget,
                 params: ProtocolParams, server, rng):
    """R doubling rounds: R + 1 gadgets -> 2^R."""
    tr = Transcript()
    cur = [seed]
    reports = []
    for t, helper in enumerate(helpers):
        out, sub, reps = gdgprep_1pn(oracle, helper, cur, params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        cur = out
    tr.finish(True)
    reports.append(StageReport("logk", len(helpers) + 1, len(cur),
                               len(helpers), "pass"))
    return cur, tr, reports


def gdgprep_repeat(oracle, blocks: list[tuple[list[Gadget], Gadget]],
                   params: ProtocolParams, server, rng):
    """M independent doubling blocks, then a random block permutation."""
    tr = Transcript()
    reports = []
    results = []
    n_in = sum(len(h) + 1 for h, _ in blocks)
    for helpers, seed in blocks:
        out, sub, reps = gdgprep_logk(oracle, helpers, seed, params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        results.append(out)
    perm = list(range(len(blocks)))
    rng.shuffle(perm)
    tr.send("client", "gp.block_perm", ",".join(map(str, perm)))
    flat = [g for block in permute_blocks(results, perm) for g in block]
    tr.finish(True)
    helpers_used = sum(len(h) for h, _ in blocks)
    reports.append(StageReport("repeat", n_in, len(flat), helpers_used, "pass"))
    return flat, tr, reports


# -- security refreshing ---------------------------------------------------


def security_refreshing(oracle, gadgets: list[Gadget], lams: list[Gadget],
                        params: ProtocolParams, server, rng):
    """Consume J fresh gadgets to extend and re-pad N existing ones."""
    tr = Transcript()
    n, j_rounds = len(gadgets), len(lams)
    kout = params.kappa_out
    new_keys: list[list[KeyPair]] = [[] for _ in gadgets]
    # keys as held in the registers, growing with each extension round
    cur = [pair for pair, _ in gadgets]

    for j, (lam_pair, lam_reg) in enumerate(lams):
        for i, (pair, reg) in enumerate(gadgets):
            y = sample_key_pair(rng, kout)
            mapping = [
                ((cur[i][b], lam_pair[b2]), y[b])
                for b in (0, 1) for b2 in (0, 1)
            ]
            table = tables.lt_build(oracle, mapping, params.pad_len, kout, rng)
            tr.send("client", f"sr.table[{j}][{i}]",
                    tables.serialize_table(table))
            server.extend_gadget(reg, lam_reg, table)
            new_keys[i].append(y)
            cur[i] = KeyPair(cur[i].x0 + y.x0, cur[i].x1 + y.x1)
        ph = pad_hadamard(oracle, lam_pair, lam_reg, params, server, rng)
        tr.messages.extend(ph.messages)
        if not ph.passed:
            return _fail(tr, "refresh", f"pad hadamard: {ph.fail_reason}",
                         n + j_rounds)

    out: list[Gadget] = []
    for i, (pair, reg) in enumerate(gadgets):
        pad = random_bits(rng, params.pad_len)
        tr.send("client", f"sr.pad[{i}]", pad)
        server.prepend_pad(reg, pad)
        out.append((extend_keys_refresh(pair, new_keys[i], pad), reg))
    tr.finish(True)
    return out, tr, [StageReport("refresh", n + j_rounds, n, j_rounds, "pass")]


# -- one-round and full pipeline -------------------------------------------


def gdgprep_oneround(oracle, sweeps, lam_sweeps, params: ProtocolParams,
                     server, rng):
    """S sweeps of repeat -> refresh -> combine-with-running-output.

    ``sweeps[t]`` is the block structure for one repeat stage;
    ``lam_sweeps[t]`` the refresh gadgets for that sweep. The first sweep's
    output is kept as-is; later sweeps are combined pairwise by position.
    """
    tr = Transcript()
    reports = []
    n_in = (sum(sum(len(h) + 1 for h, _ in blocks) for blocks in sweeps)
            + sum(len(l) for l in lam_sweeps))
    running: list[Gadget] = []
    for t, (blocks, lams) in enumerate(zip(sweeps, lam_sweeps)):
        expanded, sub, reps = gdgprep_repeat(oracle, blocks, params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        refreshed, sub, reps = security_refreshing(oracle, expanded, lams,
                                                   params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        if t == 0:
            running = refreshed
        else:
            if len(refreshed) != len(running):
                tr.finish(False, "sweep output count mismatch")
                return [], tr, reports
            combined = []
            for m, (ga, gb) in enumerate(zip(refreshed, running)):
                pair, ctr, reg = combine(oracle, ga[0], gb[0], ga[1], gb[1],
                                         params, server, rng, improved=True)
                tr.messages.extend(ctr.messages)
                if pair is None:
                    tr.finish(False, "combine failed")
                    return [], tr, reports
                combined.append((pair, reg))
            running = combined
    tr.finish(True)
    helpers_used = (sum(sum(len(h) for h, _ in blocks) for blocks in sweeps)
                    + sum(len(l) for l in lam_sweeps))
    reports.append(StageReport("oneround", n_in, len(running),
                               helpers_used, "pass"))
    return running, tr, reports


def gdgprep_full(oracle, config: PipelineConfig, server, rng):
    """The complete pipeline: one quantum message, then classical rounds.

    Round t doubles the gadget count by giving every current gadget a fresh
    helper (client-supplied, like the refresh gadgets) and running the
    expansion block, followed by two refresh layers. After T = log2(L/N)
    rounds the server holds Gadget(K_out) with |K_out| = L.
    """
    tr = Transcript()
    reports: list[StageReport] = []
    t_rounds = config.rounds()
    if config.mode == "paper":
        tr.send("client", "gp.paper_values", str(config.paper_values()))

    # sample every key pair up front; the initial message carries them all
    seeds = [sample_key_pair(rng, config.key_width) for _ in range(config.N)]
    helpers = []
    lam1 = []
    lam2 = []
    count = config.N
    for t in range(t_rounds):
        helpers.append([sample_key_pair(rng, config.key_width)
                        for _ in range(count)])
        lam1.append([sample_key_pair(rng, config.key_width)
                     for _ in range(config.J)])
        lam2.append([sample_key_pair(rng, config.key_width)
                     for _ in range(config.J)])
        count *= 2

    server_q0 = oracle.counters.get("server", 0)
    cur: list[Gadget] = []
    live_helpers: list[list[Gadget]] = []
    live_lam1: list[list[Gadget]] = []
    live_lam2: list[list[Gadget]] = []
    # the single quantum message: the server receives all initial gadgets
    for i, p in enumerate(seeds):
        cur.append((p, server.prepare_gadget(f"k{i}", p)))
    for t in range(t_rounds):
        live_helpers.append([(p, server.prepare_gadget(f"h{t}_{i}", p))
                             for i, p in enumerate(helpers[t])])
        live_lam1.append([(p, server.prepare_gadget(f"l1_{t}_{j}", p))
                          for j, p in enumerate(lam1[t])])
        live_lam2.append([(p, server.prepare_gadget(f"l2_{t}_{j}", p))
                          for j, p in enumerate(lam2[t])])
    tr.send("client", "gp.init", f"N={config.N} T={t_rounds} J={config.J}")

    for t in range(t_rounds):
        params = config.params_for_round(t + 1)
        blocks = [([live_helpers[t][m]], cur[m]) for m in range(len(cur))]
        out, sub, reps = gdgprep_oneround(
            oracle, [blocks], [live_lam1[t]], params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        out, sub, reps = security_refreshing(
            oracle, out, live_lam2[t], params, server, rng)
        tr.messages.extend(sub.messages)
        reports.extend(reps)
        if not sub.passed:
            tr.finish(False, sub.fail_reason)
            return [], tr, reports
        cur = out

    tr.finish(True)
    queries = oracle.counters.get("server", 0) - server_q0
    helpers_total = sum(len(h) for h in helpers) + 2 * t_rounds * config.J
    reports.append(StageReport("full", config.N, len(cur), helpers_total,
                               "pass", queries))
    return cur, tr, reports


def expected_helper_count(config: PipelineConfig) -> int:
    """Closed-form count of client-supplied auxiliary gadgets."""
    t_rounds = config.rounds()
    doubling_helpers = config.N * (2 ** t_rounds - 1)
    return doubling_helpers + 2 * t_rounds * config.J
