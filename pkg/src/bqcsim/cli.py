"""Command-line front end.

Three subcommands:

* ``run <protocol>``   -- honest execution, transcript + stage report files
* ``attack <name>``    -- adversary experiments, stats records
* ``ubqc <circuit>``   -- end-to-end delegated computation, histogram

Configuration is flat ``key=value`` text (``--config``), and every key can
also be set directly with ``--set key=value``. Exit codes: 0 protocol pass,
1 protocol fail, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import gadget_prep as gp
from . import qfactory as qf
from .adversary import (HonestServer, MeasureThenRandomD,
                        RandomGuessBasisTest, estimate, free_lunch_rate)
from .keychain import sample_key_pair
from .oracle import RandomOracle
from .protocols import (ProtocolParams, Transcript, basis_test_multi,
                        combine, pad_hadamard)

DEFAULTS = {
    # protocol parameters
    "pad_len": 8, "kappa_out": 16, "test_rounds": 2, "kappa": 8,
    "key_width": 6,
    # pipeline shape
    "L": 8, "N": 2, "pad_base": 4, "J": 1,
    # experiment sizes
    "shots": 1000, "guesses": 64,
}
INT_KEYS = set(DEFAULTS)


class ConfigError(Exception):
    pass


def parse_config(text: str, base: dict) -> dict:
    cfg = dict(base)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in INT_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            cfg[key] = int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} needs an integer")
    return cfg


def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"no such config file: {path}")
        cfg = parse_config(path.read_text(), cfg)
    for item in args.set or []:
        cfg = parse_config(item, cfg)
    if args.trials is not None:
        cfg["trials"] = args.trials
    return cfg


def make_params(cfg: dict, mode: str) -> ProtocolParams:
    return ProtocolParams(
        pad_len=cfg["pad_len"], kappa_out=cfg["kappa_out"],
        test_rounds=cfg["test_rounds"], refresh_rounds=cfg["J"],
        kappa=cfg["kappa"], mode=mode,
    )


def make_pipeline(cfg: dict, mode: str) -> gp.PipelineConfig:
    return gp.PipelineConfig(
        kappa=cfg["kappa"], L=cfg["L"], N=cfg["N"],
        key_width=cfg["key_width"], kappa_out=cfg["kappa_out"],
        pad_base=cfg["pad_base"], J=cfg["J"],
        test_rounds=cfg["test_rounds"], mode=mode,
    )


def write_out(args, name: str, content: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(content)
    else:
        sys.stdout.write(content)


# -- run -------------------------------------------------------------------


def _gadgets(server, rng, count, width, prefix="g"):
    out = []
    for i in range(count):
        p = sample_key_pair(rng, width)
        out.append((p, server.prepare_gadget(f"{prefix}{i}", p)))
    return out


def _run_protocol(name: str, cfg: dict, mode: str, seed: int):
    """Returns (Transcript, stage reports)."""
    oracle = RandomOracle(seed)
    server = HonestServer(oracle, seed=seed + 1)
    rng = random.Random(seed ^ 0xC0FFEE)
    params = make_params(cfg, mode)
    w = cfg["key_width"]

    if name == "pad-hadamard":
        (p, r), = _gadgets(server, rng, 1, w)
        return pad_hadamard(oracle, p, r, params, server, rng), []
    if name == "basis-test":
        (p, r), = _gadgets(server, rng, 1, w)
        return basis_test_multi(oracle, p, r, params.test_rounds, params,
                                server, rng), []
    if name == "combine":
        (pa, ra), (pb, rb) = _gadgets(server, rng, 2, w)
        _, tr, _ = combine(oracle, pa, pb, ra, rb, params, server, rng)
        return tr, []
    if name == "gdgprep-basic":
        h, g = _gadgets(server, rng, 2, w)
        _, tr, reps = gp.gdgprep_basic(oracle, h, g, params, server, rng)
        return tr, reps
    if name == "gdgprep-1p1":
        h, g = _gadgets(server, rng, 2, w)
        _, tr, reps = gp.gdgprep_1p1(oracle, h, g, params, server, rng)
        return tr, reps
    if name == "gdgprep-1pn":
        h, *gs = _gadgets(server, rng, 4, w)
        _, tr, reps = gp.gdgprep_1pn(oracle, h, gs, params, server, rng)
        return tr, reps
    if name == "gdgprep-logk":
        h1, h2, seed_g = _gadgets(server, rng, 3, w)
        _, tr, reps = gp.gdgprep_logk(oracle, [h1, h2], seed_g, params,
                                      server, rng)
        return tr, reps
    if name == "gdgprep-repeat":
        blocks = []
        for m in range(2):
            h, s = _gadgets(server, rng, 2, w, prefix=f"b{m}g")
            blocks.append(([h], s))
        _, tr, reps = gp.gdgprep_repeat(oracle, blocks, params, server, rng)
        return tr, reps
    if name == "refresh":
        gs = _gadgets(server, rng, cfg["N"], w)
        lams = _gadgets(server, rng, cfg["J"], w, prefix="lam")
        _, tr, reps = gp.security_refreshing(oracle, gs, lams, params,
                                             server, rng)
        return tr, reps
    if name == "gdgprep-full":
        pipeline = make_pipeline(cfg, mode)
        _, tr, reps = gp.gdgprep_full(oracle, pipeline, server, rng)
        return tr, reps
    if name == "qfac8":
        (p, r), = _gadgets(server, rng, 1, w)
        qb, _, tr = qf.qfac8(oracle, (p, r), params, server, rng)
        if qb is not None:
            tr.messages.append(("client", "qf.theta_index",
                                str(qb.angle.index)))
        return tr, []
    raise ConfigError(f"unknown protocol: {name}")


RUN_PROTOCOLS = ("pad-hadamard", "basis-test", "combine", "gdgprep-basic",
                 "gdgprep-1p1", "gdgprep-1pn", "gdgprep-logk",
                 "gdgprep-repeat", "refresh", "gdgprep-full", "qfac8")


def cmd_run(args) -> int:
    cfg = load_config(args)
    tr, reports = _run_protocol(args.protocol, cfg, args.mode, args.seed)
    write_out(args, f"{args.protocol}.log", tr.serialize())
    if reports:
        lines = ["stage\tin\tout\thelpers\tverdict\tqueries"]
        lines += [r.line() for r in reports]
        write_out(args, f"{args.protocol}.stages.tsv", "\n".join(lines) + "\n")
    return 0 if tr.passed else 1


# -- attack ----------------------------------------------------------------


ATTACKS = ("free-lunch-unpermuted", "free-lunch-permuted",
           "hadamard-cheat", "basis-cheat")


def cmd_attack(args) -> int:
    cfg = load_config(args)
    trials = cfg.get("trials", 200)
    params = make_params(cfg, args.mode)
    name = args.attack
    if name == "free-lunch-unpermuted":
        st = free_lunch_rate("unpermuted", params, trials, seed0=args.seed,
                             guesses=cfg["guesses"])
    elif name == "free-lunch-permuted":
        st = free_lunch_rate("permuted", params, trials, seed0=args.seed,
                             guesses=cfg["guesses"])
    elif name == "hadamard-cheat":
        st = estimate(lambda v, s: v == "pass", MeasureThenRandomD,
                      "pad_hadamard", params, trials, seed0=args.seed,
                      experiment=name)
    elif name == "basis-cheat":
        st = estimate(lambda v, s: v == "pass", RandomGuessBasisTest,
                      "basis_test", params, trials, seed0=args.seed,
                      experiment=name)
    else:
        raise ConfigError(f"unknown attack: {name}")
    header = "experiment\ttrials\tsuccesses\tp_hat\twilson95\n"
    write_out(args, f"{name}.tsv", header + st.line() + "\n")
    return 0


# -- ubqc ------------------------------------------------------------------


def parse_circuit(path: Path) -> list[int]:
    octants = []
    for tok in path.read_text().replace(",", " ").split():
        try:
            k = int(tok)
        except ValueError:
            raise ConfigError(f"bad circuit token: {tok!r}")
        octants.append(k % 8)
    if not octants:
        raise ConfigError("empty circuit file")
    return octants


def cmd_ubqc(args) -> int:
    cfg = load_config(args)
    path = Path(args.circuit)
    if not path.is_file():
        raise ConfigError(f"no such circuit file: {path}")
    circuit = parse_circuit(path)

    pipeline = make_pipeline(cfg, args.mode)
    if pipeline.L < len(circuit) + 1:
        raise ConfigError(
            f"pipeline L={pipeline.L} too small for {len(circuit)} gates")
    oracle = RandomOracle(args.seed)
    server = HonestServer(oracle, seed=args.seed + 1)
    rng = random.Random(args.seed ^ 0xC0FFEE)
    shots = cfg["shots"]
    ones, deltas, tr = qf.succ_ubqc(oracle, pipeline, circuit, server, rng,
                                    shots=shots)
    write_out(args, "ubqc.log", tr.serialize())
    if ones is None:
        return 1
    dense = qf.dense_output_prob(circuit)
    hist = ["outcome\tcount\tfraction",
            f"0\t{shots - ones}\t{(shots - ones) / shots:.6f}",
            f"1\t{ones}\t{ones / shots:.6f}",
            f"# dense p(1) = {dense:.6f}"]
    write_out(args, "ubqc.hist.tsv", "\n".join(hist) + "\n")
    return 0


# -- entry -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bqcsim",
        description="Desk-scale blind-quantum-computation protocol simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--trials", type=int)
        p.add_argument("--mode", choices=("toy", "paper"), default="toy")
        p.add_argument("--out", help="output directory (default: stdout)")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config value")

    p = sub.add_parser("run", help="run a protocol honestly")
    p.add_argument("protocol", choices=RUN_PROTOCOLS)
    common(p)

    p = sub.add_parser("attack", help="run an adversary experiment")
    p.add_argument("attack", choices=ATTACKS)
    common(p)

    p = sub.add_parser("ubqc", help="delegate a circuit end to end")
    p.add_argument("circuit", help="file of measurement octants (0-7)")
    common(p)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "attack":
            return cmd_attack(args)
        return cmd_ubqc(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
