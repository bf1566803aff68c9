"""Command line front end and the crosscheck sweep.

Subcommands: criterion, sets, operator, oracle, crosscheck.  Machine output is
one JSON object per line on stdout; summaries go to stderr.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .criterion import BranchingInstance, decide_direct, decide_fast, instance, report, sets, witness_M
from .errors import BranchcritError, InvalidInstance, InvalidSpec
from .msets import Multiset
from .planegeo import parse_points, render_point

SEED_ENV = "BRANCHCRIT_SEED"


def parse_ints(text: str) -> List[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


def emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# sweep configuration


@dataclass
class SweepConfig:
    n_values: List[int] = field(default_factory=lambda: [2, 3])
    height: int = 6
    primes: List[int] = field(default_factory=lambda: [2, 3, 5])
    mode: str = "exhaustive"
    count: int = 200
    seed: int = 0
    jobs: int = 1

    def validate(self) -> "SweepConfig":
        if not self.n_values or min(self.n_values) < 2:
            raise ValueError("n values must be at least 2")
        if self.height < 0 or not self.primes or self.count < 1 or self.jobs < 1:
            raise ValueError("bounds must be positive")
        if self.mode not in ("exhaustive", "random"):
            raise ValueError("mode is exhaustive or random")
        return self


_CONFIG_KEYS = {
    "n": ("n_values", parse_ints),
    "height": ("height", int),
    "primes": ("primes", parse_ints),
    "mode": ("mode", str),
    "count": ("count", int),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
}


def read_config(path: str) -> Dict[str, object]:
    """Flat key=value lines; '#' starts a comment."""
    out: Dict[str, object] = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError("unknown config key %r" % key)
            name, conv = _CONFIG_KEYS[key]
            out[name] = conv(value.strip())
    return out


def dominant_weights(n: int, height: int) -> Iterable[Tuple[int, ...]]:
    """All weakly decreasing lam with lam_n = 0 and lam_1 <= height."""
    for body in itertools.combinations_with_replacement(range(height, -1, -1), n - 1):
        yield tuple(body) + (0,)


def sweep_instances(cfg: SweepConfig) -> List[BranchingInstance]:
    if cfg.mode == "exhaustive":
        out = []
        for n in cfg.n_values:
            for lam in dominant_weights(n, cfg.height):
                for p in cfg.primes:
                    for d in range(1, p):
                        for i in range(1, n):
                            out.append(instance(lam, p, i, d))
        return out
    rng = random.Random(cfg.seed)
    out = []
    for _ in range(cfg.count):
        n = rng.choice(cfg.n_values)
        lam = sorted((rng.randint(0, cfg.height) for _ in range(n - 1)), reverse=True) + [0]
        p = rng.choice(cfg.primes)
        out.append(instance(lam, p, rng.randint(1, n - 1), rng.randint(1, p - 1)))
    return out


# --------------------------------------------------------------------------
# one crosscheck row


def target_weight(inst: BranchingInstance) -> Tuple[int, ...]:
    mu = list(inst.lam)
    mu[inst.i - 1] -= inst.d
    mu[inst.n - 1] += inst.d
    return tuple(mu)


def crosscheck_instance(inst: BranchingInstance) -> dict:
    from .lowering import lowering_spec, scriptT_mod_p
    from .modoracle import check_mr6, high_weight_dim, vector_status

    t0 = time.perf_counter()
    fast = decide_fast(inst).decision
    direct = decide_direct(inst).decision
    oracle = high_weight_dim(inst.lam, target_weight(inst), inst.p).exists
    row = {
        "lambda": list(inst.lam),
        "p": inst.p,
        "i": inst.i,
        "d": inst.d,
        "fast": fast,
        "direct": direct,
        "oracle": oracle,
        "vector_ok": None,
        "mr6_ok": None,
    }
    problems = []
    if not fast == direct == oracle:
        problems.append("decisions disagree")
    if fast:
        try:
            M, _ = witness_M(inst)
        except BranchcritError as exc:
            problems.append("witness: %s" % exc)
            return _finish(row, problems, t0)
        spec = lowering_spec(inst.i, inst.n, inst.d, M)
        st = vector_status(scriptT_mod_p(spec, inst.p, inst.lam), inst.lam, inst.p)
        row["vector_ok"] = (not st.is_zero_in_L) and st.is_high_weight
        if not row["vector_ok"]:
            problems.append("lowered vector is %s" % ("zero" if st.is_zero_in_L else "not high weight"))
        try:
            row["mr6_ok"] = check_mr6(inst)
        except BranchcritError as exc:
            row["mr6_ok"] = False
            problems.append("raising identity: %s" % exc)
        row["M"] = [render_point(x) for x in M]
    return _finish(row, problems, t0)


def _finish(row: dict, problems: List[str], t0: float) -> dict:
    row["ok"] = not problems
    row["problems"] = problems
    row["seconds"] = round(time.perf_counter() - t0, 4)
    return row


def run_sweep(cfg: SweepConfig) -> List[dict]:
    cfg.validate()
    insts = sweep_instances(cfg)
    if cfg.jobs == 1:
        return [crosscheck_instance(x) for x in insts]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(crosscheck_instance, insts, chunksize=4))


def summarize(rows: Sequence[dict], elapsed: float) -> dict:
    return {
        "instances": len(rows),
        "true": sum(1 for r in rows if r["fast"]),
        "false": sum(1 for r in rows if not r["fast"]),
        "mismatches": sum(1 for r in rows if not r["ok"]),
        "seconds": round(elapsed, 2),
    }


# --------------------------------------------------------------------------
# subcommands


def _inst(args) -> BranchingInstance:
    return instance(parse_ints(args.lam), args.p, args.i, args.d)


def cmd_criterion(args) -> int:
    emit(report(_inst(args), verify=args.verify))
    return 0


def cmd_sets(args) -> int:
    S = sets(_inst(args))
    emit({k: [render_point(x) for x in v] for k, v in asdict(S).items()})
    return 0


def cmd_operator(args) -> int:
    from .lowering import lowering_spec, scriptT, scriptT_mod_p

    M = parse_points(args.set)
    I = Multiset(parse_ints(args.I))
    n = args.n if args.n else (len(parse_ints(args.lam)) if args.lam else None)
    if n is None:
        raise InvalidInstance("operator needs --n or --lambda")
    if args.d >= args.p:
        raise InvalidInstance("requires d < p (got d=%d, p=%d)" % (args.d, args.p))
    spec = lowering_spec(args.i, n, args.d, M, I)
    if args.lam:
        lam = parse_ints(args.lam)
        coeffs = scriptT_mod_p(spec, args.p, lam)
        emit({"terms": [[list(N), c] for N, c in sorted(coeffs.items())]})
    else:
        emit({"terms": scriptT(spec, args.p).to_json()})
    return 0


def cmd_oracle(args) -> int:
    from .modoracle import high_weight_dim

    inst = _inst(args)
    rep = high_weight_dim(inst.lam, target_weight(inst), inst.p)
    emit({"exists": rep.exists, "high_weight_dim": rep.high_weight_dim, "weight_dim": rep.weight_dim})
    return 0


def cmd_crosscheck(args) -> int:
    values: Dict[str, object] = read_config(args.config) if args.config else {}
    for name, flag in (("n_values", args.n), ("primes", args.primes)):
        if flag:
            values[name] = parse_ints(flag)
    for name in ("height", "mode", "count", "seed", "jobs"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    if os.environ.get(SEED_ENV):
        values["seed"] = int(os.environ[SEED_ENV])
    cfg = SweepConfig(**values).validate()
    t0 = time.perf_counter()
    rows = run_sweep(cfg)
    summary = summarize(rows, time.perf_counter() - t0)
    summary["seed"] = cfg.seed
    for r in rows:
        emit(r)
    emit({"summary": summary})
    sys.stderr.write(
        "crosscheck: %(instances)d instances, %(true)d true, %(false)d false, "
        "%(mismatches)d mismatches, %(seconds).2fs\n" % summary
    )
    for r in rows:
        if not r["ok"]:
            sys.stderr.write("MISMATCH %s\n" % json.dumps(r, sort_keys=True))
    return 1 if summary["mismatches"] else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="branchcrit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def inst_flags(p, need_lambda=True):
        p.add_argument("--lambda", dest="lam", required=need_lambda, help="comma separated weight")
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--i", type=int, required=True)
        p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("criterion", help="decide existence and show the witness")
    inst_flags(p)
    p.add_argument("--verify", action="store_true", help="also run the antichain decision")
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("sets", help="the congruence point sets")
    inst_flags(p)
    p.set_defaults(func=cmd_sets)

    p = sub.add_parser("operator", help="coefficients of the lowering operator")
    inst_flags(p, need_lambda=False)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--set", default="", help='points "t:h,..."')
    p.add_argument("--I", default="", help="comma separated multiset")
    p.set_defaults(func=cmd_operator)

    p = sub.add_parser("oracle", help="brute force high weight dimension")
    inst_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("crosscheck", help="sweep and compare all decision paths")
    p.add_argument("--config", default=None, help="key=value file")
    p.add_argument("--n", default=None, help="comma separated n values")
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--primes", default=None)
    p.add_argument("--mode", choices=("exhaustive", "random"), default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_crosscheck)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInstance, InvalidSpec) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
