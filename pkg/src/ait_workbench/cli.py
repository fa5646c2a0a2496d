"""Command-line front end: ``aitwb <command> ...``.

Options can also come from a ``key=value`` config file (``--config``);
flags given on the command line win.  Every file written starts with a
provenance header and contains nothing run-dependent, so repeating a
command with the same configuration reproduces it byte for byte.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import functions, ktrivial, monitors, nogap, solovay, sources
from .encodings import lex_string, show, triple_code
from .enumerator import (
    DEFAULT_WORK_CAP,
    counting_matrix,
    dumps,
    enumerate_to,
    advance,
    loads,
    plain_prefix_overhead,
    table_csv,
)
from .errors import FingerprintMismatch, ResourceLimit, WorkbenchError
from .kraft_chaitin import Allocator, compile_function
from .machine import DEFAULT_PROFILE, MachineProfile
from .programs import twice_length_plus_two_bytecode

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FINGERPRINT = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64

PROFILE_ENV = "AITWB_PROFILE"

EPILOG = f"""\
exit codes:
  {EXIT_OK}   success
  {EXIT_ERROR}   error raised by a workbench operation (InsufficientBudget, OracleDisagreement, ...)
  {EXIT_FINGERPRINT}   ledger or profile fingerprint mismatch
  {EXIT_RESOURCE}   resource limit exceeded (enumeration work cap, certificate size)
  {EXIT_USAGE}  command-line usage error

environment:
  {PROFILE_ENV}   machine profile file used when --profile is not given
"""

# defaults applied after the config file, so "flag > config > default"
DEFAULTS = {
    "out": ".",
    "work_cap": DEFAULT_WORK_CAP,
    "f": "solovay",
    "g": "solovay",
    "src": "zeros",
    "n": 64,
    "M": 1000,
    "c": 0,
    "d": 4,
    "nmax": 8,
    "K": 12,
    "h": "identity",
    "phi": "immediate",
    "alpha": "zeros",
    "pad": "max",
    "lengths": "1,2,3,3",
    "ns": "4,8,16,32,64",
    "k": 16,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="aitwb", description=__doc__, epilog=EPILOG, formatter_class=fmt)
    parser.add_argument("--config", help="key=value file; command-line flags override it")
    parser.add_argument("--profile", help=f"machine profile file (default: ${PROFILE_ENV} or built-in)")
    parser.add_argument("--out", help="output directory (default: .)")
    parser.add_argument("--work-cap", dest="work_cap", type=int, help="enumeration work-unit cap")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stage_opts(p, required=False):
        p.add_argument("--stage", type=int, required=required, help="enumeration stage")
        p.add_argument("--ledger", help="event ledger to restore (and write, for enumerate)")

    p = sub.add_parser("enumerate", help="advance the enumeration, write ledger and tables",
                       epilog=EPILOG, formatter_class=fmt)
    stage_opts(p, required=True)
    p.add_argument("--resume", action="store_true", help="continue from --ledger if it exists")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int,
                   help="snapshot the ledger every this many stages")

    p = sub.add_parser("solovay", help="Solovay function experiments", epilog=EPILOG, formatter_class=fmt)
    ssub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = ssub.add_parser("gap", help="gap table f - K_s")
    stage_opts(q)
    q.add_argument("--f", help="function rule (default solovay)")
    q.add_argument("--M", type=int, help="table range 0..M")
    q.add_argument("--witnesses", action="store_true", help="also report gaps at triple-code witnesses")
    q = ssub.add_parser("sum", help="exact partial sums of 2^-f")
    q.add_argument("--f", help="function rule (default solovay)")
    q.add_argument("--n", type=int, help="last index")
    q = ssub.add_parser("alpha", help="certified binary digits of sum 2^-f")
    q.add_argument("--f", help="function rule with a tail certificate")
    q.add_argument("--k", type=int, help="number of digits")

    p = sub.add_parser("kc", help="Kraft-Chaitin allocation", epilog=EPILOG, formatter_class=fmt)
    ksub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = ksub.add_parser("alloc", help="allocate codewords for a list of lengths")
    q.add_argument("--lengths", help="comma-separated lengths")
    q = ksub.add_parser("compile", help="compile an upper-bound function into a decoder tree")
    q.add_argument("--f", help="function rule")
    q.add_argument("--c", type=int, help="weight exponent c")
    q.add_argument("--N", type=int, required=True, help="last index")
    q.add_argument("--save-profile", dest="save_profile", help="write the extended profile here")

    p = sub.add_parser("berry", help="Berry search programs and ratio table", epilog=EPILOG, formatter_class=fmt)
    stage_opts(p)
    p.add_argument("--ns", help="comma-separated thresholds")

    p = sub.add_parser("monitor", help="initial-segment deficiency monitors", epilog=EPILOG, formatter_class=fmt)
    p.add_argument("criterion", choices=("levin-schnorr", "miller-yu", "bm", "chaitin", "solovayness"))
    stage_opts(p)
    p.add_argument("--src", help="sequence source spec")
    p.add_argument("--n", type=int, help="prefix lengths 1..n (or range 0..n for solovayness)")
    p.add_argument("--f", help="function rule for bm")
    p.add_argument("--g", help="function rule for miller-yu and solovayness")

    p = sub.add_parser("nogap", help="zero insertion and selection", epilog=EPILOG, formatter_class=fmt)
    nsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("build", "select", "report"):
        q = nsub.add_parser(name)
        q.add_argument("--h", help="h rule: " + ", ".join(nogap.H_RULES) + ", constN")
        q.add_argument("--phi", help="oracle machine: " + ", ".join(nogap.PHI_NAMES))
        q.add_argument("--alpha", help="base sequence source spec")
        q.add_argument("--K", type=int, help="number of insertions")
        q.add_argument("--pad", choices=(nogap.PAD_MAX, nogap.PAD_STRICT), help="step padding mode")
        if name == "select":
            q.add_argument("--xi", choices=("beta", "alpha"), help="sequence to scan (default beta)")
            q.add_argument("--N", type=int, help="scan length (default: just past the last insertion)")
        if name == "report":
            stage_opts(q)
            q.add_argument("--n", type=int, help="prefix lengths for the complexity profile")
            q.add_argument("--settling", action="store_true", help="settling-time schedule of Omega_s")

    p = sub.add_parser("ktriv", help="request-set strategy", epilog=EPILOG, formatter_class=fmt)
    tsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = tsub.add_parser("run")
    stage_opts(q)
    q.add_argument("--synthetic", type=int, help="use a synthetic stream with this seed")
    q.add_argument("--alpha", help="sequence source spec")
    q.add_argument("--nmax", type=int)
    q.add_argument("--c", type=int)
    q.add_argument("--d", type=int)
    q = tsub.add_parser("compile")
    q.add_argument("--ledger", required=True, help="request ledger file")
    q.add_argument("--d", type=int, help="cap used for the run (sets the headroom)")
    q.add_argument("--e", type=int, help="headroom exponent (default ceil(log2(2d)))")
    return parser


def read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _actions(parser: argparse.ArgumentParser, argv_ns) -> dict[str, argparse.Action]:
    """Option actions of the (sub)parsers selected by the parsed command."""
    found = {}
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if isinstance(action, argparse._SubParsersAction):
                for choice, subp in action.choices.items():
                    if getattr(argv_ns, action.dest, None) == choice:
                        stack.append(subp)
            elif action.option_strings:
                found[action.dest] = action
    return found


def resolve(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = read_config(args.config) if args.config else {}
    actions = _actions(parser, args)
    for key, value in config.items():
        action = actions.get(key)
        if action is None:
            continue  # keys for other commands are allowed in shared config files
        if getattr(args, key, None) in (None, False):
            if isinstance(action, argparse._StoreTrueAction):
                setattr(args, key, value.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, action.type(value) if action.type else value)
    for key, value in DEFAULTS.items():
        if key in actions and getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


class Context:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        path = args.profile or os.environ.get(PROFILE_ENV)
        self.profile = MachineProfile.load(path) if path else DEFAULT_PROFILE
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self._state = None

    @property
    def command(self) -> str:
        parts = [self.args.command]
        for attr in ("action", "criterion"):
            if getattr(self.args, attr, None):
                parts.append(getattr(self.args, attr))
        return " ".join(parts)

    def config_echo(self) -> str:
        skip = {"command", "action", "criterion", "config", "out"}
        items = sorted((k, v) for k, v in vars(self.args).items() if k not in skip and v not in (None, False))
        return " ".join(f"{k}={v}" for k, v in items)

    def header(self, stage=None) -> str:
        return (f"# aitwb {self.command} profile={self.profile.fingerprint} "
                f"stage={'' if stage is None else stage}\n# config {self.config_echo()}\n")

    def write(self, name: str, body: str, stage=None) -> Path:
        path = self.out / name
        path.write_text(self.header(stage) + body, encoding="utf-8")
        return path

    def state(self, stage: Optional[int]):
        if self._state is not None:
            return self._state
        ledger = getattr(self.args, "ledger", None)
        if ledger and Path(ledger).exists():
            st = loads(Path(ledger).read_text(encoding="ascii"), self.profile)
            if stage is not None and stage > st.watermark:
                st = advance(st, stage, self.args.work_cap)
        else:
            if stage is None:
                raise UsageError("--stage or an existing --ledger is required")
            st = enumerate_to(self.profile, stage, self.args.work_cap)
        self._state = st
        return st


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="ascii")
    os.replace(tmp, path)


# -- commands ----------------------------------------------------------------

def cmd_enumerate(ctx: Context) -> None:
    args = ctx.args
    ledger = Path(args.ledger) if args.ledger else ctx.out / "ledger.txt"
    if args.resume and ledger.exists():
        st = loads(ledger.read_text(encoding="ascii"), ctx.profile)
    else:
        st = enumerate_to(ctx.profile, 0)
    step = args.checkpoint_every or 0
    target = max(args.stage, st.watermark)
    while st.watermark < target:
        nxt = min(target, st.watermark + step) if step else target
        st = advance(st, nxt, args.work_cap)
        _write_atomic(ledger, dumps(st))
    _write_atomic(ledger, dumps(st))
    s = st.watermark
    ctx.write(f"tables_s{s}.csv", table_csv(st), s)
    rows = counting_matrix(st, 10, 4)
    body = "n,c,count,implied_constant\n" + "".join(f"{n},{c},{cnt},{ch}\n" for n, c, cnt, ch in rows)
    ctx.write(f"counting_s{s}.csv", body, s)
    recorded = ctx.profile.note("counting_constant")
    worst = max(r[3] for r in rows)
    prefix = sum(1 for e in st.events.values() if e.mode == "prefix")
    omega = st.omega()
    print(f"stage={s} prefix_events={prefix} plain_events={len(st.events) - prefix} "
          f"omega={omega.numerator}/{omega.denominator} K_entries={len(st.K)} "
          f"plain_prefix_overhead={plain_prefix_overhead(st)} max_implied_constant={worst} "
          f"recorded={recorded}")
    print(f"ledger={ledger}")


def cmd_solovay(ctx: Context) -> None:
    args = ctx.args
    if args.action == "gap":
        f = functions.by_name(args.f, ctx.profile)
        st = ctx.state(args.stage)
        rep = solovay.gap_table(f, st, args.M)
        ctx.write(f"gap_{args.f}_s{st.watermark}.csv", rep.csv(), st.watermark)
        print(f"running_min={rep.running_min} undiscovered={rep.undiscovered}")
        if args.witnesses:
            finals = [e for e in st.prefix_events()]
            ms = [triple_code(e.x, e.p, e.t) for e in finals]
            wrep = solovay.gap_points(f, st, ms)
            ctx.write(f"gap_witnesses_{args.f}_s{st.watermark}.csv", wrep.csv(), st.watermark)
            print(f"witnesses={len(ms)} witness_running_min={wrep.running_min} "
                  f"undiscovered={wrep.undiscovered}")
    elif args.action == "sum":
        f = functions.by_name(args.f, ctx.profile)
        marks = [10 ** j for j in range(len(str(args.n))) if 10 ** j <= args.n] + [args.n]
        rows = solovay.partial_sums(f, sorted(set(marks)))
        body = "M,numerator,denominator,approx,below_8\n" + "".join(
            f"{M},{q.numerator},{q.denominator},{float(q)!r},{int(q < 8)}\n" for M, q in rows)
        ctx.write(f"sum_{args.f}_{args.n}.csv", body)
        last = rows[-1][1]
        print(f"sum_{{m<={args.n}}} 2^-{args.f}(m) = {float(last)!r} < 8: {str(last < 8).lower()}")
    else:
        f = functions.by_name(args.f, ctx.profile)
        bits = solovay.certified_bits(f, args.k)
        ctx.write(f"alpha_{args.f}_{args.k}.txt", bits + "\n")
        print(bits)


def cmd_kc(ctx: Context) -> None:
    args = ctx.args
    if args.action == "alloc":
        alloc = Allocator()
        lines = ["i,k,codeword"]
        for i, k in enumerate(_csv_ints(args.lengths)):
            lines.append(f"{i},{k},{show(alloc.request(k, i))}")
        ctx.write("kc_alloc.csv", "\n".join(lines) + "\n")
        print("\n".join(lines[1:]))
    else:
        f = functions.by_name(args.f, ctx.profile)
        cc = compile_function(f, args.c, args.N, ctx.profile)
        lines = [f"# tree r={cc.r} overhead={cc.overhead}", f"# tree {cc.tree.serialize()}",
                 "n,f,codeword,program_length"]
        for n in range(args.N + 1):
            lines.append(f"{n},{f(n)},{show(cc.codewords[n])},{len(cc.program(n))}")
        ctx.write(f"kc_compile_{args.f}_{args.N}.csv", "\n".join(lines) + "\n")
        if args.save_profile:
            cc.profile.save(args.save_profile)
        print(f"leaves={len(cc.tree)} r={cc.r} overhead={cc.overhead} profile={cc.profile.fingerprint}")


def cmd_berry(ctx: Context) -> None:
    args = ctx.args
    st = ctx.state(args.stage) if (args.stage is not None or args.ledger) else None
    f_code = twice_length_plus_two_bytecode()
    f = functions.twice_length_plus_two()
    rows = solovay.ratio_table(f, f_code, _csv_ints(args.ns), st, ctx.profile)
    ctx.write("berry.csv", solovay.ratio_csv(rows, f_code, ctx.profile.fingerprint,
                                             None if st is None else st.watermark),
              None if st is None else st.watermark)
    for r in rows:
        print(f"n={r.n} x={show(r.x)} f={r.f_x} bound={r.bound} ratio={r.ratio} "
              f"machine_ok={str(r.machine_output == r.x).lower()}")


def cmd_monitor(ctx: Context) -> None:
    args = ctx.args
    crit = args.criterion
    if crit == "bm":
        src = sources.by_spec(args.src)
        rep = monitors.bm_criterion(src, functions.by_name(args.f, ctx.profile), args.n)
        stage = None
    else:
        st = ctx.state(args.stage)
        stage = st.watermark
        if crit == "solovayness":
            rep = monitors.solovayness_probe(functions.by_name(args.g, ctx.profile), st, args.n)
            ctx.write(f"monitor_solovayness_{args.g}_s{stage}.csv", rep.csv(), stage)
            print(f"running_min={rep.running_min} undiscovered={rep.undiscovered}")
            return
        src = sources.by_spec(args.src, st)
        if crit == "levin-schnorr":
            rep = monitors.levin_schnorr(src, st, args.n)
        elif crit == "miller-yu":
            rep = monitors.miller_yu(src, st, functions.by_name(args.g, ctx.profile), args.n)
        else:
            rep = monitors.chaitin_trend(src, st, args.n)
    safe = args.src.replace(":", "_").replace("/", "_")
    ctx.write(f"monitor_{crit}_{safe}_{args.n}.csv", rep.csv(), stage)
    print(f"criterion={rep.criterion} running={rep.running} undiscovered={rep.undiscovered} "
          f"label(0)={rep.label(0)}")


def _schedule(ctx: Context):
    args = ctx.args
    h = nogap.h_by_name(args.h)
    phi = nogap.phi_by_name(args.phi, h)
    alpha = sources.by_spec(args.alpha)
    if args.phi == "coded":
        alpha = nogap.coded_alpha(h, alpha)
    sched = nogap.build_schedule(h, phi, alpha, args.K, args.pad)
    return h, alpha, sched


def cmd_nogap(ctx: Context) -> None:
    args = ctx.args
    if args.action == "report" and args.settling:
        st = ctx.state(args.stage)
        sch = nogap.settling_schedule(st, args.n or st.watermark + 2)
        body = nogap.report_csv(f"settling stage={st.watermark}", ["n", "t_s", "position", "flag"], sch.rows)
        ctx.write(f"settling_s{st.watermark}.csv", body, st.watermark)
        print(f"positions={sch.positions}")
        return
    h, alpha, sched = _schedule(ctx)
    tag = f"{args.h}_{args.phi}_{args.alpha.replace(':', '_').replace('/', '_')}_{args.K}"
    if args.action == "build":
        ctx.write(f"schedule_{tag}.txt", sched.serialize())
        print(f"positions={sched.positions}")
        return
    N = sched.positions[-1] + 1
    beta = sources.from_bits(nogap.insert_zeros(alpha, sched.positions, N), "beta")
    if args.action == "select":
        if args.N is not None:
            N = args.N
            beta = nogap.beta_source(h, nogap.phi_by_name(args.phi, h), alpha, args.pad)
        xi = alpha if args.xi == "alpha" else beta
        trace = nogap.selection_rule_S(xi, sched.machine, N)
        ctx.write(f"trace_{tag}.txt", trace.serialize())
        bias = nogap.bias_report(trace)
        same = nogap.exact_recovery(sched, trace, N)
        print(f"selected = inserted: {str(same).lower()}")
        print(f"selected={bias.selected} ones={bias.ones} flag={bias.flag} "
              f"trace_arithmetic={str(trace.arithmetic_ok()).lower()}")
        return
    trace = nogap.selection_rule_S(beta, sched.machine, N)
    bias = nogap.bias_report(trace)
    lines = [f"selected,{bias.selected}", f"zeros,{bias.zeros}", f"ones,{bias.ones}", f"flag,{bias.flag}",
             f"schedule_constant,{nogap.schedule_constant(sched, h, N)}"]
    stage = None
    if args.stage is not None or args.ledger:
        st = ctx.state(args.stage)
        stage = st.watermark
        rep = nogap.complexity_consistency(beta, st, h, min(args.n or N, N))
        lines.append(f"complexity_running_max,{'' if rep.running_max is None else rep.running_max}")
        lines.append(f"complexity_undiscovered,{rep.undiscovered}")
    ctx.write(f"nogap_report_{tag}.csv", "key,value\n" + "\n".join(lines) + "\n", stage)
    print("\n".join(lines))


def cmd_ktriv(ctx: Context) -> None:
    args = ctx.args
    if args.action == "compile":
        ledger = ktrivial.RequestLedger.loads(Path(args.ledger).read_text(encoding="ascii"))
        e = args.e if args.e is not None else ktrivial.headroom(args.d)
        tree, words = ktrivial.compile_ledger(ledger, e)
        body = f"# headroom e={e} weight={ktrivial.ledger_weight(ledger)}\n{tree.serialize()}\n"
        ctx.write("ktriv_tree.txt", body)
        print(f"requests={len(ledger)} e={e} leaves={len(tree)}")
        return
    alpha = sources.by_spec(args.alpha)
    if args.synthetic is not None:
        stream, _ = ktrivial.synthetic_stream(random.Random(args.synthetic), args.nmax)
        stage = None
        st = None
    else:
        st = ctx.state(args.stage)
        stage = st.watermark
        stream = ktrivial.live_stream(st, args.nmax)
    res = ktrivial.run_strategy(stream, alpha, args.c, args.d, args.nmax)
    tag = f"synthetic{args.synthetic}" if args.synthetic is not None else f"s{stage}"
    ctx.write(f"ktriv_ledger_{tag}.txt", res.ledger.dumps(), stage)
    ctx.write(f"ktriv_summary_{tag}.csv", res.summary_csv(args.d, args.c), stage)
    weight = ktrivial.ledger_weight(res.ledger)
    print(f"requests={len(res.ledger)} weight={weight} bound={2 * args.d} drops={res.drops} cap_hits={res.cap_hits}")
    if st is not None:
        missing = []
        for n in range(args.nmax + 1):
            k = st.K.get(lex_string(n))
            if k is not None and (alpha.prefix(n), k) not in res.ledger:
                missing.append(n)
        print(f"coverage_missing={missing}")


COMMANDS = {
    "enumerate": cmd_enumerate,
    "solovay": cmd_solovay,
    "kc": cmd_kc,
    "berry": cmd_berry,
    "monitor": cmd_monitor,
    "nogap": cmd_nogap,
    "ktriv": cmd_ktriv,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = resolve(argv)
        ctx = Context(args)
        COMMANDS[args.command](ctx)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except FingerprintMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINGERPRINT
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (WorkbenchError, KeyError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
