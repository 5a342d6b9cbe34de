"""Command-line interface: ``noisysynth {synth,eval,corrupt,clean,bench}``.

Exit codes: 0 success, 1 usage or I/O error, 2 no program found,
3 timeout.
"""

from __future__ import annotations

import argparse
import json
import math
import signal
import subprocess
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from .core import INF, Weight
from .dsl.grammar import Grammar, ParseError, evaluate, format_program, parse_program
from .dsl.strings import DEFAULT_CONST_POS, DEFAULT_KS, resolve_tokens, string_grammar
from .dsl.toy import toy_grammar
from .loss import LOSSES, DataSet, Example, PerExampleLoss, get_loss
from .noise import CyclicDelete, DigitReplace
from .objective import CostTable, cost, format_objective, parse_objective
from .synthesis import NoProgramError, SynthesisResult, best_for_accuracy, forced_accuracy, synthesize

EXIT_OK, EXIT_USAGE, EXIT_NO_PROGRAM, EXIT_TIMEOUT = 0, 1, 2, 3
DEFAULT_TOKENS = ("Digits", "Alphabets", "Lowercase", "Uppercase", "Whitespace", "Punctuation")


class UsageError(Exception):
    pass


class DatasetError(ValueError):
    pass


class SynthTimeout(Exception):
    pass


@dataclass(frozen=True)
class ProblemConfig:
    dsl: str = "string"
    constants: tuple[str, ...] = ()
    ks: tuple[int, ...] = DEFAULT_KS
    const_positions: tuple[int, ...] = DEFAULT_CONST_POS
    tokens: tuple[str, ...] = DEFAULT_TOKENS
    height: int = 3
    len_slack: int = 1
    loss: str = "0inf"
    complexity: str = "size"
    objective: str = "lex"
    bound: Optional[float] = None
    trusted_indices: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.dsl not in ("toy", "string"):
            raise UsageError(f"dsl must be 'toy' or 'string', got {self.dsl!r}")
        if self.height < 1:
            raise UsageError("height must be >= 1")
        if self.len_slack not in (0, 1):
            raise UsageError("len_slack must be 0 or 1")
        if self.loss not in LOSSES:
            raise UsageError(f"unknown loss {self.loss!r}; choose from {', '.join(LOSSES)}")
        try:
            parse_objective(self.objective)
        except ValueError as e:
            raise UsageError(str(e)) from None
        if self.bound is not None and (math.isnan(self.bound) or self.bound < 0):
            raise UsageError("bound must be a non-negative number")
        if self.complexity != "size" and not Path(self.complexity).is_file():
            raise UsageError(f"cost table {self.complexity!r} does not exist")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Optional[Path] = None) -> "ProblemConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known - {"dataset"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        vals = {k: v for k, v in raw.items() if k in known}
        for k in ("constants", "ks", "const_positions", "tokens", "trusted_indices"):
            if vals.get(k) is not None:
                vals[k] = tuple(vals[k])
        if vals.get("bound") is not None:
            vals["bound"] = _parse_weight(vals["bound"])
        cx = vals.get("complexity")
        if base_dir is not None and cx not in (None, "size") and not Path(cx).is_absolute():
            vals["complexity"] = str(base_dir / cx)
        return cls(**vals)

    def grammar(self) -> Grammar:
        if self.dsl == "toy":
            return toy_grammar()
        try:
            return string_grammar(self.constants, self.ks, resolve_tokens(self.tokens, self.constants),
                                  self.const_positions)
        except ValueError as e:
            raise UsageError(str(e)) from None

    def cost_table(self, grammar: Grammar) -> CostTable:
        if self.complexity == "size":
            return CostTable.unit(grammar)
        try:
            return CostTable.load(self.complexity, grammar)
        except (OSError, ValueError) as e:
            raise UsageError(f"cost table: {e}") from None


def _parse_weight(v: Any) -> Weight:
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return INF
    try:
        w = float(v)
    except (TypeError, ValueError):
        raise UsageError(f"bad weight {v!r}") from None
    return w


# -- datasets ----------------------------------------------------------------


def _typed(value: Any, dsl: str, where: str) -> Any:
    if dsl == "toy":
        if isinstance(value, bool):
            raise DatasetError(f"{where}: expected an integer")
        if isinstance(value, int):
            return value
        if isinstance(value, str):
            try:
                return int(value.strip())
            except ValueError:
                pass
        raise DatasetError(f"{where}: expected an integer, got {value!r}")
    if not isinstance(value, str):
        raise DatasetError(f"{where}: expected a string, got {value!r}")
    return value


def parse_dataset(doc: Any, dsl: str) -> DataSet:
    if not isinstance(doc, dict) or not isinstance(doc.get("examples"), list):
        raise DatasetError('dataset must be an object with an "examples" array')
    rows = doc["examples"]
    if not rows:
        raise DatasetError("empty dataset")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or "input" not in row or "output" not in row:
            raise DatasetError(f"row {i}: needs 'input' and 'output' fields")
        if not isinstance(row["input"], dict) or not row["input"]:
            raise DatasetError(f"row {i}: 'input' must be a nonempty object")
        env = {k: _typed(v, dsl, f"row {i} input {k!r}") for k, v in row["input"].items()}
        out.append(Example(env, _typed(row["output"], dsl, f"row {i} output")))
    return DataSet(tuple(out))


def load_dataset(path: str | Path, dsl: str = "string") -> DataSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetError(f"{path}: malformed JSON ({e})") from None
    return parse_dataset(doc, dsl)


def dump_dataset(data: DataSet) -> dict:
    return {"examples": [{"input": dict(e.env), "output": e.output} for e in data.examples]}


def _write_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


# -- synthesis driver --------------------------------------------------------


def run_config(cfg: ProblemConfig, data: DataSet) -> tuple[SynthesisResult, Grammar, CostTable]:
    g = cfg.grammar()
    table = cfg.cost_table(g)
    loss = get_loss(cfg.loss)
    objective = parse_objective(cfg.objective)
    if cfg.trusted_indices is not None:
        bound = 0.0 if cfg.bound is None else cfg.bound
        if any(not 0 <= i < len(data) for i in cfg.trusted_indices):
            raise UsageError("trusted index out of range")
        res = forced_accuracy(g, data, cfg.trusted_indices, loss, table, objective, bound,
                              cfg.height, cfg.len_slack)
    elif cfg.bound is not None:
        res = best_for_accuracy(g, data, loss, table, cfg.bound, cfg.height, cfg.len_slack)
    else:
        res = synthesize(g, data, loss, table, objective, cfg.height, cfg.len_slack)
    if res.loss == INF:
        raise NoProgramError(f"every program within height {cfg.height} has infinite loss")
    return res, g, table


def _fmt_weight(w: Weight) -> str:
    return format_objective(w)


def report(res: SynthesisResult, cfg: ProblemConfig, data: DataSet) -> dict:
    doc = {
        "program": res.text,
        "loss": _fmt_weight(res.loss),
        "complexity": _fmt_weight(res.complexity),
        "objective": format_objective(res.objective),
        "sfta_states": res.sfta_state_count,
        "seconds": round(res.seconds, 4),
    }
    if cfg.loss == "0inf":
        kept = len(data.dedupe())
        if kept != len(data):
            doc["deduplicated"] = f"{len(data)} -> {kept} rows"
    return doc


def _print_report(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, ensure_ascii=False))
    else:
        for k, v in doc.items():
            print(f"{k}: {v}")


class _Alarm:
    """SIGALRM-based wall-clock limit; a no-op when ``seconds`` is None."""

    def __init__(self, seconds: Optional[float]):
        self.seconds = seconds

    def _fire(self, signum, frame):
        raise SynthTimeout()

    def __enter__(self):
        if self.seconds is not None:
            self._old = signal.signal(signal.SIGALRM, self._fire)
            signal.setitimer(signal.ITIMER_REAL, self.seconds)
        return self

    def __exit__(self, *exc):
        if self.seconds is not None:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, self._old)
        return False


# -- commands ----------------------------------------------------------------


def _config_from_args(args: argparse.Namespace) -> ProblemConfig:
    raw: dict = {}
    base = None
    if args.config:
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"config {path}: {e}") from None
        base = path.parent
    cfg = ProblemConfig.from_dict(raw, base)
    over: dict = {}
    for name in ("dsl", "height", "len_slack", "loss", "complexity", "objective"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = v
    for name in ("constants", "ks", "const_positions", "tokens", "trusted_indices"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = tuple(v)
    if getattr(args, "bound", None) is not None:
        over["bound"] = _parse_weight(args.bound)
    return replace(cfg, **over) if over else cfg


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = load_dataset(args.dataset, cfg.dsl)
    with _Alarm(args.timeout):
        res, _, _ = run_config(cfg, data)
    _print_report(report(res, cfg, data), args.json)
    return EXIT_OK


def _row_losses(program, g: Grammar, data: DataSet, loss: PerExampleLoss):
    rows = []
    for ex in data.examples:
        out = evaluate(program, ex.env, g)
        rows.append((out, INF if out is None else loss(ex.output, out)))
    return rows


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = load_dataset(args.dataset, cfg.dsl)
    g = cfg.grammar()
    try:
        program = parse_program(args.program, g)
    except ParseError as e:
        raise UsageError(f"cannot parse program: {e}") from None
    loss = get_loss(cfg.loss)
    rows = _row_losses(program, g, data, loss)
    total = sum(w for _, w in rows)
    complexity = cost(program, cfg.cost_table(g))
    if args.json:
        print(json.dumps({
            "rows": [{"row": i, "expected": ex.output, "produced": out, "loss": _fmt_weight(w)}
                     for i, (ex, (out, w)) in enumerate(zip(data.examples, rows))],
            "loss": _fmt_weight(total), "complexity": _fmt_weight(complexity),
        }, ensure_ascii=False))
        return EXIT_OK
    for i, (ex, (out, w)) in enumerate(zip(data.examples, rows)):
        shown = "<undefined>" if out is None else json.dumps(out, ensure_ascii=False)
        print(f"{i}\texpected={json.dumps(ex.output, ensure_ascii=False)}\tproduced={shown}\t"
              f"loss={_fmt_weight(w)}")
    print(f"loss: {_fmt_weight(total)}")
    print(f"complexity: {_fmt_weight(complexity)}")
    return EXIT_OK


def cmd_corrupt(args: argparse.Namespace) -> int:
    data = load_dataset(args.dataset, "string")
    if args.noise == "cyclic":
        spec = CyclicDelete(args.preserve_last)
    else:
        if args.b is None:
            raise UsageError("--b is required for digit replacement")
        spec = DigitReplace(args.b, args.seed)
    try:
        noisy = spec.apply(data)
    except ValueError as e:
        raise DatasetError(str(e)) from None
    _write_json(args.output, dump_dataset(noisy))
    prov = {**spec.provenance(), "source": str(args.dataset), "rows": len(data)}
    _write_json(str(args.output) + ".provenance.json", prov)
    print(f"wrote {args.output} ({len(noisy)} rows)")
    return EXIT_OK


def cmd_clean(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    data = load_dataset(args.dataset, cfg.dsl)
    with _Alarm(args.timeout):
        res, g, _ = run_config(cfg, data)
    rows = _row_losses(res.program, g, data, get_loss(cfg.loss))
    flagged = [i for i, (_, w) in enumerate(rows) if w > 0]
    kept = []
    for i, (ex, (out, w)) in enumerate(zip(data.examples, rows)):
        if w == 0:
            kept.append(ex)
        elif args.mode == "repair" and out is not None:
            kept.append(Example(ex.env, out))
    _write_json(args.output, dump_dataset(DataSet(tuple(kept))))
    doc = report(res, cfg, data)
    doc["flagged_rows"] = flagged
    doc["mode"] = args.mode
    doc["written_rows"] = len(kept)
    _print_report(doc, args.json)
    return EXIT_OK


def bench_problem(config_path: Path, timeout: float) -> dict:
    """Run one benchmark problem in a child process."""
    raw = json.loads(config_path.read_text(encoding="utf-8"))
    if "dataset" not in raw:
        raise UsageError(f"{config_path}: missing 'dataset'")
    dataset = config_path.parent / raw["dataset"]
    cmd = [sys.executable, "-m", "noisysynth", "synth", "--config", str(config_path),
           str(dataset), "--json"]
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return {"problem": config_path.stem, "status": "-"}
    elapsed = time.perf_counter() - t0
    if proc.returncode == EXIT_NO_PROGRAM:
        return {"problem": config_path.stem, "status": "X"}
    if proc.returncode != EXIT_OK:
        return {"problem": config_path.stem, "status": "error",
                "message": proc.stderr.strip().splitlines()[-1:] or [""]}
    doc = json.loads(proc.stdout)
    return {"problem": config_path.stem, "status": "ok", "time": elapsed,
            "states": doc["sfta_states"], "loss": doc["loss"], "size": doc["complexity"],
            "program": doc["program"]}


def format_bench(rows: Sequence[dict]) -> str:
    head = f"{'problem':<24} {'time(sec)':>9} {'states':>8} {'loss':>6} {'size':>5}  program"
    lines = [head]
    for r in rows:
        if r["status"] == "ok":
            lines.append(f"{r['problem']:<24} {r['time']:>9.2f} {r['states']:>8} {r['loss']:>6} "
                         f"{r['size']:>5}  {r['program']}")
        else:
            mark = r["status"] if r["status"] in ("X", "-") else "error"
            lines.append(f"{r['problem']:<24} {mark:>9} {mark:>8} {mark:>6} {mark:>5}")
    return "\n".join(lines)


def cmd_bench(args: argparse.Namespace) -> int:
    root = Path(args.config_dir)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    problems = sorted(p for p in root.glob("*.json")
                      if not p.name.endswith(".data.json") and not p.name.endswith(".provenance.json"))
    if not problems:
        raise UsageError(f"no problem configs in {root}")
    rows = [bench_problem(p, args.timeout) for p in problems]
    if args.json:
        print(json.dumps(rows, ensure_ascii=False))
    else:
        print(format_bench(rows))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="problem config JSON; flags below override it")
    p.add_argument("--dsl", choices=["toy", "string"])
    p.add_argument("--constants", nargs="*", metavar="TEXT")
    p.add_argument("--ks", nargs="+", type=int, metavar="K")
    p.add_argument("--const-positions", dest="const_positions", nargs="*", type=int, metavar="K")
    p.add_argument("--tokens", nargs="+", metavar="NAME")
    p.add_argument("--height", type=int, help="bounded scope height")
    p.add_argument("--len-slack", dest="len_slack", type=int, choices=[0, 1])
    p.add_argument("--loss", choices=sorted(LOSSES))
    p.add_argument("--complexity", help="'size' or a cost-table file of 'name cost' lines")
    p.add_argument("--objective", help="'lex' or 'tradeoff:<lambda>'")
    p.add_argument("--bound", help="keep programs with loss <= BOUND (on trusted rows if given)")
    p.add_argument("--trusted", dest="trusted_indices", nargs="*", type=int, metavar="ROW")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisysynth",
                                     description="Synthesise programs from noisy examples.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesise a program for a dataset")
    p.add_argument("dataset")
    _add_problem_flags(p)
    p.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate a program against a dataset")
    p.add_argument("dataset")
    p.add_argument("program", help="program in S-expression syntax")
    _add_problem_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("corrupt", help="apply a noise source to dataset outputs")
    p.add_argument("dataset")
    p.add_argument("--noise", choices=["cyclic", "digits"], required=True)
    p.add_argument("--preserve-last", type=int, default=0)
    p.add_argument("--b", type=float, help="digit replacement probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("clean", help="flag rows the synthesised program disagrees with")
    p.add_argument("dataset")
    _add_problem_flags(p)
    p.add_argument("--mode", choices=["filter", "repair"], default="filter")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("bench", help="run every problem config in a directory")
    p.add_argument("config_dir")
    p.add_argument("--timeout", type=float, default=600.0, help="per-problem limit in seconds")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except NoProgramError as e:
        print(f"no program: {e}", file=sys.stderr)
        return EXIT_NO_PROGRAM
    except SynthTimeout:
        print("timeout", file=sys.stderr)
        return EXIT_TIMEOUT
    except (UsageError, DatasetError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
