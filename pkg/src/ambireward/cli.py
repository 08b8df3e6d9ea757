"""Command-line entry point.

Subcommands: parse, reward, eval, balance, serve, fixtures. Failures exit nonzero
and print one JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_settings, setup_logging
from .data import balanced_stream, load_dataset, parse_ratio
from .evaluation import evaluate_dump, read_dump
from .parsing import ParseError, TaskKind
from .reward import compute_reward, parse_completion
from .similarity import ExecutionCache


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj, out) -> None:
    out.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _read_completions(path: str) -> list[dict]:
    """A JSONL dump, or a plain text file holding a single completion."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if records and all(isinstance(r, dict) and "completion_text" in r for r in records):
            return records
    except json.JSONDecodeError:
        pass
    return [{"example_id": Path(path).stem, "completion_text": text}]


def cmd_parse(args) -> int:
    out = _open_out(args.output)
    for rec in _read_completions(args.input):
        row = {"example_id": rec.get("example_id")}
        try:
            parsed = parse_completion(rec["completion_text"], args.task, args.format)
        except ParseError as exc:
            row.update(error=exc.code, message=str(exc))
        else:
            row.update(
                reasoning_chars=len(parsed.reasoning_text),
                pairs=[{"index": p.index, "interpretation": p.interpretation, "answer": p.answer} for p in parsed.pairs],
                violations=parsed.format_violations,
            )
        _emit(row, out)
    return 0


def _reward_via_server(args, records) -> list[dict]:
    import httpx

    rows = []
    with httpx.Client(base_url=args.server, timeout=args.timeout) as client:
        for rec in records:
            resp = client.post("/v1/reward", json={
                "example_id": rec["example_id"], "completions": [rec["completion_text"]], "format": args.format,
            })
            resp.raise_for_status()
            rows.append({"example_id": rec["example_id"], **resp.json()["results"][0]})
    return rows


def cmd_reward(args) -> int:
    records = read_dump(args.completions)
    if args.server:
        rows = _reward_via_server(args, records)
    else:
        if not args.dataset:
            raise UsageError("reward needs --dataset unless --server is given")
        by_id = {ex.id: ex for ex in load_dataset(args.dataset, args.data_root)}
        cache = ExecutionCache()
        rows = []
        for rec in records:
            ex = by_id.get(rec["example_id"])
            if ex is None:
                raise KeyError(f"unknown example_id {rec['example_id']!r}")
            outcome = compute_reward(rec["completion_text"], ex, fmt=args.format, exec_cache=cache)
            rows.append({"example_id": ex.id, **outcome.to_dict()})
    out = _open_out(args.output)
    for row in rows:
        _emit(row, out)
    return 0


def cmd_eval(args) -> int:
    settings = load_settings(args.config)
    by_id = {ex.id: ex for ex in load_dataset(args.dataset, args.data_root)}
    judge = None
    if args.sim == "judge":
        from .service.app import build_judge

        judge = build_judge(settings)
    report, per = evaluate_dump(by_id, read_dump(args.completions), args.sim, judge=judge,
                                fmt=args.format, exec_timeout=settings.sql_timeout)
    if args.json == "-":
        sys.stdout.write(report.to_json() + "\n")
        return 0
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.to_table())
    return 0


def cmd_balance(args) -> int:
    examples = load_dataset(args.dataset, args.data_root, check_sql=False)
    stream = balanced_stream(examples, parse_ratio(args.ratio), args.batch_size, args.seed)
    out = _open_out(args.output)
    for k, batch in enumerate(itertools.islice(stream, args.batches)):
        _emit({"batch": k, "ids": [ex.id for ex in batch]}, out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    settings = load_settings(args.config, dataset=args.dataset, data_root=args.data_root, host=args.host, port=args.port)
    setup_logging()
    app = create_app(settings)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level="info")
    return 0


def cmd_fixtures(args) -> int:
    from .fixtures import write_fixtures

    paths = write_fixtures(args.out, args.seed)
    _emit({k: str(v) for k, v in paths.items()}, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ambireward", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp, required=True):
        sp.add_argument("--dataset", required=required)
        sp.add_argument("--data-root", default=None, help="base for relative db paths (default: dataset dir)")

    sp = sub.add_parser("parse", help="parse completions into interpretation-answer pairs")
    sp.add_argument("input", help="JSONL dump or a plain-text completion")
    sp.add_argument("--task", choices=[t.value for t in TaskKind], default="qa")
    sp.add_argument("--format", choices=["pairs", "answers"], default="pairs")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("reward", help="per-completion rewards")
    data_args(sp, required=False)
    sp.add_argument("--completions", required=True)
    sp.add_argument("--format", choices=["pairs", "answers"], default="pairs")
    sp.add_argument("--server", help="base URL of a running service; rewards are computed remotely")
    sp.add_argument("--timeout", type=float, default=60.0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_reward)

    sp = sub.add_parser("eval", help="aggregate evaluation report")
    data_args(sp)
    sp.add_argument("--completions", required=True)
    sp.add_argument("--sim", choices=["judge", "overlap", "exec"], default="overlap")
    sp.add_argument("--format", choices=["pairs", "answers"], default="pairs")
    sp.add_argument("--config")
    sp.add_argument("--json", help="write the JSON report here ('-' for stdout only)")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("balance", help="emit a balanced stream of example ids")
    data_args(sp)
    sp.add_argument("--ratio", default="3:1")
    sp.add_argument("--batch-size", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--batches", type=int, default=10)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_balance)

    sp = sub.add_parser("serve", help="run the HTTP reward service")
    sp.add_argument("--config")
    data_args(sp, required=False)
    sp.add_argument("--host")
    sp.add_argument("--port", type=int)
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("fixtures", help="write the Jobs desk-scale fixture set")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_fixtures)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _emit({"error": "UsageError", "message": str(exc)}, sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        _emit({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
