"""Command-line interface: embed, eval, and residuals subcommands.

Every run resolves its parameters, executes, and writes a JSON manifest
recording the command, the resolved parameters, input and output file
hashes, the tool version, and the wall-clock duration.  Re-running with
``--from-manifest`` replays the stored parameters and reproduces the
primary outputs byte for byte; explicit flags override manifest values.

All randomness flows from ``--seed`` (default 0, never wall-clock
entropy).  The environment variable ``BOOSTNE_THREADS`` caps the thread
count of the underlying linear-algebra libraries.

Exit codes: 0 success, 2 usage error, 3 data error, 4 resource guard.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .boost import BoostConfig, boostne, joint_objective, residual_trace
from .connectivity import deepwalk_matrix, grarep_step_matrix, line_matrix
from .errors import BoostNEError, ResourceLimitError
from .evaluation import (
    EvalConfig,
    build_label_set,
    evaluate,
    format_report_table,
    report_to_dict,
)
from .graph import DEFAULT_DENSE_NODE_CEILING, load_edge_list
from .io import file_sha256, load_embedding, load_labels, save_embedding

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_RESOURCE = 4

_DEFAULT_RATIOS = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"


class UsageError(Exception):
    """Bad flag values or combinations; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boostne",
        description="Boosted multi-level nonnegative node embeddings.",
    )
    parser.add_argument(
        "--version", action="version", version=f"boostne {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser(
        "embed", help="embed a graph and write embedding, trace, manifest"
    )
    _add_manifest_flag(embed)
    embed.add_argument("--edges", help="edge list file (src dst [weight])")
    _add_matrix_flags(embed)
    embed.add_argument("--dim", type=int, help="total embedding width (128)")
    embed.add_argument("--levels", type=int, help="boosting levels (8)")
    _add_solver_flags(embed)
    embed.add_argument(
        "--out", help="embedding output path (boostne-embedding.txt)"
    )

    ev = sub.add_parser(
        "eval", help="classify labeled nodes from an embedding file"
    )
    _add_manifest_flag(ev)
    ev.add_argument("--embedding", help="embedding file (word2vec text)")
    ev.add_argument("--labels", help="label file (node_id label [label ...])")
    ev.add_argument(
        "--ratios", help=f"comma-separated train ratios ({_DEFAULT_RATIOS})"
    )
    ev.add_argument("--repeats", type=int, help="trials per ratio (10)")
    ev.add_argument(
        "--seed", type=int, help="base seed for all randomness (0)"
    )
    ev.add_argument("--l2", type=float, help="L2 regularization strength (1.0)")
    ev.add_argument(
        "--iters", type=int, help="classifier gradient-descent steps (300)"
    )
    ev.add_argument(
        "--threshold",
        type=float,
        help="use a fixed score threshold instead of the top-l rule",
    )
    ev.add_argument(
        "--stratified",
        action="store_true",
        default=None,
        help="stratify splits by each node's lowest class",
    )
    ev.add_argument(
        "--out", help="output prefix for .json/.txt reports (boostne-eval)"
    )

    res = sub.add_parser(
        "residuals",
        help="sweep the level count and tabulate terminal residual error",
    )
    _add_manifest_flag(res)
    res.add_argument("--edges", help="edge list file (src dst [weight])")
    _add_matrix_flags(res)
    res.add_argument("--dim", type=int, help="total embedding width (128)")
    res.add_argument(
        "--levels-sweep",
        dest="levels_sweep",
        help="comma-separated level counts (1,2,4,8,16,32,64)",
    )
    _add_solver_flags(res)
    res.add_argument("--out", help="CSV output path (boostne-residuals.csv)")
    return parser


def _add_manifest_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--from-manifest",
        dest="from_manifest",
        help="replay parameters from an earlier run's manifest",
    )


def _add_matrix_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--matrix",
        choices=("deepwalk", "line", "grarep"),
        help="connectivity matrix kind (deepwalk)",
    )
    sub.add_argument("--window", type=int, help="walk window for deepwalk (10)")
    sub.add_argument(
        "--shift",
        type=float,
        help="log shift; default 5 for deepwalk/line, 1/n for grarep",
    )
    sub.add_argument("--step", type=int, help="transition power for grarep (1)")
    sub.add_argument(
        "--drop-isolated",
        dest="drop_isolated",
        action="store_true",
        default=None,
        help="drop zero-degree nodes instead of failing",
    )
    sub.add_argument(
        "--max-dense-nodes",
        dest="max_dense_nodes",
        type=int,
        help=f"walk accumulation guard ({DEFAULT_DENSE_NODE_CEILING} nodes)",
    )


def _add_solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--seed", type=int, help="base seed for all randomness (0)"
    )
    sub.add_argument(
        "--nmf-iters",
        dest="nmf_iters",
        type=int,
        help="max multiplicative updates per level (200)",
    )
    sub.add_argument(
        "--nmf-tol",
        dest="nmf_tol",
        type=float,
        help="relative objective tolerance per level (1e-4)",
    )
    sub.add_argument(
        "--allow-wide",
        dest="allow_wide",
        action="store_true",
        default=None,
        help="permit total dimension >= node count",
    )


class _Params:
    """Flag values overlaid on manifest parameters overlaid on defaults."""

    def __init__(self, args: argparse.Namespace, command: str):
        self.cli = vars(args)
        self.stored: dict = {}
        manifest_path = self.cli.get("from_manifest")
        if manifest_path:
            try:
                with open(manifest_path, "r", encoding="utf-8") as handle:
                    manifest = json.load(handle)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read manifest {manifest_path}: {exc}")
            if manifest.get("command") != command:
                raise UsageError(
                    f"manifest {manifest_path} records command "
                    f"{manifest.get('command')!r}, not {command!r}"
                )
            self.stored = manifest.get("parameters", {})

    def get(self, name: str, default=None):
        value = self.cli.get(name)
        if value is None:
            value = self.stored.get(name, default)
        return value

    def require(self, name: str, flag: str):
        value = self.get(name)
        if value is None:
            raise UsageError(f"{flag} is required")
        return value


def _parse_ratio_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part != "")
    except ValueError:
        raise UsageError(f"bad ratio list {text!r}") from None
    if not values:
        raise UsageError("ratio list is empty")
    for value in values:
        if not 0.0 < value < 1.0:
            raise UsageError(f"train ratio {value} outside (0, 1)")
    return values


def _parse_level_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise UsageError(f"bad level list {text!r}") from None
    if not values:
        raise UsageError("level sweep list is empty")
    for value in values:
        if value < 1:
            raise UsageError(f"level count {value} must be positive")
    return values


def _build_connectivity(graph, params: _Params):
    kind = params.get("matrix", "deepwalk")
    shift = params.get("shift")
    if kind == "deepwalk":
        return deepwalk_matrix(
            graph,
            window=params.get("window", 10),
            shift=5.0 if shift is None else shift,
            max_dense_nodes=params.get(
                "max_dense_nodes", DEFAULT_DENSE_NODE_CEILING
            ),
        )
    if kind == "line":
        return line_matrix(
            graph,
            shift=5.0 if shift is None else shift,
            max_dense_nodes=params.get(
                "max_dense_nodes", DEFAULT_DENSE_NODE_CEILING
            ),
        )
    return grarep_step_matrix(graph, params.get("step", 1), shift=shift)


def _matrix_params(params: _Params, conn) -> dict:
    return {
        "matrix": params.get("matrix", "deepwalk"),
        "window": conn.config.window,
        "shift": conn.config.shift,
        "step": conn.config.step,
        "drop_isolated": bool(params.get("drop_isolated", False)),
        "max_dense_nodes": params.get(
            "max_dense_nodes", DEFAULT_DENSE_NODE_CEILING
        ),
    }


def _write_manifest(
    path: Path,
    command: str,
    parameters: dict,
    inputs: dict[str, str | Path],
    outputs: dict[str, str | Path],
    started: float,
) -> None:
    manifest = {
        "tool": "boostne",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "inputs": {
            name: {"path": str(p), "sha256": file_sha256(p)}
            for name, p in inputs.items()
        },
        "outputs": {
            name: {"path": str(p), "sha256": file_sha256(p)}
            for name, p in outputs.items()
        },
        "duration_seconds": time.monotonic() - started,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _cmd_embed(args: argparse.Namespace) -> int:
    started = time.monotonic()
    params = _Params(args, "embed")
    edges = params.require("edges", "--edges")
    dim = params.get("dim", 128)
    levels = params.get("levels", 8)
    if dim % levels != 0:
        raise UsageError(f"--dim {dim} is not divisible by --levels {levels}")
    graph = load_edge_list(edges, bool(params.get("drop_isolated", False)))
    conn = _build_connectivity(graph, params)
    config = BoostConfig(
        levels=levels,
        rank=dim // levels,
        seed=params.get("seed", 0),
        max_iters=params.get("nmf_iters", 200),
        rel_tol=params.get("nmf_tol", 1e-4),
        allow_wide=bool(params.get("allow_wide", False)),
    )
    result = boostne(conn, config)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)

    out = Path(params.get("out", "boostne-embedding.txt"))
    trace_path = out.with_suffix(".trace.json")
    manifest_path = out.with_suffix(".manifest.json")
    save_embedding(out, graph.node_ids, result.embedding)
    with open(trace_path, "w", encoding="utf-8") as handle:
        json.dump(residual_trace(result), handle, indent=2)
        handle.write("\n")
    parameters = {
        "edges": str(edges),
        "dim": dim,
        "levels": levels,
        "seed": config.seed,
        "nmf_iters": config.max_iters,
        "nmf_tol": config.rel_tol,
        "allow_wide": config.allow_wide,
        "out": str(out),
        **_matrix_params(params, conn),
    }
    _write_manifest(
        manifest_path,
        "embed",
        parameters,
        {"edges": edges},
        {"embedding": out, "trace": trace_path},
        started,
    )
    print(f"wrote {out} ({graph.n} nodes x {dim} dims), trace {trace_path}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    started = time.monotonic()
    params = _Params(args, "eval")
    embedding_path = params.require("embedding", "--embedding")
    labels_path = params.require("labels", "--labels")
    ratios_text = params.get("ratios", _DEFAULT_RATIOS)
    config = EvalConfig(
        train_ratios=_parse_ratio_list(ratios_text),
        repeats=params.get("repeats", 10),
        seed=params.get("seed", 0),
        regularization=params.get("l2", 1.0),
        iterations=params.get("iters", 300),
        threshold=params.get("threshold"),
        stratified=bool(params.get("stratified", False)),
    )
    node_ids, matrix = load_embedding(embedding_path)
    label_set = build_label_set(node_ids, load_labels(labels_path))
    report = evaluate(matrix, label_set, config)

    prefix = Path(params.get("out", "boostne-eval"))
    json_path = prefix.with_suffix(".json")
    table_path = prefix.with_suffix(".txt")
    manifest_path = prefix.with_suffix(".manifest.json")
    table = format_report_table(report)
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report_to_dict(report), handle, indent=2)
        handle.write("\n")
    with open(table_path, "w", encoding="utf-8") as handle:
        handle.write(table + "\n")
    parameters = {
        "embedding": str(embedding_path),
        "labels": str(labels_path),
        "ratios": ratios_text,
        "repeats": config.repeats,
        "seed": config.seed,
        "l2": config.regularization,
        "iters": config.iterations,
        "threshold": config.threshold,
        "stratified": config.stratified,
        "out": str(prefix),
    }
    _write_manifest(
        manifest_path,
        "eval",
        parameters,
        {"embedding": embedding_path, "labels": labels_path},
        {"report_json": json_path, "report_table": table_path},
        started,
    )
    print(table)
    print(f"wrote {json_path} and {table_path}")
    return EXIT_OK


def _cmd_residuals(args: argparse.Namespace) -> int:
    started = time.monotonic()
    params = _Params(args, "residuals")
    edges = params.require("edges", "--edges")
    dim = params.get("dim", 128)
    sweep = _parse_level_list(params.get("levels_sweep", "1,2,4,8,16,32,64"))
    offenders = [k for k in sweep if dim % k != 0]
    if offenders:
        listed = ", ".join(str(k) for k in offenders)
        raise UsageError(f"--dim {dim} is not divisible by levels: {listed}")
    graph = load_edge_list(edges, bool(params.get("drop_isolated", False)))
    conn = _build_connectivity(graph, params)
    rows = []
    for levels in sweep:
        config = BoostConfig(
            levels=levels,
            rank=dim // levels,
            seed=params.get("seed", 0),
            max_iters=params.get("nmf_iters", 200),
            rel_tol=params.get("nmf_tol", 1e-4),
            allow_wide=bool(params.get("allow_wide", False)),
        )
        result = boostne(conn, config)
        rows.append(
            (levels, result.terminal_residual_norm, joint_objective(conn, result))
        )

    out = Path(params.get("out", "boostne-residuals.csv"))
    manifest_path = out.with_suffix(".manifest.json")
    with open(out, "w", encoding="utf-8") as handle:
        handle.write("levels,terminal_residual_norm,joint_objective\n")
        for levels, norm, joint in rows:
            handle.write(f"{levels},{norm!r},{joint!r}\n")
    parameters = {
        "edges": str(edges),
        "dim": dim,
        "levels_sweep": ",".join(str(k) for k in sweep),
        "seed": params.get("seed", 0),
        "nmf_iters": params.get("nmf_iters", 200),
        "nmf_tol": params.get("nmf_tol", 1e-4),
        "allow_wide": bool(params.get("allow_wide", False)),
        "out": str(out),
        **_matrix_params(params, conn),
    }
    _write_manifest(
        manifest_path, "residuals", parameters, {"edges": edges}, {"csv": out},
        started,
    )
    print(f"wrote {out} ({len(rows)} level counts)")
    return EXIT_OK


_COMMANDS = {
    "embed": _cmd_embed,
    "eval": _cmd_eval,
    "residuals": _cmd_residuals,
}


def _thread_limit():
    raw = os.environ.get("BOOSTNE_THREADS")
    if not raw:
        return None
    try:
        count = int(raw)
        if count < 1:
            raise ValueError
    except ValueError:
        raise UsageError(f"BOOSTNE_THREADS={raw!r} is not a positive integer")
    return count


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        limit = _thread_limit()
        command = _COMMANDS[args.command]
        if limit is None:
            return command(args)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=limit):
            return command(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except BoostNEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc.filename or exc}: file not found", file=sys.stderr)
        return EXIT_DATA
    except IsADirectoryError as exc:
        print(f"error: {exc.filename or exc}: is a directory", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
