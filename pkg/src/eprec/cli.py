"""Command-line interface.

Exit codes: 0 success (possibly with flagged rows), 2 usage or validation
error, 3 I/O error.  Every table starts with a comment header carrying the
tool version and the fully resolved configuration; ``eprec replay FILE``
reruns that configuration and reproduces the table byte for byte.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Optional

from . import __version__
from .core import DNA, AlphabetError, EncodingError, FiniteAlphabet, encode_text, parse_involution
from .estimators import (
    KINDS,
    EstimatorSpec,
    FixedSequenceSource,
    ModelSource,
    ensemble_run,
    fmt_num,
    write_csv,
)
from .genomics import FastaError, chargaff_experiment, default_m_grid, parse_fasta, write_fasta
from .models import (
    MarkovModel,
    ModelError,
    cross_entropy_markov,
    entropy_production_markov,
    entropy_rate,
    is_irreducible_aperiodic,
    load_model,
    psi_star_zero_bound,
    reversed_model,
    sample,
)

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3

# Flags that never change output bytes and so stay out of the config header.
_UNRECORDED = ("output", "threads", "func")


class UsageError(Exception):
    pass


def parse_grid(spec: str) -> list[int]:
    """``"4"``, ``"8:14"``, ``"100,1000"``, ``"1e2,1e4"`` or ``"decades:2:6"``."""
    spec = spec.strip()
    try:
        if spec.startswith("decades:"):
            _, lo, hi = spec.split(":")
            return [10**e for e in range(int(lo), int(hi) + 1)]
        if ":" in spec:
            lo, hi = spec.split(":")
            return list(range(int(lo), int(hi) + 1))
        out = []
        for item in spec.split(","):
            v = float(item)
            if v != int(v):
                raise ValueError(item)
            out.append(int(v))
        return out
    except ValueError:
        raise UsageError(f"malformed grid {spec!r}") from None


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_sequence_text(path: str) -> str:
    """Symbols of a plain-text file, or of the first record of a FASTA file."""
    lines = _read_text(path).splitlines()
    body = [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]
    if body and body[0].startswith(">"):
        rec = []
        for ln in body[1:]:
            if ln.startswith(">"):
                break
            rec.append(ln)
        body = rec
    return "".join("".join(ln.split()) for ln in body)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNRECORDED}


def _header(config: dict) -> str:
    return f"# eprec {__version__}\n# config: {json.dumps(config, sort_keys=True)}\n"


def _emit(config: dict, records: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        json.dump({"tool": f"eprec {__version__}", "config": config, "rows": records},
                  out, indent=1, sort_keys=False)
        out.write("\n")
        return
    out.write(_header(config))
    write_csv(records, out)


def _open_output(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


# ---------------------------------------------------------------------------
# Subcommands


def cmd_simulate(cfg: dict, out) -> int:
    model = load_model(cfg["model"])
    seq = sample(model, cfg["length"], cfg["seed"])
    sep = "" if model.alphabet.single_char else " "
    write_fasta(out, "simulated " + json.dumps(cfg, sort_keys=True), seq.to_text(sep))
    return EXIT_OK


def _load_sequence(path: str, alphabet: FiniteAlphabet, fold_case: bool):
    return encode_text(read_sequence_text(path), alphabet, fold_case=fold_case)


def cmd_estimate(cfg: dict, out, threads: int = 1) -> int:
    grid = parse_grid(cfg["grid"])
    if cfg["model"]:
        model = load_model(cfg["model"])
        alphabet = model.alphabet
        other = load_model(cfg["y_model"]) if cfg["y_model"] else None
        if cfg["length"] is None:
            raise UsageError("--length is required with --model")
        source = ModelSource(model, cfg["length"], other)
        realizations = cfg["realizations"]
    elif cfg["sequence"]:
        if not cfg["alphabet"]:
            raise UsageError("--alphabet is required with --sequence")
        alphabet = FiniteAlphabet.from_string(cfg["alphabet"])
        x = _load_sequence(cfg["sequence"], alphabet, cfg["fold_case"])
        y = _load_sequence(cfg["y_sequence"], alphabet, cfg["fold_case"]) if cfg["y_sequence"] else None
        source = FixedSequenceSource(x, cfg["window_policy"], y)
        if cfg["window_policy"] == "prefix":
            cfg["realizations"] = 1
        realizations = cfg["realizations"]
    else:
        raise UsageError("one of --model or --sequence is required")
    theta = parse_involution(cfg["involution"], alphabet)
    spec = EstimatorSpec(cfg["kind"], theta if cfg["kind"] in ("ep-recurrence", "ep-match") else None)
    stats = ensemble_run(source, spec, realizations, cfg["seed"], grid, workers=threads)
    _emit(cfg, stats.records(bits=cfg["bits"]), cfg["format"], out)
    if all(r.flagged for r in stats.rows):
        print("eprec: no grid point produced a usable estimate", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_oracle(cfg: dict, out) -> int:
    model = load_model(cfg["model"])
    theta = parse_involution(cfg["involution"], model.alphabet)
    flags = is_irreducible_aperiodic(model.transition_matrix)
    rows: list[tuple[str, str]] = []
    if isinstance(model, MarkovModel):
        ep = entropy_production_markov(model, theta)
        rows.append(("entropy_rate", fmt_num(entropy_rate(model))))
        rows.append(("entropy_production", fmt_num(ep)))
        if model.full_support:
            cross = cross_entropy_markov(model, reversed_model(model, theta))
        else:
            cross = math.inf if math.isinf(ep) else entropy_rate(model) + ep
        rows.append(("cross_entropy_reversed", fmt_num(cross)))
    try:
        bound = psi_star_zero_bound(model)
    except ModelError:
        bound = math.inf
    rows.append(("psi_star_zero_bound", fmt_num(bound)))
    rows.append(("irreducible", str(flags.irreducible).lower()))
    rows.append(("aperiodic", str(flags.aperiodic).lower()))
    rows.append(("period", "" if flags.period is None else str(flags.period)))
    records = [{"quantity": k, "value": v} for k, v in rows]
    _emit(cfg, records, cfg["format"], out)
    return EXIT_OK


def cmd_dna(cfg: dict, out, threads: int = 1) -> int:
    records = parse_fasta(cfg["fasta"], gap_policy=cfg["gap_policy"])
    if cfg["record"]:
        records = [r for r in records if r.id == cfg["record"]]
        if not records:
            raise UsageError(f"no record named {cfg['record']!r}")
    if not cfg["involution"]:
        cfg["involution"] = ["id", "chargaff"]
    names = cfg["involution"]
    thetas = {name: parse_involution(name, DNA) for name in names}
    rows: list[dict] = []
    for rec in records:
        grid = parse_grid(cfg["grid"]) if cfg["grid"] else default_m_grid(rec)
        result = chargaff_experiment(rec, grid, cfg["realizations"], cfg["seed"], thetas, workers=threads)
        for name in names:
            rows.extend(result[name].records(bits=cfg["bits"]))
    _emit(cfg, rows, cfg["format"], out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eprec", description="Recurrence-time estimators of entropy production.")
    p.add_argument("--version", action="version", version=f"eprec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")

    s = sub.add_parser("simulate", help="sample a sequence from a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    common(s, fmt=False)

    e = sub.add_parser("estimate", help="ensemble estimates on a model or a sequence")
    e.add_argument("--kind", choices=KINDS, required=True)
    e.add_argument("--grid", required=True, help="word lengths n, or window sizes m for ep-match")
    e.add_argument("--model")
    e.add_argument("--y-model", help="model of the searched sequence for cross-waiting")
    e.add_argument("--length", type=int)
    e.add_argument("--sequence", help="sequence file (plain or FASTA), '-' for stdin")
    e.add_argument("--y-sequence")
    e.add_argument("--alphabet")
    e.add_argument("--fold-case", action="store_true")
    e.add_argument("--window-policy", choices=("first-half", "prefix"), default="first-half")
    e.add_argument("--involution", default="id")
    e.add_argument("--realizations", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--bits", action="store_true", help="add columns in bits")
    e.add_argument("--threads", type=int, default=1)
    common(e)

    o = sub.add_parser("oracle", help="analytic quantities of a model file")
    o.add_argument("--model", required=True)
    o.add_argument("--involution", default="id")
    common(o)

    d = sub.add_parser("dna", help="entropy production of FASTA records under id and reverse complement")
    d.add_argument("--fasta", required=True)
    d.add_argument("--grid", help="window sizes m (default: decades 10^2..10^8 capped by data)")
    d.add_argument("--realizations", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--involution", action="append", help="id, chargaff or pairs; repeatable")
    d.add_argument("--gap-policy", choices=("split", "error"), default="split")
    d.add_argument("--record", help="restrict to one record id")
    d.add_argument("--bits", action="store_true")
    d.add_argument("--threads", type=int, default=1)
    common(d)

    r = sub.add_parser("replay", help="rerun the configuration recorded in an output file")
    r.add_argument("file")
    r.add_argument("--threads", type=int, default=1)
    common(r, fmt=False)
    return p


def _config_from_output(path: str) -> dict:
    text = _read_text(path)
    if text.lstrip().startswith("{"):
        return json.loads(text)["config"]
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
        if line.startswith(">simulated "):
            return json.loads(line[len(">simulated "):])
    raise UsageError(f"{path}: no recorded configuration found")


def run(cfg: dict, out, threads: int = 1) -> int:
    command = cfg["command"]
    if command == "simulate":
        return cmd_simulate(cfg, out)
    if command == "estimate":
        return cmd_estimate(cfg, out, threads)
    if command == "oracle":
        return cmd_oracle(cfg, out)
    if command == "dna":
        return cmd_dna(cfg, out, threads)
    raise UsageError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_output(args.file) if args.command == "replay" else _config(args)
        buf = io.StringIO()
        code = run(cfg, buf, getattr(args, "threads", 1))
        out, close = _open_output(args.output)
        try:
            out.write(buf.getvalue())
        finally:
            if close:
                out.close()
        return code
    except (FastaError, ModelError, AlphabetError, EncodingError, UsageError, ValueError, KeyError) as exc:
        print(f"eprec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"eprec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
