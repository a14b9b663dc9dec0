"""FASTA ingestion and the reverse-complement entropy-production experiment."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import DNA, Involution, SymbolSequence
from .estimators import EnsembleStats, ep_estimate_match_length, realization_seed, summarize

GAP_POLICIES = ("split", "error")

_LUT = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate(b"ACGT"):
    _LUT[_c] = _i
    _LUT[_c + 32] = _i


class FastaError(ValueError):
    """Malformed FASTA input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Segment:
    start: int  # 1-based offset within the record's sequence characters
    seq: SymbolSequence

    @property
    def length(self) -> int:
        return self.seq.length

    @property
    def end(self) -> int:
        return self.start + self.seq.length - 1


@dataclass(frozen=True)
class FastaRecord:
    id: str  # first word of the header line
    segments: tuple[Segment, ...]
    length: int  # raw sequence characters, valid or not
    description: str = ""

    def segment_table(self) -> list[tuple[int, int]]:
        return [(s.start, s.length) for s in self.segments]

    @property
    def valid_length(self) -> int:
        return sum(s.length for s in self.segments)


def chargaff_involution() -> Involution:
    """C <-> G, A <-> T on the ACGT alphabet."""
    return Involution.from_pairs(DNA, [("C", "G"), ("A", "T")])


def _segments(codes: np.ndarray) -> tuple[Segment, ...]:
    valid = codes != 255
    if not valid.any():
        return ()
    edges = np.diff(np.concatenate(([False], valid, [False])).astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return tuple(Segment(int(s) + 1, SymbolSequence(DNA, codes[s:e])) for s, e in zip(starts, ends))


def _finish(header: str, header_line: int, chunks: list[bytes], chunk_lines: list[int],
            gap_policy: str) -> FastaRecord:
    rid, _, desc = header.partition(" ")
    raw = b"".join(chunks)
    if not raw:
        raise FastaError(f"record {header!r} has no sequence", header_line)
    codes = _LUT[np.frombuffer(raw, dtype=np.uint8)]
    if gap_policy == "error":
        bad = np.flatnonzero(codes == 255)
        if bad.size:
            pos = int(bad[0])
            bounds = np.cumsum([len(c) for c in chunks])
            which = int(np.searchsorted(bounds, pos, side="right"))
            raise FastaError(f"invalid base {chr(raw[pos])!r} in record {header!r}", chunk_lines[which])
    codes.flags.writeable = False
    return FastaRecord(rid, _segments(codes), len(raw), desc.strip())


def parse_fasta(path, gap_policy: str = "split") -> list[FastaRecord]:
    """Read a FASTA file into records of maximal ACGT segments.

    Bases are case-folded; any other character (N, IUPAC codes, gaps)
    ends a segment, or raises under ``gap_policy="error"``.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_fasta_bytes(data, gap_policy)


def parse_fasta_bytes(data: bytes, gap_policy: str = "split") -> list[FastaRecord]:
    if gap_policy not in GAP_POLICIES:
        raise ValueError(f"gap policy must be one of {GAP_POLICIES}")
    records: list[FastaRecord] = []
    header: Optional[str] = None
    header_line = 0
    chunks: list[bytes] = []
    chunk_lines: list[int] = []
    for lineno, line in enumerate(data.split(b"\n"), 1):
        line = line.rstrip(b"\r")
        if line.startswith(b">"):
            if header is not None:
                records.append(_finish(header, header_line, chunks, chunk_lines, gap_policy))
            name = line[1:].strip()
            if not name:
                raise FastaError("empty header", lineno)
            header = name.decode("utf-8", errors="replace")
            header_line = lineno
            chunks, chunk_lines = [], []
            continue
        body = line.strip()
        if not body:
            continue
        if header is None:
            raise FastaError("sequence data before the first '>' header", lineno)
        chunks.append(body)
        chunk_lines.append(lineno)
    if header is not None:
        records.append(_finish(header, header_line, chunks, chunk_lines, gap_policy))
    if not records:
        raise FastaError("no FASTA records found")
    return records


def write_fasta(fh, record_id: str, text: str, width: int = 80) -> None:
    fh.write(f">{record_id}\n")
    for i in range(0, len(text), width):
        fh.write(text[i : i + width] + "\n")


# ---------------------------------------------------------------------------
# Window experiment


def _choose_window(segments: Sequence[Segment], m: int, u: float) -> Optional[SymbolSequence]:
    # Viable segments hold at least 2m bases, so a start in their first half
    # leaves at least m bases ahead.  Starts are uniform over the union of
    # first halves.
    viable = [s for s in segments if s.length >= 2 * m]
    if not viable:
        return None
    halves = np.array([(s.length + 1) // 2 for s in viable], dtype=np.int64)
    pick = min(int(u * int(halves.sum())), int(halves.sum()) - 1)
    bounds = np.cumsum(halves)
    j = int(np.searchsorted(bounds, pick, side="right"))
    offset = pick - (int(bounds[j - 1]) if j else 0)
    return viable[j].seq.shift(offset)


def chargaff_experiment(
    record: FastaRecord,
    m_grid: Sequence[int],
    realizations: int,
    seed: int,
    thetas: Optional[Mapping[str, Involution]] = None,
    workers: int = 1,
) -> dict[str, EnsembleStats]:
    """Match-length entropy production on random windows of one record.

    Each realization draws, for every grid point, one window start shared
    by all involutions.  Windows never cross a segment boundary; a
    realization whose match lengths cannot be certified inside its segment
    is censored.
    """
    if thetas is None:
        thetas = {"id": Involution.identity(DNA), "chargaff": chargaff_involution()}
    grid = [int(m) for m in m_grid]
    if not grid or any(m < 2 for m in grid):
        raise ValueError("m grid must be nonempty with values >= 2")
    names = list(thetas)

    def job(i: int):
        rng = np.random.Generator(np.random.PCG64(realization_seed(seed, i)))
        u = rng.random(len(grid))
        out = []
        for j, m in enumerate(grid):
            x = _choose_window(record.segments, m, float(u[j]))
            if x is None:
                out.append([None] * len(names))
            else:
                out.append([ep_estimate_match_length(x, m, thetas[name]) for name in names])
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_real = list(pool.map(job, range(realizations)))
    else:
        per_real = [job(i) for i in range(realizations)]

    result = {}
    for t, name in enumerate(names):
        rows = tuple(
            summarize(m, "ep-match", [per_real[i][j][t] for i in range(realizations)])
            for j, m in enumerate(grid)
        )
        result[name] = EnsembleStats("ep-match", rows, realizations,
                                     extra={"theta": name, "record_id": record.id})
    return result


def default_m_grid(record: FastaRecord, lo_exp: int = 2, hi_exp: int = 8) -> list[int]:
    """Decades from 10^lo to 10^hi, capped by the longest segment."""
    longest = max((s.length for s in record.segments), default=0)
    grid = [10**e for e in range(lo_exp, hi_exp + 1) if 10**e <= longest]
    return grid or [10**lo_exp]


def reverse_complement_text(text: str) -> str:
    """Table-driven reverse complement of an ACGT string."""
    return text.translate(str.maketrans("ACGTacgt", "TGCAtgca"))[::-1]
