import io
import math
import random

import numpy as np
import pytest

from eprec import data_path
from eprec.core import DNA, decode, encode_text, reverse_word
from eprec.genomics import (
    FastaError,
    Segment,
    _choose_window,
    chargaff_experiment,
    chargaff_involution,
    default_m_grid,
    parse_fasta,
    parse_fasta_bytes,
    reverse_complement_text,
    write_fasta,
)
from eprec.models import sample


class TestParsing:
    def test_bundled_segments(self):
        # N run at 40001-41000, IUPAC R/Y at 70001-70002, masked n run at 85001-85050
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        assert rec.id == "synthetic"
        assert rec.length == 100000
        assert rec.segment_table() == [(1, 40000), (41001, 29000), (70003, 14998), (85051, 14950)]
        assert rec.valid_length == 100000 - 1000 - 2 - 50

    def test_soft_masking_folded(self):
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        raw = open(data_path("synthetic.fa")).read().split("\n", 1)[1].replace("\n", "")
        assert raw[10000:12000].islower()
        assert decode(rec.segments[0].seq)[10000:12000] == raw[10000:12000].upper()

    def test_multi_record_and_crlf(self):
        recs = parse_fasta_bytes(b">a first\r\nACGT\r\nAC\r\n>b\r\nNNGG\r\n")
        assert [r.id for r in recs] == ["a", "b"]
        assert recs[0].description == "first"
        assert recs[0].segment_table() == [(1, 6)]
        assert recs[1].segment_table() == [(3, 2)]

    def test_all_gaps(self):
        (rec,) = parse_fasta_bytes(b">g\nNNNN\n")
        assert rec.segments == () and default_m_grid(rec) == [100]

    @pytest.mark.parametrize("data, line", [
        (b">\nACGT\n", 1),
        (b"ACGT\n>a\nAC\n", 1),
        (b">a\n>b\nAC\n", 1),
    ])
    def test_malformed(self, data, line):
        with pytest.raises(FastaError) as info:
            parse_fasta_bytes(data)
        assert info.value.line == line

    def test_empty_input(self):
        with pytest.raises(FastaError):
            parse_fasta_bytes(b"\n\n")

    def test_gap_policy_error(self):
        with pytest.raises(FastaError, match="line 3") as info:
            parse_fasta_bytes(b">a\nACGT\nACNT\n", gap_policy="error")
        assert info.value.line == 3
        with pytest.raises(ValueError):
            parse_fasta_bytes(b">a\nA\n", gap_policy="skip")

    def test_write_roundtrip(self):
        buf = io.StringIO()
        write_fasta(buf, "r1", "ACGT" * 50, width=60)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ">r1" and max(map(len, lines[1:])) == 60
        (rec,) = parse_fasta_bytes(buf.getvalue().encode())
        assert decode(rec.segments[0].seq) == "ACGT" * 50


class TestReverseComplement:
    def test_against_table(self):
        rng = random.Random(3)
        theta = chargaff_involution()
        for _ in range(200):
            s = "".join(rng.choice("ACGT") for _ in range(rng.randint(0, 60)))
            assert decode(reverse_word(encode_text(s, DNA), theta)) == reverse_complement_text(s)


class TestWindows:
    def _segments(self, text):
        (rec,) = parse_fasta_bytes(b">t\n" + text.encode() + b"\n")
        return rec.segments

    def test_windows_never_cross_gaps(self):
        # adversarial gap placement: segments of assorted lengths with gaps between
        rng = np.random.default_rng(9)
        parts = ["".join(rng.choice(list("ACGT"), size=int(n))) for n in (5, 400, 37, 250, 1000, 3)]
        text = "N".join(parts[:3]) + "NNRY" + "N".join(parts[3:])
        segs = self._segments(text)
        m = 100
        for u in np.linspace(0, 1, 501, endpoint=False):
            w = _choose_window(segs, m, float(u))
            # the window is a suffix of one viable segment starting in its first half
            host = [s for s in segs if s.length >= 2 * m and decode(s.seq).endswith(decode(w))]
            assert host
            assert w.length >= m
            assert host[0].length - w.length < (host[0].length + 1) // 2

    def test_no_viable_segment(self):
        segs = self._segments("ACGTACGT" + "N" + "ACGT")
        assert _choose_window(segs, 5, 0.3) is None

    def test_uniform_over_first_halves(self):
        segs = (Segment(1, encode_text("A" * 10, DNA)), Segment(20, encode_text("C" * 30, DNA)))
        picks = [_choose_window(segs, 4, (i + 0.5) / 20) for i in range(20)]
        # 5 starts in the first segment's half, 15 in the second's
        assert sum(decode(p).startswith("A") for p in picks) == 5


class TestExperiment:
    def test_chargaff_symmetry_detected(self, chargaff4):
        x = sample(chargaff4, 300000, 5)
        (rec,) = parse_fasta_bytes(b">s\n" + x.to_text().encode() + b"\n")
        res = chargaff_experiment(rec, [1000], 60, 3)
        ch, ident = res["chargaff"].row(1000), res["id"].row(1000)
        assert abs(ch.mean) <= 3 * ch.sem
        assert ident.mean > 3 * ident.sem
        assert res["id"].extra == {"theta": "id", "record_id": "s"}

    def test_deterministic_across_workers(self):
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        a = chargaff_experiment(rec, [100, 1000], 20, 11)
        b = chargaff_experiment(rec, [100, 1000], 20, 11, workers=4)
        assert all(a[k].records() == b[k].records() for k in a)

    def test_oversized_window_flagged(self):
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        res = chargaff_experiment(rec, [30000], 5, 0)
        assert res["id"].row(30000).flagged and math.isnan(res["id"].row(30000).mean)

    def test_default_grid(self):
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        assert default_m_grid(rec) == [100, 1000, 10000]

    def test_bad_grid(self):
        (rec,) = parse_fasta(data_path("synthetic.fa"))
        with pytest.raises(ValueError):
            chargaff_experiment(rec, [1], 2, 0)
