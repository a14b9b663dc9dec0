"""Regenerate the golden outputs in tests/data.

Run from anywhere; commands execute inside the bundled data directory so
that recorded paths in the config headers are relative.
"""

import contextlib
import io
import os
from pathlib import Path

from eprec import data_path
from eprec.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "data"

RUNS = {
    "dna_synthetic.csv": ["dna", "--fasta", "synthetic.fa", "--grid", "100,1000,10000",
                          "--realizations", "100", "--seed", "1"],
    "simulate_cycle3.fa": ["simulate", "--model", "cycle3.mk", "--length", "200", "--seed", "7"],
    "oracle_cycle3.csv": ["oracle", "--model", "cycle3.mk"],
}


def render(argv) -> str:
    here = os.getcwd()
    os.chdir(Path(data_path("synthetic.fa")).parent)
    try:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        if code != 0:
            raise SystemExit(f"{argv}: exit {code}")
        return buf.getvalue()
    finally:
        os.chdir(here)


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in RUNS.items():
        (GOLDEN / name).write_text(render(argv), encoding="ascii", newline="\n")
        print("wrote", GOLDEN / name)
