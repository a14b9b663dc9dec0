"""Regenerate the bundled synthetic FASTA (src/eprec/data/synthetic.fa).

100 000 raw characters sampled from the reverse-complement-symmetric chain
in chargaff4.mk, with an assembly-style N run, IUPAC codes, and a
soft-masked (lowercase) stretch.
"""

import sys

from eprec import data_path
from eprec.genomics import write_fasta
from eprec.models import load_model, sample

SEED = 20240101
LENGTH = 100_000


def build() -> str:
    model = load_model(data_path("chargaff4.mk"))
    chars = list(sample(model, LENGTH, SEED).to_text())
    chars[40_000:41_000] = "N" * 1_000
    chars[70_000] = "R"
    chars[70_001] = "Y"
    chars[85_000:85_050] = "n" * 50
    chars[10_000:12_000] = [c.lower() for c in chars[10_000:12_000]]
    return "".join(chars)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else data_path("synthetic.fa")
    with open(out, "w", encoding="ascii", newline="\n") as fh:
        write_fasta(fh, "synthetic chargaff4 seed=%d" % SEED, build(), width=60)
