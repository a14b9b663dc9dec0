"""Universal recurrence-time estimators of entropy, cross entropy and entropy production."""

from importlib import resources

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BINARY,
    DNA,
    AlphabetError,
    EncodingError,
    FiniteAlphabet,
    Involution,
    SymbolSequence,
    encode_text,
    parse_involution,
    reverse_word,
)
from .matching import (  # noqa: E402
    DataExhaustedError,
    ScanResult,
    match_curve,
    match_length,
    recurrence_time,
    recurrence_time_overlapping,
    reversed_match_length,
    reversed_recurrence_time,
    waiting_time,
)


def data_path(name: str) -> str:
    """Filesystem path of a bundled data file (model files, synthetic FASTA)."""
    return str(resources.files(__package__).joinpath("data", name))
