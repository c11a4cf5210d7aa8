import pytest

from homeseq.events import symbolize
from homeseq.fixtures import table_i_log


@pytest.fixture(scope="session")
def table_i_sequence():
    """Symbolized Table-I-shaped home: (symbols, timestamps, table)."""
    log = table_i_log()
    seq, table = symbolize(log)
    return seq, list(log.timestamps()), table
