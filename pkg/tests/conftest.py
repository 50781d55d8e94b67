import gzip
from functools import lru_cache
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
MOSES_SAMPLE = DATA / "moses_sample.smi.gz"

BARICITINIB_SCAFFOLD = "[*]N1CC([*])(n2cc(-c3ncnc4[nH]ccc34)cn2)C1"
BARICITINIB_FRAGMENTS = ("[*]C1(CC#N)CN(S(=O)(=O)CC)C1", "[*]c1ncnc2[nH]ccc12")
CYCLOTHIAZIDE_FRAGMENTS = ("[*]C1CC2C=CC1C2", "[*]C1Nc2cc(Cl)c(S(N)(=O)=O)cc2S(=O)(=O)N1")


@lru_cache(maxsize=None)
def moses_smiles(n: int | None = None) -> tuple[str, ...]:
    """First ``n`` lines of the vendored MOSES sample (seeded draw from the training split)."""
    out = []
    with gzip.open(MOSES_SAMPLE, "rt") as fh:
        for line in fh:
            if n is not None and len(out) >= n:
                break
            out.append(line.split()[0])
    return tuple(out)


@pytest.fixture(scope="session")
def moses_1k():
    return moses_smiles(1000)
