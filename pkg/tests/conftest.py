import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from stressid.corpus import synthetic_split, write_corpus  # noqa: E402


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    """Train/validation/test CSVs drawn from one synthetic distribution."""
    root = tmp_path_factory.mktemp("synth")
    sizes = {"train": (400, 11), "validation": (120, 12), "test": (100, 13)}
    for split, (n, seed) in sizes.items():
        write_corpus(synthetic_split(n, noise_rate=0.05, seed=seed, split_name=split), root / f"{split}.csv")
    return root


def write_csv(path, rows, header=("text", "label")):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
