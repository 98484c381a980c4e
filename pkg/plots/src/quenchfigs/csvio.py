"""Reader for the simulator's commented CSV files."""

import numpy as np


class MissingColumn(Exception):
    pass


class EmptyData(Exception):
    pass


class Table:
    """Column-addressable CSV contents plus the header metadata block."""

    def __init__(self, columns, data, meta):
        self.columns = list(columns)
        self.data = data
        self.meta = meta

    def __len__(self):
        return self.data.shape[0]

    def col(self, name):
        if name not in self.columns:
            raise MissingColumn(f"column {name!r} not in {self.columns[:6]}...")
        return self.data[:, self.columns.index(name)]

    def cols_matching(self, prefix):
        names = [c for c in self.columns if c.startswith(prefix)]
        if not names:
            raise MissingColumn(f"no columns with prefix {prefix!r}")
        idx = [self.columns.index(c) for c in names]
        return names, self.data[:, idx]


def read_csv(path):
    """Parse a simulator CSV: '#'-comment metadata, header row, float body."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if ":" in line:
                    key, value = line[1:].split(":", 1)
                    meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    if header is None or not rows:
        raise EmptyData(f"{path} holds no data rows")
    return Table(header, np.array(rows), meta)
