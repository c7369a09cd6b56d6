"""Posterior tables as CSV with header ``t,p1,...,pn``."""
import csv

import numpy as np

__all__ = ["write_posterior_csv", "read_posterior_csv", "format_float"]


def format_float(x) -> str:
    return f"{float(x):.17g}"


def write_posterior_csv(path, times, probs):
    probs = np.asarray(probs)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"p{i + 1}" for i in range(probs.shape[1])])
        for t, row in zip(times, probs):
            w.writerow([format_float(t)] + [format_float(x) for x in row])


def read_posterior_csv(path):
    """Return ``(times, probs)`` from a file written by :func:`write_posterior_csv`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]
