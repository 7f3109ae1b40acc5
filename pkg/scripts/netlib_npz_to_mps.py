#!/usr/bin/env python3
"""Convert NETLIB instances stored as linprog-style npz archives to MPS.

Each archive holds c, A_ub, b_ub, A_eq, b_eq, bounds (object array with None
for an infinite bound, empty for all-default [0, inf)), and obj (the known
optimal objective).  The output is free-format MPS with tab-separated fields
so coefficient values keep full repr precision and parse back bit-exact.

Rows are named R0001.., columns C0001..; inequality rows come first (sense
L), then equality rows (sense E).  The known objective is recorded in a
comment for downstream sanity checks.

Usage: netlib_npz_to_mps.py [--npz-dir DIR] [--out-dir DIR]
"""

import argparse
from pathlib import Path

import numpy as np


def _fmt(value: float) -> str:
    return repr(float(value))


def _expand_bounds(raw, n: int):
    if raw.size == 0:
        return np.zeros(n), np.full(n, np.inf)
    pairs = np.asarray(raw, dtype=object).reshape(-1, 2)
    lower = np.array([-np.inf if v is None else float(v) for v in pairs[:, 0]])
    upper = np.array([np.inf if v is None else float(v) for v in pairs[:, 1]])
    return lower, upper


def convert(npz_path: Path, out_path: Path) -> None:
    data = np.load(npz_path, allow_pickle=True)
    c = np.asarray(data["c"], dtype=float)
    A_ub = np.asarray(data["A_ub"], dtype=float)
    b_ub = np.asarray(data["b_ub"], dtype=float)
    A_eq = np.asarray(data["A_eq"], dtype=float)
    b_eq = np.asarray(data["b_eq"], dtype=float)
    lower, upper = _expand_bounds(data["bounds"], c.shape[0])
    n = c.shape[0]
    n_ub = A_ub.shape[0] if A_ub.size else 0
    n_eq = A_eq.shape[0] if A_eq.size else 0

    lines = []
    lines.append(f"* converted from {npz_path.name}")
    lines.append(f"* optimal objective: {_fmt(float(data['obj']))}")
    lines.append(f"NAME\t{npz_path.stem}")
    lines.append("ROWS")
    lines.append("\tN\tCOST")
    row_names = []
    for i in range(n_ub):
        name = f"R{i + 1:04d}"
        row_names.append(name)
        lines.append(f"\tL\t{name}")
    for i in range(n_eq):
        name = f"R{n_ub + i + 1:04d}"
        row_names.append(name)
        lines.append(f"\tE\t{name}")

    stacked = []
    rhs = []
    if n_ub:
        stacked.append(A_ub)
        rhs.append(b_ub)
    if n_eq:
        stacked.append(A_eq)
        rhs.append(b_eq)
    A = np.vstack(stacked) if stacked else np.zeros((0, n))
    b = np.concatenate(rhs) if rhs else np.zeros(0)

    lines.append("COLUMNS")
    for j in range(n):
        col = f"C{j + 1:04d}"
        if c[j] != 0.0:
            lines.append(f"\t{col}\tCOST\t{_fmt(c[j])}")
        for i in np.flatnonzero(A[:, j]):
            lines.append(f"\t{col}\t{row_names[i]}\t{_fmt(A[i, j])}")

    lines.append("RHS")
    for i in np.flatnonzero(b):
        lines.append(f"\tRHS\t{row_names[i]}\t{_fmt(b[i])}")

    bound_lines = []
    for j in range(n):
        col = f"C{j + 1:04d}"
        lo, up = lower[j], upper[j]
        if lo == 0.0 and np.isposinf(up):
            continue
        if lo == up:
            bound_lines.append(f"\tFX\tBND\t{col}\t{_fmt(lo)}")
            continue
        if np.isneginf(lo) and np.isposinf(up):
            bound_lines.append(f"\tFR\tBND\t{col}")
            continue
        if np.isneginf(lo):
            bound_lines.append(f"\tMI\tBND\t{col}")
        elif lo != 0.0:
            bound_lines.append(f"\tLO\tBND\t{col}\t{_fmt(lo)}")
        if np.isfinite(up):
            bound_lines.append(f"\tUP\tBND\t{col}\t{_fmt(up)}")
    if bound_lines:
        lines.append("BOUNDS")
        lines.extend(bound_lines)

    lines.append("ENDATA")
    out_path.write_text("\n".join(lines) + "\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--npz-dir", type=Path,
                        default=Path(__file__).resolve().parents[1]
                        / "instances" / "netlib_npz")
    parser.add_argument("--out-dir", type=Path,
                        default=Path(__file__).resolve().parents[1]
                        / "instances" / "netlib")
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for npz_path in sorted(args.npz_dir.glob("*.npz")):
        out = args.out_dir / (npz_path.stem.lower() + ".mps")
        convert(npz_path, out)
        print(f"{npz_path.name} -> {out}")


if __name__ == "__main__":
    main()
