"""Fixed-format MPS export with stable row and column names.

Binary columns are wrapped in INTORG/INTEND markers and given explicit
[0, 1] bounds; the objective sense is the MPS default (minimize). Values
are written with repr-precision so a round-trip preserves the model.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .model import MilpModel


def export_mps(model: MilpModel, path: str | Path, name: str = "NTNOPT") -> None:
    if model.n_cols == 0 or (model.A_eq.shape[0] + model.A_ub.shape[0]) == 0:
        raise ValueError("refusing to export an empty model")
    path = Path(path)

    lines: list[str] = [f"NAME          {name}", "ROWS", " N  COST"]
    for rname in model.eq_names:
        lines.append(f" E  {rname}")
    for rname in model.ub_names:
        lines.append(f" L  {rname}")

    # Per-column nonzeros: objective first, then rows in declaration order.
    eq_csc = sp.csc_matrix(model.A_eq)
    ub_csc = sp.csc_matrix(model.A_ub)

    def fmt(v: float) -> str:
        return repr(float(v))

    def entry(col_name: str, row_name: str, value: float) -> str:
        return f"    {col_name:<10}  {row_name:<10}  {fmt(value)}"

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j, cname in enumerate(model.col_names):
        is_int = bool(model.integer_mask[j])
        if is_int and not in_int:
            lines.append(f"    MARKER{marker:<4}  'MARKER'                 'INTORG'")
            marker += 1
            in_int = True
        elif not is_int and in_int:
            lines.append(f"    MARKER{marker:<4}  'MARKER'                 'INTEND'")
            marker += 1
            in_int = False
        if model.c[j] != 0.0:
            lines.append(entry(cname, "COST", model.c[j]))
        sl = slice(eq_csc.indptr[j], eq_csc.indptr[j + 1])
        for r, val in zip(eq_csc.indices[sl], eq_csc.data[sl]):
            lines.append(entry(cname, model.eq_names[r], val))
        sl = slice(ub_csc.indptr[j], ub_csc.indptr[j + 1])
        for r, val in zip(ub_csc.indices[sl], ub_csc.data[sl]):
            lines.append(entry(cname, model.ub_names[r], val))
    if in_int:
        lines.append(f"    MARKER{marker:<4}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    for rname, b in zip(model.eq_names, model.b_eq):
        if b != 0.0:
            lines.append(entry("RHS1", rname, b))
    for rname, b in zip(model.ub_names, model.b_ub):
        if b != 0.0:
            lines.append(entry("RHS1", rname, b))

    lines.append("BOUNDS")
    for j, cname in enumerate(model.col_names):
        lo, hi = float(model.lb[j]), float(model.ub[j])
        if lo != 0.0:
            lines.append(f" LO {'BND1':<10}  {cname:<10}  {fmt(lo)}")
        if np.isfinite(hi):
            lines.append(f" UP {'BND1':<10}  {cname:<10}  {fmt(hi)}")
    lines.append("ENDATA")

    path.write_text("\n".join(lines) + "\n")
