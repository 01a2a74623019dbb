"""Tabulated complex optical constants and their interpolation.

Materials come either from dispersion tables (CSV files with header
``wavelength_nm,n,k``; the file name minus extension is the material
identifier) or from a constant complex index. Tables are interpolated
linearly and never extrapolated: a lookup outside the tabulated range is
a hard error, because silently extrapolated metal constants produce
plausible-looking nonsense.

Bundled tables for the stock sensor materials live in ``sprsim/data``;
see the README there for provenance.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MATERIALS_ENV_VAR = "SPRSIM_MATERIALS"


class MaterialError(ValueError):
    """Malformed dispersion data or an out-of-range wavelength lookup."""


def bundled_data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


@dataclass(frozen=True)
class DispersionTable:
    """Rows of (wavelength, n, k), strictly increasing in wavelength.

    Row numbers in error messages are 1-based data rows, matching the CSV
    files after their header line.
    """

    name: str
    wavelengths_nm: tuple[float, ...]
    n: tuple[float, ...]
    k: tuple[float, ...]

    def __post_init__(self):
        rows = len(self.wavelengths_nm)
        if rows == 0:
            raise MaterialError(f"{self.name}: table needs at least one row")
        if not (len(self.n) == len(self.k) == rows):
            raise MaterialError(f"{self.name}: column lengths differ")
        for i in range(rows):
            w, n, k = self.wavelengths_nm[i], self.n[i], self.k[i]
            if not (math.isfinite(w) and math.isfinite(n) and math.isfinite(k)):
                raise MaterialError(f"{self.name}: row {i + 1}: non-finite value")
            if i > 0 and w <= self.wavelengths_nm[i - 1]:
                raise MaterialError(
                    f"{self.name}: row {i + 1}: wavelengths must be strictly increasing"
                )
            if not n > 0:
                raise MaterialError(f"{self.name}: row {i + 1}: n must be > 0")
            if k < 0:
                raise MaterialError(f"{self.name}: row {i + 1}: k must be >= 0")

    @property
    def wavelength_range(self) -> tuple[float, float]:
        return self.wavelengths_nm[0], self.wavelengths_nm[-1]


@dataclass(frozen=True)
class Material:
    """Named source of a complex refractive index n + ik versus wavelength.

    Exactly one of ``table`` or ``n_const`` is set. Constant-index
    materials report the same value at every wavelength.
    """

    name: str
    table: DispersionTable | None = None
    n_const: float | None = None
    k_const: float = 0.0

    def __post_init__(self):
        if (self.table is None) == (self.n_const is None):
            raise MaterialError(f"{self.name}: need a table or a constant index, not both")
        if self.n_const is not None:
            if not (math.isfinite(self.n_const) and self.n_const > 0):
                raise MaterialError(f"{self.name}: constant n must be finite and > 0")
            if not (math.isfinite(self.k_const) and self.k_const >= 0):
                raise MaterialError(f"{self.name}: constant k must be finite and >= 0")

    @classmethod
    def constant(cls, name: str, n: float, k: float = 0.0) -> "Material":
        return cls(name=name, n_const=float(n), k_const=float(k))

    @classmethod
    def from_table(cls, table: DispersionTable) -> "Material":
        return cls(name=table.name, table=table)


def refractive_index_at(material: Material, wavelength_nm: float) -> complex:
    """Complex index n + ik at ``wavelength_nm``.

    Tables are interpolated linearly in n and k independently, exact at
    the nodes. Raises :class:`MaterialError` outside the table range.
    """
    if material.n_const is not None:
        return complex(material.n_const, material.k_const)
    table = material.table
    w = table.wavelengths_nm
    if not w[0] <= wavelength_nm <= w[-1]:
        raise MaterialError(
            f"{material.name}: {wavelength_nm} nm outside table range "
            f"[{w[0]}, {w[-1]}] nm"
        )
    n = float(np.interp(wavelength_nm, w, table.n))
    k = float(np.interp(wavelength_nm, w, table.k))
    return complex(n, k)


def permittivity_at(material: Material, wavelength_nm: float) -> complex:
    """Relative permittivity eps = (n + ik)**2 at ``wavelength_nm``."""
    index = refractive_index_at(material, wavelength_nm)
    return index * index


_CSV_HEADER = ["wavelength_nm", "n", "k"]


def load_material_table(document: str, name: str) -> Material:
    """Parse CSV text into a table-backed :class:`Material`.

    Errors carry the 1-based data-row number (the header is row 0 and is
    required verbatim).
    """
    reader = csv.reader(io.StringIO(document))
    try:
        header = next(reader)
    except StopIteration:
        raise MaterialError(f"{name}: empty document") from None
    if [h.strip() for h in header] != _CSV_HEADER:
        raise MaterialError(f"{name}: header must be 'wavelength_nm,n,k'")
    wavelengths, ns, ks = [], [], []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != 3:
            raise MaterialError(f"{name}: row {row_no}: expected 3 fields, got {len(row)}")
        try:
            w, n, k = (float(field) for field in row)
        except ValueError:
            raise MaterialError(f"{name}: row {row_no}: non-numeric field") from None
        wavelengths.append(w)
        ns.append(n)
        ks.append(k)
    table = DispersionTable(
        name=name, wavelengths_nm=tuple(wavelengths), n=tuple(ns), k=tuple(ks)
    )
    return Material.from_table(table)


def load_material_file(path: str | Path) -> Material:
    """Load a material from a CSV file; the stem is the identifier."""
    p = Path(path)
    return load_material_table(p.read_text(encoding="utf-8"), name=p.stem)


def resolve_materials_dir(override: str | Path | None = None) -> Path:
    """Materials directory: explicit override, else $SPRSIM_MATERIALS, else bundled."""
    if override is not None:
        return Path(override)
    env = os.environ.get(MATERIALS_ENV_VAR)
    if env:
        return Path(env)
    return bundled_data_dir()


def find_material(identifier: str, directory: str | Path | None = None) -> Material:
    """Resolve ``identifier`` to ``<dir>/<identifier>.csv`` and load it."""
    path = resolve_materials_dir(directory) / f"{identifier}.csv"
    if not path.is_file():
        raise MaterialError(f"unknown material '{identifier}' (no file {path})")
    return load_material_file(path)
