"""Bundled example circuits, addressable by name from the CLI."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .circuits import Circuit, arithmetize, parse_circuit
from .errors import InputError
from .field import PrimeField

BUILTIN = ("and", "or", "five", "five_fn")


def circuit_text(name_or_path: str) -> str:
    if name_or_path in BUILTIN:
        return resources.files("artifact.data").joinpath(f"{name_or_path}.circ").read_text()
    path = Path(name_or_path)
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read circuit file {path}: {exc}") from exc


def load_circuit(name_or_path: str, field: PrimeField) -> tuple[Circuit, list[Circuit]]:
    """Parse a circuit and arithmetize it over ``field`` if it is Boolean."""
    phi, funcs = parse_circuit(circuit_text(name_or_path))
    if phi.flavor == "boolean":
        phi = arithmetize(phi, field)
        funcs = [arithmetize(f, field) if f.flavor == "boolean" else f for f in funcs]
    return phi, funcs
