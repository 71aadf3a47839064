"""Shared diagnostic record for file loaders and ingest."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """One loader/ingest finding, tied to a source line where applicable.

    severity is "warning" (row accepted or skipped without aborting) or
    "error" (the offending row or collection was not committed).
    """

    line: int | None
    severity: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.severity}: {self.message}"


def errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


def warnings(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "warning"]
