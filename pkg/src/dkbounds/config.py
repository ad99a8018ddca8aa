"""Run configuration for the command-line front end."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Union

from .divisor import DEFAULT_MEMORY_BUDGET, LambdaTable, sieve_bytes
from .engine import MethodParams
from .errors import ConfigError, DkBoundsError


@dataclass(frozen=True)
class RowSpec:
    id: str
    table: str
    params: MethodParams
    x1: Optional[str] = None  # override of the computed floor


@dataclass(frozen=True)
class Table1Selection:
    k: int
    j: int
    row: str


@dataclass
class RunConfig:
    precision: int = 128
    sieve_limit: int = 5_000_000
    lambda_path: Optional[str] = None
    rows: List[RowSpec] = field(default_factory=list)
    table1: List[Table1Selection] = field(default_factory=list)
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"unknown output format {self.format!r}")
        if not 53 <= self.precision <= 4096:
            raise ConfigError("precision must be within 53..4096 bits")
        if self.sieve_limit < 1 or sieve_bytes(self.sieve_limit) > DEFAULT_MEMORY_BUDGET:
            raise ConfigError(f"sieve limit {self.sieve_limit} exceeds the memory cap")
        ids = [r.id for r in self.rows]
        if len(set(ids)) != len(ids):
            raise ConfigError("row ids must be unique")
        known = set(ids)
        for s in self.table1:
            if s.row not in known:
                raise ConfigError(f"table1 selection refers to unknown row {s.row!r}")

    def row(self, rid: str) -> RowSpec:
        for r in self.rows:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def lambda_table(self) -> LambdaTable:
        return LambdaTable.load(self.lambda_path)

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        lam_path = data.get("lambda_path")
        lam = LambdaTable.load(lam_path)
        rows = []
        for i, rec in enumerate(data.get("rows", [])):
            rec = dict(rec)
            rid = str(rec.get("id", f"row-{i + 1:02d}"))
            if "lambda" not in rec and int(rec["k"]) in lam:
                rec["lambda"] = lam.text(int(rec["k"]))
            try:
                params = MethodParams.from_record(rec)
            except (DkBoundsError, KeyError, ValueError, TypeError) as exc:
                # every row is validated before any computation starts
                raise ConfigError(f"row {rid}: {exc}") from exc
            rows.append(RowSpec(rid, str(rec.get("table", "")), params, rec.get("x1")))
        sel = [Table1Selection(int(s["k"]), int(s["j"]), str(s["row"])) for s in data.get("table1", [])]
        known = {"precision", "sieve_limit", "lambda_path", "rows", "table1", "format", "workers"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
        return cls(
            precision=int(data.get("precision", 128)),
            sieve_limit=int(data.get("sieve_limit", 5_000_000)),
            lambda_path=lam_path,
            rows=rows,
            table1=sel,
            format=str(data.get("format", "csv")),
            workers=int(data.get("workers", 1)),
        )

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "RunConfig":
        """JSON configuration; the bundled default reproduces every table row."""
        if path is None:
            text = resources.files("dkbounds.data").joinpath("default_config.json").read_text()
            source = "default_config.json"
        else:
            p = Path(path)
            if not p.exists():
                raise ConfigError(f"configuration file {p} not found")
            text, source = p.read_text(), str(p)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be an object")
        return cls.from_dict(data)


def load_data_json(name: str, path: Optional[Union[str, Path]] = None) -> Dict:
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"reference data file {p} not found")
        return json.loads(p.read_text())
    try:
        return json.loads(resources.files("dkbounds.data").joinpath(name).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"bundled reference data {name} is missing") from exc
