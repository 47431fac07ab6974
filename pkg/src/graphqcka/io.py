"""File formats: graphs, counts files, run configuration, and reports.

All user-facing vertex labels are 1-based (internal representation is
0-based).  Numeric report fields are serialized with 12 significant digits
so that reruns produce byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .graphstate import Graph
from .keyrates import KeyRateReport, RoundBatch
from .noise import NoiseModel
from .routing import RoundSetting
from . import __version__


class ParseError(ValueError):
    """Malformed input file; message includes the offending line number."""


def _content_lines(path: Path) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def parse_graph(path: str | Path) -> Graph:
    """Plain-text graph: first line n, then 1-based `u v` edge lines."""
    path = Path(path)
    lines = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty graph file")
    lineno, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected vertex count, got {head!r}") from None
    edges = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-integer label in {line!r}") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"{path}:{lineno}: label out of range 1..{n}")
        if u == v:
            raise ParseError(f"{path}:{lineno}: self-loop {u}")
        if (u - 1, v - 1) in edges or (v - 1, u - 1) in edges:
            raise ParseError(f"{path}:{lineno}: duplicate edge {u} {v}")
        edges.append((u - 1, v - 1))
    return Graph.from_edges(n, edges)


def serialize_graph(graph: Graph) -> str:
    lines = [str(graph.n)]
    lines.extend(f"{u + 1} {v + 1}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def write_counts(path: str | Path, batch: RoundBatch, network_size: int,
                 seed: int | None = None, rounds: int | None = None) -> None:
    """Counts file: a setting header, participant labels, then outcome rows."""
    lines = []
    if seed is not None:
        lines.append(f"# seed {seed} rounds {rounds}")
    basis = batch.setting.basis_string(range(network_size))
    lines.append(f"setting {batch.setting.round_type} {basis}")
    lines.append("participants " + " ".join(str(v + 1) for v in batch.participants))
    for key in sorted(batch.counts):
        lines.append(f"{key} {batch.counts[key]}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_counts(path: str | Path) -> RoundBatch:
    path = Path(path)
    lines = _content_lines(path)
    round_type = basis = None
    participants = None
    counts: dict[str, int] = {}
    for lineno, line in lines:
        parts = line.split()
        if parts[0] == "setting":
            if len(parts) != 3 or parts[1] not in ("type-1", "type-2"):
                raise ParseError(f"{path}:{lineno}: bad setting header {line!r}")
            round_type, basis = parts[1], parts[2]
            if set(basis) - set("XYZ"):
                raise ParseError(f"{path}:{lineno}: basis letters must be X/Y/Z")
        elif parts[0] == "participants":
            try:
                participants = tuple(int(p) - 1 for p in parts[1:])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: bad participant labels") from None
        else:
            if round_type is None or participants is None:
                raise ParseError(f"{path}:{lineno}: counts before headers")
            if len(parts) != 2 or set(parts[0]) - set("01"):
                raise ParseError(f"{path}:{lineno}: expected 'bitstring count'")
            if len(parts[0]) != len(participants):
                raise ParseError(f"{path}:{lineno}: bitstring length "
                                 f"{len(parts[0])} != {len(participants)} participants")
            if parts[0] in counts:
                raise ParseError(f"{path}:{lineno}: duplicate outcome {parts[0]}")
            try:
                c = int(parts[1])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer count") from None
            if c < 0:
                raise ParseError(f"{path}:{lineno}: negative count")
            counts[parts[0]] = c
    if round_type is None or participants is None:
        raise ParseError(f"{path}: missing setting/participants headers")
    setting = RoundSetting(round_type,
                           {i: b for i, b in enumerate(basis)},
                           {i: 1 for i in range(len(basis))})
    return RoundBatch(setting, participants, counts)


@dataclass
class RunConfig:
    """Run description mirroring the CLI flags, loadable from JSON."""

    graph: str
    alice: int | None = None
    bobs: tuple[int, ...] = ()
    protocol: str = "both"
    rounds: int = 10000
    type2_fraction: float = 0.5
    seed: int | None = None
    out: str = "."
    mc_samples: int = 1000
    noise: dict = field(default_factory=dict)
    sweep_powers: tuple[float, float, int] = (5.0, 200.0, 40)

    def __post_init__(self):
        if self.protocol not in ("nqkd", "2qkd", "both"):
            raise ValueError(f"unknown protocol {self.protocol!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        cfg = cls(**data)
        cfg.bobs = tuple(cfg.bobs)
        cfg.sweep_powers = tuple(cfg.sweep_powers)
        return cfg

    def participants(self) -> tuple[int, ...]:
        """0-based sorted participant labels."""
        if self.alice is None or not self.bobs:
            raise ValueError("config must set alice and bobs")
        return tuple(sorted([self.alice - 1] + [b - 1 for b in self.bobs]))

    def noise_model(self) -> NoiseModel:
        kw = dict(self.noise)
        for ch in ("depolarizing", "dephasing", "bit_flip"):
            if ch in kw:
                kw[ch] = {int(k) - 1: float(v) for k, v in kw[ch].items()}
        return NoiseModel(**kw)


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _round12(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    return value


def report_to_json(report: KeyRateReport, input_hashes: Mapping[str, str],
                   config_echo: Mapping | None = None) -> str:
    """Serialize a report with provenance; floats kept to 12 significant digits."""
    payload = {
        "tool_version": __version__,
        "input_hashes": dict(sorted(input_hashes.items())),
        "config": config_echo or {},
        "akr_n": report.akr_n,
        "secure_akr_n": report.secure_akr_n,
        "qber": report.qber,
        "qx": report.qx,
        "alice_choice": None if report.alice_choice is None
        else report.alice_choice + 1,
        "pairwise_rates": report.pairwise_rates,
        "akr_2": report.akr_2,
        "secure_akr_2": report.secure_akr_2,
        "ratio": report.ratio,
        "copies_per_bit": report.copies_per_bit,
        "uncertainties": report.uncertainties,
    }
    return json.dumps(_round12(payload), indent=2, sort_keys=True) + "\n"
