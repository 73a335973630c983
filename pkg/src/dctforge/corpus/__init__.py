"""Bundled benchmark circuits (versioned under v1/).

ima.snl            control FSM of an ADPCM-style encoder: six used states,
                   two unused ones folded to idle by the default arm.
ima_trojan.snl     the same FSM with a trigger watching the 6->0 and 7->0
                   edges and a stuck-at-1 payload on outValid.
ima_trojan_NN.snl  twelve single-edge trigger variants (sources 6 and 7,
                   destinations 0..5; the needed edge is added as an
                   explicit case arm when the default arm does not already
                   provide it).
counter.snl        fully specified 3-bit counter with enable; no
                   unreachable states.
ima_gate.blif      hand bit-blasted gate-level version of ima.snl.
"""

from __future__ import annotations

from pathlib import Path

from ..blif import parse_blif
from ..circuit import Circuit
from ..rtl import parse_rtl

__all__ = ["corpus_dir", "corpus_path", "corpus_names", "load"]

_V1 = Path(__file__).resolve().parent / "v1"


def corpus_dir() -> Path:
    return _V1


def corpus_path(name: str) -> Path:
    p = _V1 / name
    if not p.exists():
        raise FileNotFoundError(f"no corpus file named {name!r}")
    return p


def corpus_names() -> list[str]:
    return sorted(p.name for p in _V1.iterdir()
                  if p.suffix in (".snl", ".blif"))


def load(name: str) -> Circuit:
    path = corpus_path(name)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".blif":
        return parse_blif(text)
    return parse_rtl(text)
