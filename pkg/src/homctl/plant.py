"""Switched plant data model, JSON ingestion and disturbance evaluation.

Plant files are JSON documents::

    {
      "n": 4, "m": 2, "p": 2,
      "modes": [
        {"A": [[...], ...], "B": [[...], ...], "E": [[...], ...]},
        ...
      ]
    }

Mode indices are 1-based everywhere a mode index crosses a file or API
boundary, matching the usual Sigma = {1, ..., N} convention.  "E" may be
omitted per mode, in which case E defaults to B (matched disturbances).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import kalman_controllable


class PlantError(ValueError):
    """Raised for malformed or invalid plant descriptions."""


@dataclass(frozen=True)
class Mode:
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray


@dataclass(frozen=True)
class SwitchedPlant:
    """A family of controllable linear modes (A_i, B_i, E_i), i = 1..N."""

    n: int
    m: int
    p: int
    modes: tuple[Mode, ...]

    @property
    def N(self) -> int:
        return len(self.modes)

    def mode(self, sigma: int) -> Mode:
        """Mode by 1-based index."""
        if not 1 <= sigma <= self.N:
            raise PlantError(f"mode index {sigma} out of range 1..{self.N}")
        return self.modes[sigma - 1]

    def A(self, sigma: int) -> np.ndarray:
        return self.mode(sigma).A

    def B(self, sigma: int) -> np.ndarray:
        return self.mode(sigma).B

    def E(self, sigma: int) -> np.ndarray:
        return self.mode(sigma).E


def make_plant(modes: list[tuple], n=None, m=None, p=None) -> SwitchedPlant:
    """Build and validate a SwitchedPlant from (A, B[, E]) tuples."""
    if not modes:
        raise PlantError("a plant needs at least one mode")
    built = []
    for idx, entry in enumerate(modes, start=1):
        A = np.atleast_2d(np.asarray(entry[0], dtype=float))
        B = np.atleast_2d(np.asarray(entry[1], dtype=float))
        E = entry[2] if len(entry) > 2 and entry[2] is not None else B
        E = np.atleast_2d(np.asarray(E, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise PlantError(f"mode {idx}: A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise PlantError(f"mode {idx}: B has {B.shape[0]} rows, A is {A.shape[0]}x{A.shape[0]}")
        if E.shape[0] != A.shape[0]:
            raise PlantError(f"mode {idx}: E has {E.shape[0]} rows, A is {A.shape[0]}x{A.shape[0]}")
        for name, M in (("A", A), ("B", B), ("E", E)):
            if not np.all(np.isfinite(M)):
                raise PlantError(f"mode {idx}: non-finite entries in {name}")
        built.append(Mode(A, B, E))
    n0, m0, p0 = built[0].A.shape[0], built[0].B.shape[1], built[0].E.shape[1]
    for idx, md in enumerate(built, start=1):
        if md.A.shape[0] != n0 or md.B.shape[1] != m0 or md.E.shape[1] != p0:
            raise PlantError(f"mode {idx}: dimensions differ from mode 1")
    for want, got, label in ((n, n0, "n"), (m, m0, "m"), (p, p0, "p")):
        if want is not None and want != got:
            raise PlantError(f"declared {label}={want} but matrices imply {label}={got}")
    for idx, md in enumerate(built, start=1):
        if not kalman_controllable(md.A, md.B):
            raise PlantError(f"mode {idx}: the pair (A_{idx}, B_{idx}) is not controllable")
    return SwitchedPlant(n0, m0, p0, tuple(built))


def load_plant(path) -> SwitchedPlant:
    """Load and validate a plant JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PlantError(f"cannot parse {path}: {exc}") from exc
    if "modes" not in doc:
        raise PlantError(f"{path}: missing 'modes' field")
    modes = [(md.get("A"), md.get("B"), md.get("E")) for md in doc["modes"]]
    return make_plant(modes, n=doc.get("n"), m=doc.get("m"), p=doc.get("p"))


def save_plant(plant: SwitchedPlant, path) -> None:
    doc = {
        "n": plant.n,
        "m": plant.m,
        "p": plant.p,
        "modes": [
            {"A": md.A.tolist(), "B": md.B.tolist(), "E": md.E.tolist()}
            for md in plant.modes
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2))


@dataclass(frozen=True)
class DisturbanceSpec:
    """Per-channel sinusoid disturbance: channel c is amp*sin(freq*t + phase).

    kind "none" evaluates to the zero vector; "matched-sinusoid" is the same
    evaluation as "sinusoid-sum" and only records that E = B is intended.
    """

    kind: str = "none"
    amplitudes: tuple[float, ...] = field(default_factory=tuple)
    frequencies: tuple[float, ...] = field(default_factory=tuple)
    phases: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("none", "sinusoid-sum", "matched-sinusoid"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.kind != "none":
            k = len(self.amplitudes)
            if len(self.frequencies) != k or len(self.phases) != k:
                raise ValueError("amplitude/frequency/phase lists must have equal length")
            if not all(math.isfinite(a) for a in self.amplitudes):
                raise ValueError("amplitudes must be finite")

    @property
    def channels(self) -> int:
        return len(self.amplitudes)


def sinusoid(channels: list[tuple[float, float, float]], matched: bool = False) -> DisturbanceSpec:
    """Build a spec from (amplitude, frequency, phase) triples."""
    amps, freqs, phases = zip(*channels) if channels else ((), (), ())
    kind = "matched-sinusoid" if matched else "sinusoid-sum"
    return DisturbanceSpec(kind, tuple(amps), tuple(freqs), tuple(phases))


def eval_disturbance(spec: DisturbanceSpec, t: float, x=None, p: int | None = None) -> np.ndarray:
    """Disturbance vector at time t (state-independent for the sinusoid kinds)."""
    if spec.kind == "none":
        return np.zeros(p if p is not None else 0)
    amps = np.asarray(spec.amplitudes)
    out = amps * np.sin(np.asarray(spec.frequencies) * t + np.asarray(spec.phases))
    if p is not None and p != out.size:
        raise ValueError(f"disturbance has {out.size} channels, plant expects {p}")
    return out
