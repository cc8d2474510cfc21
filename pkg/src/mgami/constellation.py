"""Finite equiprobable input alphabets with unit average energy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# points closer than this after normalisation are treated as duplicates
DUPLICATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Constellation:
    points: np.ndarray
    label: str = "custom"
    d_min: float = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if pts.size < 2:
            raise ValueError("a constellation needs at least two points")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "d_min", _min_distance(pts))
        if self.d_min < DUPLICATE_TOL:
            raise ValueError(
                f"constellation {self.label!r} has coincident points (d_min={self.d_min:.3g}); "
                "the alphabet must have no accumulation point"
            )

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits(self) -> float:
        return math.log2(self.size)

    @property
    def d_max(self) -> float:
        diff = np.abs(self.points[:, None] - self.points[None, :])
        return float(diff.max())

    @property
    def energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def key(self) -> tuple:
        """Hashable identity used for caching per-alphabet tables."""
        return tuple(np.round(self.points.real, 15)) + tuple(np.round(self.points.imag, 15))

    def to_json(self) -> str:
        return json.dumps([[p.real, p.imag] for p in self.points])


def _min_distance(pts: np.ndarray) -> float:
    diff = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def _normalise(pts: np.ndarray) -> np.ndarray:
    energy = np.mean(np.abs(pts) ** 2)
    if not energy > 0:
        raise ValueError("constellation has zero energy")
    return pts / math.sqrt(energy)


def make_qam(M: int) -> Constellation:
    """Square M-QAM, M in {4, 16, 64, 256}."""
    if M not in (4, 16, 64, 256):
        raise ValueError(f"square QAM requires M in {{4, 16, 64, 256}}, got {M}")
    side = math.isqrt(M)
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    grid = levels[:, None] + 1j * levels[None, :]
    return Constellation(_normalise(grid.ravel()), label=f"qam{M}")


def make_psk(M: int) -> Constellation:
    """M-PSK on the unit circle, starting at 1."""
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 2:
        raise ValueError(f"PSK requires an integer M >= 2, got {M!r}")
    pts = np.exp(2j * np.pi * np.arange(M) / M)
    # snap tiny imaginary/real residue (e.g. BPSK's 1.2e-16j)
    pts = np.where(np.abs(pts.real) < 1e-15, 1j * pts.imag, pts)
    pts = np.where(np.abs(pts.imag) < 1e-15, pts.real + 0j, pts)
    return Constellation(pts, label=f"psk{M}")


def make_custom(points, label: str = "custom") -> Constellation:
    """Rescale arbitrary complex points to unit average energy."""
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size < 2:
        raise ValueError("a constellation needs at least two points")
    return Constellation(_normalise(pts), label=label)


def from_name(name: str) -> Constellation:
    """Resolve ``qam16``, ``psk8``, ``bpsk``, ``qpsk`` or a path to a JSON file
    holding ``[[re, im], ...]``."""
    key = name.strip().lower()
    if key == "bpsk":
        return make_psk(2)
    if key == "qpsk":
        return make_qam(4)
    for prefix, maker in (("qam", make_qam), ("psk", make_psk)):
        if key.startswith(prefix) and key[len(prefix):].isdigit():
            return maker(int(key[len(prefix):]))
    path = Path(name)
    if path.suffix == ".json" or path.exists():
        return load_json(path)
    raise ValueError(f"unknown constellation {name!r}")


def load_json(path) -> Constellation:
    path = Path(path)
    data = json.loads(path.read_text())
    try:
        pts = [complex(float(re), float(im)) for re, im in data]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: expected a JSON array of [re, im] pairs") from exc
    return make_custom(pts, label=path.stem)
