"""Synthetic ensemble datasets with class-specific spectral peaks.

Each class gets a background spectrum plus one or two peaks at
class-specific (scale, direction) pairs.  Every member and the observation
perturb that class spectrum with independent log-normal factors per layer
and are then simulated with their own seed, so within-class spread comes
from both the spectrum perturbation and sampling noise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .gridio import write_grid
from .manifest import dump_manifest
from .ndwt import max_levels
from .simulate import SpectrumSpec, simulate
from .wavelets import DIRECTIONS

SIM_LEVELS = 6
PEAK_SCALES = (2, 3, 4, 5)
TYPES = ("C", "F", "FC")

DEFAULT_PARAMS = {
    "taper": 8,
    "dims": None,
    "family": "haar",
    "levels": None,
    "scales": [2, 3, 4, 5, 6, 7],
    "smoother": "box",
    "nvec": None,
    "nb": 50,
    "seed": 2011,
}


def class_spectrum(k: int, peak: float = 1.5, levels: int = SIM_LEVELS) -> dict:
    """Layer energies for class ``k``; peaks cycle through PEAK_SCALES x DIRECTIONS."""
    scales = [j for j in PEAK_SCALES if j <= levels] or [levels]
    combos = [(j, l) for j in scales for l in DIRECTIONS]
    layers = {(j, l): 0.5 * 2.0 ** (-0.5 * (j - 1)) for j in range(1, levels + 1) for l in DIRECTIONS}
    first = combos[k % len(combos)]
    layers[first] += peak
    if k >= len(combos):
        second = combos[(5 * k + 1) % len(combos)]
        layers[second] += 0.5 * peak
    return layers


def member_spectrum(base: dict, rng: np.random.Generator, spread: float) -> SpectrumSpec:
    keys = sorted(base, key=lambda t: (t[0], DIRECTIONS.index(t[1])))
    factors = np.exp(spread * rng.standard_normal(len(keys)))
    return SpectrumSpec(J=max(j for j, _ in keys), layers={key: base[key] * f for key, f in zip(keys, factors)})


def build_synthetic_dataset(
    out_dir,
    n_classes: int = 14,
    n_members: int = 20,
    dims: tuple[int, int] = (128, 128),
    seed: int = 0,
    spread: float = 0.3,
    params: dict | None = None,
) -> Path:
    """Write member/observation grid files and a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    grid_dir = out_dir / "grids"
    grid_dir.mkdir(parents=True, exist_ok=True)
    levels = min(SIM_LEVELS, max_levels(dims))
    root = np.random.SeedSequence(seed)
    classes = []
    for k, class_seq in enumerate(root.spawn(n_classes)):
        base = class_spectrum(k, levels=levels)
        pert_seq, field_seq = class_seq.spawn(2)
        rng = np.random.Generator(np.random.PCG64(pert_seq))
        field_seeds = field_seq.generate_state(n_members + 1)
        names = []
        for m in range(n_members + 1):
            spec = member_spectrum(base, rng, spread)
            field = simulate(spec, dims, int(field_seeds[m]))
            name = f"class{k + 1:02d}_{'obs' if m == n_members else f'm{m + 1:02d}'}.wsg"
            write_grid(field, grid_dir / name)
            names.append(f"grids/{name}")
        classes.append(
            {
                "label": f"day{k + 1:02d}",
                "date": f"synthetic-{k + 1:02d}",
                "type": TYPES[k % len(TYPES)],
                "members": names[:n_members],
                "observation": names[n_members],
            }
        )
    manifest = out_dir / "manifest.yaml"
    dump_manifest(manifest, classes, dict(DEFAULT_PARAMS if params is None else params))
    return manifest
