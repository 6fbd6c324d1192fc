"""Reproducible run bundles: delimited tables, JSON summaries, manifests,
and rendered figures.

A bundle directory holds, per run:

- one or more CSV tables (deterministic formatting: shortest round-trip
  float representation, fixed row order, a comment header naming units
  and the seed);
- a JSON summary where a command produces scalar results;
- PNG figures rendered from the tables just written;
- ``manifest.json`` binding the resolved configuration, seed, package
  version, and the SHA-256 of every table.

Re-running a manifest must reproduce every table byte for byte; the
`verify_manifest` helper re-hashes and compares.  Figures are derived
artifacts and are not part of the byte-identity contract.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__

__all__ = [
    "ReportBundle",
    "format_value",
    "write_csv",
    "write_json",
    "config_digest",
    "write_manifest",
    "load_manifest",
    "verify_manifest",
    "line_figure",
    "fit_figure",
    "ratio_figure",
]


def format_value(x) -> str:
    """Deterministic cell formatting: shortest round-trip for floats."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v != v:
            return "nan"
        return repr(v)
    if x is None:
        return ""
    return str(x)


def write_csv(path, columns, rows, description: str = "", seed=None) -> Path:
    """Write a table with a units/description comment header."""
    path = Path(path)
    lines = []
    if description:
        for piece in description.strip().splitlines():
            lines.append(f"# {piece}")
    if seed is not None:
        lines.append(f"# seed: {seed}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path


def config_digest(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class ReportBundle:
    """Accumulates the artifacts of one run before the manifest is sealed."""

    directory: Path
    command: str
    config: dict
    seed: int
    tables: list = field(default_factory=list)
    figures: list = field(default_factory=list)
    summaries: list = field(default_factory=list)

    def __post_init__(self):
        self.directory = Path(self.directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def add_table(self, name, columns, rows, description="") -> Path:
        path = write_csv(self.directory / name, columns, rows, description, seed=self.seed)
        self.tables.append(name)
        return path

    def add_summary(self, name, payload) -> Path:
        payload = dict(payload)
        payload.setdefault("seed", self.seed)
        path = write_json(self.directory / name, payload)
        self.summaries.append(name)
        return path

    def add_figure(self, name) -> None:
        self.figures.append(name)

    def seal(self, notes: str = "") -> Path:
        manifest = {
            "tool": "halfwave-lab",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "config_sha256": config_digest(self.config),
            "tables": {name: _sha256_file(self.directory / name) for name in self.tables},
            "summaries": {name: _sha256_file(self.directory / name) for name in self.summaries},
            "figures": sorted(self.figures),
        }
        path = write_json(self.directory / "manifest.json", manifest)
        if notes:
            (self.directory / "summary.md").write_text(notes)
        return path


def load_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    manifest = json.loads(path.read_text())
    if manifest.get("tool") != "halfwave-lab":
        raise ValueError(f"{path} is not a halfwave-lab manifest")
    mine = __version__.split(".")[:2]
    theirs = str(manifest.get("version", "")).split(".")[:2]
    if mine != theirs:
        raise ValueError(
            f"manifest version {manifest.get('version')} incompatible with tool {__version__}"
        )
    return manifest


def verify_manifest(manifest: dict, directory) -> dict:
    """Re-hash the tables referenced by a manifest against a directory of
    freshly produced outputs; returns {table: bool}."""
    directory = Path(directory)
    results = {}
    for name, digest in manifest.get("tables", {}).items():
        candidate = directory / name
        results[name] = candidate.exists() and _sha256_file(candidate) == digest
    return results


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _new_axes(title, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def line_figure(out_path, x, series: dict, title="", xlabel="", ylabel="",
                logy=False) -> Path:
    """Plot named series against a shared abscissa."""
    fig, ax = _new_axes(title, xlabel, ylabel)
    for name, y in series.items():
        y = np.asarray(y, dtype=float)
        if logy:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, label=name, linewidth=1.2)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)


def fit_figure(out_path, x, y, slope, intercept, title="", xlabel="", ylabel="",
               censored_x=()) -> Path:
    """Scatter plus fitted line (both axes already in fit coordinates)."""
    fig, ax = _new_axes(title, xlabel, ylabel)
    ax.scatter(x, y, marker="o", s=30, zorder=3, label="measured")
    xs = np.linspace(min(x), max(x), 64)
    ax.plot(xs, slope * xs + intercept, "--", color="tab:red",
            label=f"fit: slope {slope:.3f}")
    for cx in censored_x:
        ax.axvline(cx, color="gray", linestyle=":", alpha=0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)


def ratio_figure(out_path, groups: dict, title="", xlabel="group", ylabel="ratio",
                 hlines=()) -> Path:
    """Strip plot of ratio samples per labelled group."""
    fig, ax = _new_axes(title, xlabel, ylabel)
    labels = list(groups)
    for i, name in enumerate(labels):
        vals = np.asarray(groups[name], dtype=float)
        jitter = np.linspace(-0.15, 0.15, len(vals)) if len(vals) > 1 else [0.0]
        ax.scatter(np.full(len(vals), i) + jitter, vals, s=14, alpha=0.7)
    for level in hlines:
        ax.axhline(level, color="tab:red", linestyle="--", alpha=0.6)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([str(x) for x in labels], rotation=20, fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return Path(out_path)
