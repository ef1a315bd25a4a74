"""Python access to the rwpm core: kernels, free energies, renewal statistics and the runner."""

import json as _json

from ._core import (
    DomainError,
    FreeEnergyTable,
    JumpKernel,
    NumericalError,
    TransitionEngine,
    __version__,
    experiment_names,
    iterated_overshoots,
    overlap_stats,
    solve_free_energy,
    srw_kernel,
    stable_kernel,
)
from . import _core


def validate(config):
    """Diagnostics for a config dict, as "error: ..." / "note: ..." strings."""
    return _core._validate(_json.dumps(config))


def run(config, out_dir="", workers=0):
    """Run an experiment; returns exit_code, files, error and the parsed manifest."""
    r = _core._run(_json.dumps(config), out_dir, workers)
    r["manifest"] = _json.loads(r["manifest"]) if r["manifest"] not in ("", "null") else None
    return r


__all__ = [
    "DomainError",
    "FreeEnergyTable",
    "JumpKernel",
    "NumericalError",
    "TransitionEngine",
    "experiment_names",
    "iterated_overshoots",
    "overlap_stats",
    "run",
    "solve_free_energy",
    "srw_kernel",
    "stable_kernel",
    "validate",
]
