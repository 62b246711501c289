"""ワークフローパッケージ."""
from workflows.checks import run_checks
from workflows.experiments import (
    build_map,
    run_build,
    run_evolve,
    run_resolve,
    run_spectrum,
)

__all__ = [
    "build_map",
    "run_build",
    "run_checks",
    "run_evolve",
    "run_resolve",
    "run_spectrum",
]
