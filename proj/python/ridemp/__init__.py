"""MPC pricing and relocation for ride-hailing with a learned optimization proxy."""

from ._ridemp import (
    ScenarioConfig,
    __version__,
    restore_feasibility,
    round_to_multiplier,
    run_episode,
    solve_exact,
    solve_heuristic,
    solve_transport,
    version,
)

__all__ = [
    "ScenarioConfig",
    "__version__",
    "restore_feasibility",
    "round_to_multiplier",
    "run_episode",
    "solve_exact",
    "solve_heuristic",
    "solve_transport",
    "version",
]
