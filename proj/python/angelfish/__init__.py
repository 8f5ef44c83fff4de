"""Certified-DAG BFT consensus engine with a deterministic simulator.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its surface:

- :func:`run` -- run every seed of a JSON scenario document and return
  aggregated metrics plus per-seed outcomes.
- :func:`resolve_config` -- strictly parse a scenario document and echo it
  with every default resolved.
- :func:`leaders` -- the ordered leader list for a round.
- :func:`export_dot` -- render a window of a finished run's DAG as DOT.
- :class:`ScenarioError` -- raised on malformed scenario documents.
"""

from ._core import (
    ScenarioError,
    export_dot,
    leaders,
    resolve_config,
    run,
)

__all__ = [
    "ScenarioError",
    "export_dot",
    "leaders",
    "resolve_config",
    "run",
]
