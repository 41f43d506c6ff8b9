"""Adapter for an external MILP solver invoked as a subprocess.

The command template comes from ``QTSP_MILP_CMD`` (or an explicit argument)
and must contain ``{lp}`` and ``{sol}`` placeholders. The solver reads the LP
file and writes ``name value`` lines to the solution path. Each solve runs in
its own temporary directory.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

import numpy as np

from .lpfile import parse_solution, write_lp_file
from .model import BackendError, ConfigurationError, MilpModel, MilpResult, Status, finalize

ENV_VAR = "QTSP_MILP_CMD"


def solve_external(model: MilpModel, command: str | None = None, workdir: str | None = None,
                   integral: bool = True, time_limit: float | None = None) -> MilpResult:
    template = command if command is not None else os.environ.get(ENV_VAR)
    if not template:
        raise ConfigurationError(f"no external solver command; set {ENV_VAR}")
    if "{lp}" not in template or "{sol}" not in template:
        raise ConfigurationError("solver command must contain {lp} and {sol} placeholders")
    with tempfile.TemporaryDirectory(prefix="qtsp-", dir=workdir) as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "model.sol")
        with open(lp_path, "w", encoding="utf-8") as fh:
            fh.write(write_lp_file(model, relax=not integral))
        argv = [part.replace("{lp}", lp_path).replace("{sol}", sol_path)
                for part in shlex.split(template)]
        try:
            proc = subprocess.run(argv, cwd=tmp, capture_output=True, text=True, timeout=time_limit)
        except FileNotFoundError as exc:
            raise ConfigurationError(f"solver executable not found: {exc}") from None
        except subprocess.TimeoutExpired:
            return MilpResult(Status.ITERATION_LIMIT, names=model.names)
        if proc.returncode != 0:
            raise BackendError(f"solver exited with code {proc.returncode}: {proc.stderr.strip()[:500]}")
        if not os.path.exists(sol_path):
            return MilpResult(Status.INFEASIBLE, names=model.names)
        with open(sol_path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        values, _ = parse_solution(text)
    except ValueError as exc:
        raise BackendError(f"unparsable solution file: {exc}") from None
    x = np.zeros(model.num_vars)
    for name, v in values.items():
        try:
            x[model.index(name)] = v
        except KeyError:
            raise BackendError(f"solution names unknown variable {name!r}") from None
    return finalize(model, Status.OPTIMAL, x, integral)
