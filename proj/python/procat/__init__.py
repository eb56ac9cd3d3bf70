"""Python access to the procat engine.

JSON results come back as dictionaries; errors raise ProcatError.
"""

import json
from dataclasses import dataclass
from pathlib import Path

from ._procat import REPORT_SCHEMA, Category, IndexPoset, Morphism, ProcatError, Workspace, commands
from ._procat import run_command as _run_command

__all__ = [
    "REPORT_SCHEMA",
    "Category",
    "IndexPoset",
    "Morphism",
    "ProcatError",
    "Result",
    "Workspace",
    "check_jmorphism",
    "commands",
    "equivalent",
    "poset_properties",
    "run",
]


@dataclass
class Result:
    exit_code: int
    report: dict

    @property
    def verdict(self):
        return self.report["verdict"]


def run(command, workspace, *args, horizon=64, budget=1_000_000, gamma=None, pair=None, replay=None):
    """Run one CLI command in-process and return its JSON report."""
    code, text = _run_command(command, Path(workspace), list(args), horizon, budget, gamma, pair,
                              None if replay is None else Path(replay))
    return Result(code, json.loads(text))


def check_jmorphism(workspace, name):
    return json.loads(workspace.check_jmorphism(name))


def equivalent(workspace, a, b):
    return json.loads(workspace.equivalent(a, b))


def poset_properties(poset):
    return json.loads(poset.properties())
