from __future__ import annotations

import os
import subprocess
from pathlib import Path

import pytest

from corpus_tools import materialize

# Calculator with sum, min and power, shaped so that y occurs in sum and
# min (twice in min), else only in min, Math only in power, and return in
# all three methods.
CALCULATOR = """\
package demo;

public class Calculator {
    public int sum(int x, int y) {
        return x + y;
    }

    public int min(int x, int y) {
        if (x < y) return x;
        else return y;
    }

    public double power(int b, int e) {
        return Math.pow(b, e);
    }
}
"""

_GIT_ENV = {
    "GIT_AUTHOR_NAME": "fixture",
    "GIT_AUTHOR_EMAIL": "fixture@example.invalid",
    "GIT_COMMITTER_NAME": "fixture",
    "GIT_COMMITTER_EMAIL": "fixture@example.invalid",
    "GIT_CONFIG_NOSYSTEM": "1",
}


class GitRepo:
    """Tiny scripted git repository for tests."""

    def __init__(self, path: Path):
        self.path = path
        self.clock = 1_700_000_000
        path.mkdir(parents=True, exist_ok=True)
        self.git("init", "-q", "-b", "main")

    def git(self, *args: str) -> str:
        env = dict(os.environ, **_GIT_ENV, HOME=str(self.path))
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = f"{self.clock} +0000"
        out = subprocess.run(["git", "-C", str(self.path), *args], env=env, check=True,
                             stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        return out.stdout.decode().strip()

    def write(self, rel: str, text: str):
        p = self.path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")

    def remove(self, rel: str):
        (self.path / rel).unlink()

    def commit(self, message: str) -> str:
        self.clock += 60
        self.git("add", "-A")
        self.git("commit", "-q", "--allow-empty", "-m", message)
        return self.git("rev-parse", "HEAD")


@pytest.fixture
def git_repo(tmp_path) -> GitRepo:
    return GitRepo(tmp_path / "repo")


@pytest.fixture(scope="session")
def corpus_manifest(tmp_path_factory) -> Path:
    return materialize(tmp_path_factory.mktemp("corpus"))


@pytest.fixture
def calculator_text() -> str:
    return CALCULATOR


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance(request):
    """Record a one-line verdict for an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
