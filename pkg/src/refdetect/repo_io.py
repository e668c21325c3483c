"""Load the changed source files of a revision pair from git or from two directories."""
from __future__ import annotations

import os
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

SOURCE_SUFFIX = ".java"
_EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"


class RepoError(Exception):
    pass


class RepoNotFound(RepoError):
    pass


class UnknownCommit(RepoError):
    pass


class MergeCommitSkipped(RepoError):
    pass


class BadRange(RepoError):
    pass


class PathNotFound(RepoError):
    pass


@dataclass
class RevisionPair:
    label: str
    before_files: list[tuple[str, str]] = field(default_factory=list)
    after_files: list[tuple[str, str]] = field(default_factory=list)


def _decode(data: bytes) -> str:
    return data.decode("utf-8", errors="replace").replace("\r\n", "\n").replace("\r", "\n")


def _git(repo: str | os.PathLike, *args: str, input: bytes | None = None) -> bytes:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        input=input,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    if proc.returncode != 0:
        raise RepoError(proc.stderr.decode(errors="replace").strip() or f"git {args[0]} failed")
    return proc.stdout


def _check_repo(repo_path) -> str:
    path = Path(repo_path)
    if not path.is_dir():
        raise RepoNotFound(f"{repo_path}: no such directory")
    try:
        _git(path, "rev-parse", "--git-dir")
    except RepoError:
        raise RepoNotFound(f"{repo_path}: not a git repository") from None
    return str(path)


def _resolve(repo: str, rev: str) -> str:
    try:
        return _git(repo, "rev-parse", "--verify", "--quiet", f"{rev}^{{commit}}").decode().strip()
    except RepoError:
        raise UnknownCommit(f"unknown commit {rev!r}") from None


def _read_blobs(repo: str, objects: list[str]) -> list[bytes]:
    """Read ``rev:path`` objects in one ``git cat-file --batch`` call."""
    if not objects:
        return []
    out = _git(repo, "cat-file", "--batch", input="".join(s + "\n" for s in objects).encode())
    blobs, pos = [], 0
    for obj in objects:
        nl = out.index(b"\n", pos)
        header = out[pos:nl].split()
        if len(header) < 3 or header[1] == b"missing":
            raise RepoError(f"cannot read {obj}")
        size = int(header[2])
        blobs.append(out[nl + 1:nl + 1 + size])
        pos = nl + 1 + size + 1
    return blobs


def load_commit_pair(repo_path, commit_id: str) -> RevisionPair:
    """Changed ``.java`` files of a commit and of its parent.

    A root commit is compared against the empty tree. Merge commits raise
    :class:`MergeCommitSkipped`.
    """
    repo = _check_repo(repo_path)
    commit = _resolve(repo, commit_id)
    parents = _git(repo, "rev-list", "--parents", "-n", "1", commit).decode().split()[1:]
    if len(parents) > 1:
        raise MergeCommitSkipped(f"{commit_id} is a merge commit")
    parent = parents[0] if parents else _EMPTY_TREE
    raw = _git(repo, "diff-tree", "-r", "-z", "--no-renames", "--name-status", parent, commit)
    fields = raw.split(b"\0")
    changes = []
    for k in range(0, len(fields) - 1, 2):
        status, path = fields[k].decode(), fields[k + 1].decode("utf-8", errors="replace")
        if path.endswith(SOURCE_SUFFIX):
            changes.append((status[:1], path))
    before_paths = [p for s, p in changes if s != "A"]
    after_paths = [p for s, p in changes if s != "D"]
    before = _read_blobs(repo, [f"{parent}:{p}" for p in before_paths]) if parents else []
    after = _read_blobs(repo, [f"{commit}:{p}" for p in after_paths])
    return RevisionPair(
        label=commit,
        before_files=sorted(zip(before_paths, map(_decode, before))),
        after_files=sorted(zip(after_paths, map(_decode, after))),
    )


def list_commits(repo_path, rev_range: str) -> list[str]:
    """Non-merge commits in ``rev_range``, oldest first."""
    repo = _check_repo(repo_path)
    try:
        out = _git(repo, "rev-list", "--reverse", "--topo-order", "--no-merges", rev_range, "--")
    except RepoError as exc:
        raise BadRange(f"bad revision range {rev_range!r}: {exc}") from None
    return out.decode().split()


def _source_files(root: Path) -> dict[str, bytes]:
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in root.rglob(f"*{SOURCE_SUFFIX}")
        if p.is_file()
    }


def load_directory_pair(dir_before, dir_after) -> RevisionPair:
    """Files that exist on one side only or whose bytes differ."""
    b_root, a_root = Path(dir_before), Path(dir_after)
    for d in (b_root, a_root):
        if not d.is_dir():
            raise PathNotFound(f"{d}: no such directory")
    b, a = _source_files(b_root), _source_files(a_root)
    changed = {p for p in b.keys() | a.keys() if b.get(p) != a.get(p)}
    return RevisionPair(
        label=f"{b_root.name}..{a_root.name}",
        before_files=[(p, _decode(b[p])) for p in sorted(changed) if p in b],
        after_files=[(p, _decode(a[p])) for p in sorted(changed) if p in a],
    )
