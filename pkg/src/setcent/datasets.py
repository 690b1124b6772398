"""Dataset manifest, download cache and bundled graphs.

Manifest lines read ``name url directed|undirected [archive-member]``;
``#`` starts a comment. Downloads may be plain, ``.gz``, ``.bz2`` or
``.tar.bz2``/``.tar.gz`` (then ``archive-member`` names the edge-list file,
matched by basename prefix). Every fetched graph is cached as a plain edge
list under ``$SETCENT_CACHE`` (default ``~/.cache/setcent``).
"""

from __future__ import annotations

import bz2
import gzip
import io
import logging
import os
import shutil
import tarfile
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .graph import Graph, parse_edge_list

log = logging.getLogger(__name__)

CACHE_ENV = "SETCENT_CACHE"
BUNDLED = {
    "path3": ("path3.txt", False),
    "smallworld": ("smallworld.txt.gz", False),
}


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    url: str
    directed: bool
    member: str | None = None


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV) or os.path.join(Path.home(), ".cache", "setcent")
    return Path(root)


def parse_manifest(text: str) -> list[ManifestEntry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4) or parts[2] not in ("directed", "undirected"):
            raise ValueError(f"manifest line {lineno}: expected 'name url directed|undirected [member]'")
        entries.append(ManifestEntry(parts[0], parts[1], parts[2] == "directed",
                                     parts[3] if len(parts) == 4 else None))
    return entries


def default_manifest() -> str:
    return resources.files("setcent.data").joinpath("manifest.txt").read_text(encoding="utf-8")


def _decoded(raw: bytes, url: str, member: str | None) -> bytes:
    name = url.rsplit("/", 1)[-1]
    if ".tar" in name:
        with tarfile.open(fileobj=io.BytesIO(raw), mode="r:*") as tar:
            for info in tar.getmembers():
                base = info.name.rsplit("/", 1)[-1]
                if info.isfile() and (member is None or base.startswith(member)):
                    return tar.extractfile(info).read()
        raise ValueError(f"no member matching {member!r} in {url}")
    if name.endswith(".gz"):
        return gzip.decompress(raw)
    if name.endswith(".bz2"):
        return bz2.decompress(raw)
    return raw


def cached_path(name: str) -> Path:
    return cache_dir() / f"{name}.txt"


def fetch(entries: list[ManifestEntry], force: bool = False) -> list[Path]:
    """Download every entry not yet cached; returns the cached paths."""
    out = []
    for e in entries:
        target = cached_path(e.name)
        if target.exists() and not force:
            log.info("%s already cached at %s", e.name, target)
            out.append(target)
            continue
        log.info("fetching %s from %s", e.name, e.url)
        with urllib.request.urlopen(e.url) as resp:
            raw = resp.read()
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_suffix(".part")
        tmp.write_bytes(_decoded(raw, e.url, e.member))
        shutil.move(tmp, target)
        out.append(target)
    return out


def load_bundled(name: str) -> Graph:
    fname, directed = BUNDLED[name]
    data = resources.files("setcent.data").joinpath(fname).read_bytes()
    if fname.endswith(".gz"):
        data = gzip.decompress(data)
    return parse_edge_list(data.decode("utf-8"), directed=directed)


def load_graph(spec: str, directed: bool = False) -> Graph:
    """Read a graph from a path (optionally ``.gz``/``.bz2``), ``bundled:NAME``,
    or the name of a cached manifest graph."""
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        if name not in BUNDLED:
            raise FileNotFoundError(f"no bundled graph {name!r}; have {sorted(BUNDLED)}")
        return load_bundled(name)
    path = Path(spec)
    if not path.exists() and cached_path(spec).exists():
        path = cached_path(spec)
    opener = {".gz": gzip.open, ".bz2": bz2.open}.get(path.suffix, open)
    with opener(path, "rt", encoding="utf-8") as fh:
        return parse_edge_list(fh, directed=directed)
