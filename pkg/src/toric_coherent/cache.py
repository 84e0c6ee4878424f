"""Line-delimited JSON cache of weight enumerators.

One file per lattice size, ``enumerators_L{L}.jsonl``.  Each line is a record

    {"version": "1", "L": "3", "syndrome": "0a3", "class": "1,0",
     "l_min": "3", "degeneracies": ["1", "4", ...]}

with every integer written as a decimal string.  Writers append whole lines
under a file lock; readers skip a torn final line.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from filelock import FileLock

from toric_coherent.chain_complex import CLASS_LABELS, ClassLabel, LatticeGeometry, Syndrome
from toric_coherent.enumerator import (
    DEFAULT_BUDGET,
    SyndromeTable,
    WeightEnumerator,
    class_weight_enumerator,
)
from toric_coherent.errors import CacheError

FORMAT_VERSION = 1

Key = Tuple[int, str, str]


def encode_record(enum: WeightEnumerator) -> str:
    if enum.L is None or enum.syndrome is None or enum.label is None:
        raise CacheError("only fully tagged enumerators can be cached")
    record = {
        "version": str(FORMAT_VERSION),
        "L": str(enum.L),
        "syndrome": enum.syndrome,
        "class": str(enum.label),
        "l_min": str(enum.l_min),
        "degeneracies": [str(d) for d in enum.degeneracies],
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def decode_record(line: str) -> WeightEnumerator:
    record = json.loads(line)
    try:
        if int(record["version"]) != FORMAT_VERSION:
            raise CacheError(f"unsupported cache format version {record['version']}")
        return WeightEnumerator(
            l_min=int(record["l_min"]),
            degeneracies=tuple(int(d) for d in record["degeneracies"]),
            L=int(record["L"]),
            syndrome=str(record["syndrome"]),
            label=ClassLabel.parse(record["class"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CacheError(f"malformed cache record: {line.strip()[:120]}") from exc


class EnumeratorCache:
    def __init__(self, directory) -> None:
        self.directory = Path(directory)
        self._loaded: Dict[int, Dict[Key, WeightEnumerator]] = {}
        self._conflicts: Dict[int, List[Key]] = {}

    def path(self, L: int) -> Path:
        return self.directory / f"enumerators_L{L}.jsonl"

    def _lock(self, L: int) -> FileLock:
        return FileLock(str(self.path(L)) + ".lock")

    def _load(self, L: int) -> Dict[Key, WeightEnumerator]:
        if L in self._loaded:
            return self._loaded[L]
        index: Dict[Key, WeightEnumerator] = {}
        conflicts: List[Key] = []
        path = self.path(L)
        if path.exists():
            lines = path.read_text(encoding="utf-8").split("\n")
            for i, line in enumerate(lines):
                if not line.strip():
                    continue
                try:
                    enum = decode_record(line)
                except json.JSONDecodeError:
                    if i == len(lines) - 1:
                        # torn write in progress
                        continue
                    raise CacheError(f"{path}:{i + 1}: unreadable record")
                key = (enum.L, enum.syndrome, str(enum.label))
                if key in index and index[key] != enum:
                    conflicts.append(key)
                index.setdefault(key, enum)
        self._loaded[L] = index
        self._conflicts[L] = conflicts
        return index

    def conflicts(self, L: int) -> List[Key]:
        self._load(L)
        return list(self._conflicts[L])

    def get(self, L: int, syndrome_hex: str, label: ClassLabel) -> Optional[WeightEnumerator]:
        index = self._load(L)
        key = (L, syndrome_hex, str(label))
        if key in self._conflicts[L]:
            raise CacheError(f"conflicting cache records for L={L} S={syndrome_hex} class={label}")
        return index.get(key)

    def get_table(self, geometry: LatticeGeometry, syndrome: Syndrome) -> Optional[SyndromeTable]:
        hex_s = syndrome.hex()
        enums = [self.get(geometry.L, hex_s, k) for k in CLASS_LABELS]
        if any(e is None for e in enums):
            return None
        return SyndromeTable(geometry.L, syndrome, tuple(enums))

    def put(self, enums: List[WeightEnumerator]) -> int:
        """Append records not already present; returns the number written."""
        if not enums:
            return 0
        L = enums[0].L
        if any(e.L != L for e in enums):
            raise CacheError("put() takes enumerators of a single lattice size")
        self.directory.mkdir(parents=True, exist_ok=True)
        with self._lock(L):
            # re-read under the lock so concurrent writers do not duplicate
            self._loaded.pop(L, None)
            index = self._load(L)
            fresh = [e for e in enums if (e.L, e.syndrome, str(e.label)) not in index]
            if fresh:
                with open(self.path(L), "a", encoding="utf-8") as fh:
                    for e in fresh:
                        fh.write(encode_record(e) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
                for e in fresh:
                    index[(e.L, e.syndrome, str(e.label))] = e
        return len(fresh)

    def put_table(self, table: SyndromeTable) -> int:
        return self.put(list(table.enumerators))

    def records(self, L: int) -> Iterator[WeightEnumerator]:
        yield from self._load(L).values()

    def lattice_sizes(self) -> List[int]:
        sizes = []
        if self.directory.exists():
            for p in sorted(self.directory.glob("enumerators_L*.jsonl")):
                sizes.append(int(p.stem.split("_L", 1)[1]))
        return sorted(sizes)

    def verify(self, budget: int = DEFAULT_BUDGET) -> List[str]:
        """Recompute every cached record; returns human-readable problems."""
        problems: List[str] = []
        for L in self.lattice_sizes():
            geometry = LatticeGeometry(L)
            for key in self.conflicts(L):
                problems.append(f"L={L} S={key[1]} class={key[2]}: conflicting records")
            for enum in self.records(L):
                fresh = class_weight_enumerator(
                    geometry, geometry.syndrome_from_hex(enum.syndrome), enum.label, budget=budget
                )
                if fresh != enum:
                    problems.append(
                        f"L={L} S={enum.syndrome} class={enum.label}: cached record differs "
                        f"from recomputation"
                    )
        return problems

    def purge(self) -> int:
        removed = 0
        if self.directory.exists():
            for p in list(self.directory.glob("enumerators_L*.jsonl*")):
                p.unlink()
                removed += 1
        self._loaded.clear()
        self._conflicts.clear()
        return removed
