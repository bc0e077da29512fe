"""JSONL serialization for frame mappings and pair manifests.

One JSON record per line, written with exact (shortest round-trip) float
encoding so structures survive write/read bit-for-bit.  Mapping files are
headerless; pair manifests start with a header record carrying the match
parameters and the optional distance cutoff.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator

from .errors import SchemaError
from .pose import MatchParams
from .transfer import FrameMapping, MappingEntry, Pair, PairManifest

PAIRS_FORMAT = "posekit-pairs/1"


@contextmanager
def _as_writer(sink) -> Iterator[IO[str]]:
    if hasattr(sink, "write"):
        yield sink
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_lines(source) -> list[str]:
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line.strip()]


def _dumps(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"))


def _loads(line: str, where: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(where, f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise SchemaError(where, "expected a JSON object per line")
    return record


def write_frame_mapping(mapping: FrameMapping, sink) -> None:
    """One line per entry: {"a": i, "b": j, "d": distance, "switched": bool}."""
    with _as_writer(sink) as fh:
        for e in mapping.entries:
            fh.write(_dumps({"a": e.a_index, "b": e.b_index, "d": e.distance, "switched": e.switched}) + "\n")


def read_frame_mapping(source) -> FrameMapping:
    entries = []
    for n, line in enumerate(_read_lines(source)):
        where = f"line {n + 1}"
        record = _loads(line, where)
        try:
            entries.append(
                MappingEntry(int(record["a"]), int(record["b"]), float(record["d"]), bool(record["switched"]))
            )
        except KeyError as exc:
            raise SchemaError(where, f"missing field {exc.args[0]!r}") from None
    try:
        return FrameMapping(tuple(entries))
    except ValueError as exc:
        raise SchemaError("mapping", str(exc)) from None


def write_pair_manifest(manifest: PairManifest, sink) -> None:
    """A header record with the match parameters, then one line per pair."""
    header = {
        "format": PAIRS_FORMAT,
        "k": manifest.params.k,
        "lambda": manifest.params.min_improvement,
        "normalize": manifest.params.normalize,
        "policy": manifest.params.candidate_policy.value,
        "max_distance": manifest.max_distance,
    }
    with _as_writer(sink) as fh:
        fh.write(_dumps(header) + "\n")
        for p in manifest.pairs:
            fh.write(_dumps({"a": p.a_index, "b": p.b_index, "d": p.distance}) + "\n")


def read_pair_manifest(source) -> PairManifest:
    lines = _read_lines(source)
    if not lines:
        raise SchemaError("line 1", "missing manifest header")
    header = _loads(lines[0], "line 1")
    if header.get("format") != PAIRS_FORMAT:
        raise SchemaError("line 1", f"expected header with format {PAIRS_FORMAT!r}")
    try:
        params = MatchParams(
            k=int(header["k"]),
            min_improvement=float(header["lambda"]),
            normalize=bool(header["normalize"]),
            candidate_policy=header["policy"],
        )
        max_distance = header["max_distance"]
    except KeyError as exc:
        raise SchemaError("line 1", f"missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise SchemaError("line 1", str(exc)) from None
    pairs = []
    for n, line in enumerate(lines[1:], start=2):
        where = f"line {n}"
        record = _loads(line, where)
        try:
            pairs.append(Pair(int(record["a"]), int(record["b"]), float(record["d"])))
        except KeyError as exc:
            raise SchemaError(where, f"missing field {exc.args[0]!r}") from None
    try:
        return PairManifest(tuple(pairs), params, None if max_distance is None else float(max_distance))
    except ValueError as exc:
        raise SchemaError("manifest", str(exc)) from None
