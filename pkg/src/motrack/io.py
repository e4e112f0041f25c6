"""Parsers and writers for the four text/binary interchange formats.

All files are UTF-8 text with LF or CRLF line endings (except the packed
embedding variant), comma-separated, decimal-point floats only.

Detections   ``frame,-1,left,top,width,height,score,-1,-1,-1``
Embeddings   header ``d,count`` then ``frame,ordinal,v1,...,vd`` per row;
             ordinals are 0-based and dense within each frame and bind to
             the detection file's row order — that order is the join key.
             A packed variant stores the identical field stream as
             little-endian float32.
Camera       ``frame,a11,a12,tx,a21,a22,ty`` — row-major 2x3 ``[M | T]``
             mapping frame t-1 coordinates into frame t; frames without a
             row default to the identity transform.
Tracks       ``frame,id,left,top,width,height,score,-1,-1,-1`` sorted by
             (frame, id), coordinates quantized to 2 decimal places.
"""

from pathlib import Path

import numpy as np

from .geometry import Box, CameraTransform
from .tracker import Detection, FrameOutput


class ParseError(ValueError):
    """Malformed input file; the message carries source name and line number."""


def _open_text(source):
    if hasattr(source, "read"):
        return source, getattr(source, "name", "<stream>"), False
    return open(source, "r", encoding="utf-8", newline=None), str(source), True


def _rows(source):
    fh, name, owned = _open_text(source)
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            yield name, lineno, line.split(",")
    finally:
        if owned:
            fh.close()


def _fail(name, lineno, msg):
    raise ParseError(f"{name}:{lineno}: {msg}")


def parse_detections(source) -> dict:
    """Detection file -> {frame: [Detection, ...]} preserving in-frame order."""
    out: dict[int, list[Detection]] = {}
    for name, lineno, parts in _rows(source):
        if len(parts) < 7:
            _fail(name, lineno, f"expected at least 7 fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            left, top, width, height, score = (float(p) for p in parts[2:7])
        except ValueError:
            _fail(name, lineno, "non-numeric field")
        if frame < 0:
            _fail(name, lineno, f"negative frame index {frame}")
        if width <= 0 or height <= 0:
            _fail(name, lineno, f"non-positive box extent {width}x{height}")
        try:
            det = Detection(Box(left, top, width, height), score)
        except ValueError as exc:
            _fail(name, lineno, str(exc))
        out.setdefault(frame, []).append(det)
    return out


def write_detections(sink, dets_by_frame) -> None:
    """Write detections in file row order (frames ascending, in-frame order kept)."""
    fh, owned = _sink(sink)
    try:
        for frame in sorted(dets_by_frame):
            for d in dets_by_frame[frame]:
                l, t, w, h = (float(v) for v in d.box.as_ltwh())
                fh.write(
                    f"{frame},-1,{l!r},{t!r},{w!r},{h!r},{float(d.score)!r},-1,-1,-1\n"
                )
    finally:
        if owned:
            fh.close()


# -- embeddings --------------------------------------------------------------


def parse_embeddings(source, expected_count_per_frame=None) -> dict:
    """Embedding file -> {frame: [unit-norm float64 vector, ...]}.

    Accepts the text and packed-float32 encodings interchangeably (packed
    data is detected by NUL bytes, which comma-separated text never
    contains).  Vectors are L2-normalized here, at ingestion.
    """
    if hasattr(source, "read"):
        data = source.read()
        name = getattr(source, "name", "<stream>")
        if isinstance(data, str):
            data = data.encode("utf-8")
    else:
        data = Path(source).read_bytes()
        name = str(source)

    if b"\x00" in data[:64]:
        records = _embedding_records_binary(data, name)
    else:
        records = _embedding_records_text(data, name)

    out: dict[int, list[np.ndarray]] = {}
    for frame, ordinal, vec, lineno in records:
        if frame < 0:
            _fail(name, lineno, f"negative frame index {frame}")
        bucket = out.setdefault(frame, [])
        if ordinal != len(bucket):
            _fail(
                name,
                lineno,
                f"frame {frame}: expected ordinal {len(bucket)}, got {ordinal}"
                " (ordinals must be 0-based and dense, in row order)",
            )
        if not np.isfinite(vec).all():
            _fail(name, lineno, f"frame {frame} ordinal {ordinal}: non-finite component")
        norm = float(np.linalg.norm(vec))
        if norm < 1e-12:
            _fail(name, lineno, f"frame {frame} ordinal {ordinal}: zero embedding")
        bucket.append(vec / norm)

    if expected_count_per_frame is not None:
        for frame, expected in expected_count_per_frame.items():
            got = len(out.get(frame, []))
            if got != expected:
                raise ParseError(
                    f"{name}: frame {frame}: {expected} detections but {got} embeddings"
                )
        for frame in out:
            if frame not in expected_count_per_frame:
                raise ParseError(
                    f"{name}: frame {frame}: embeddings present but no detections"
                )
    return out


def _embedding_records_text(data: bytes, name: str):
    lines = data.decode("utf-8").splitlines()
    header = None
    records = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if header is None:
            if len(parts) != 2:
                _fail(name, lineno, "embedding header must be 'dimension,count'")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                _fail(name, lineno, "non-integer embedding header")
            if header[0] < 1 or header[1] < 0:
                _fail(name, lineno, f"invalid embedding header {header}")
            continue
        dim = header[0]
        if len(parts) != 2 + dim:
            _fail(name, lineno, f"expected {2 + dim} fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            ordinal = int(parts[1])
            vec = np.array([float(p) for p in parts[2:]], dtype=np.float64)
        except ValueError:
            _fail(name, lineno, "non-numeric field")
        records.append((frame, ordinal, vec, lineno))
    if header is None:
        if records:
            raise AssertionError  # unreachable: records require a header
        return []
    if len(records) != header[1]:
        raise ParseError(
            f"{name}: header announces {header[1]} rows, file has {len(records)}"
        )
    return records


def _embedding_records_binary(data: bytes, name: str):
    if len(data) % 4 != 0:
        raise ParseError(f"{name}: packed embedding file length not a float32 multiple")
    flat = np.frombuffer(data, dtype="<f4").astype(np.float64)
    if flat.size < 2:
        raise ParseError(f"{name}: packed embedding file too short for a header")
    dim = int(flat[0])
    count = int(flat[1])
    if dim < 1 or count < 0:
        raise ParseError(f"{name}: invalid packed embedding header ({dim}, {count})")
    stride = 2 + dim
    if flat.size != 2 + count * stride:
        raise ParseError(
            f"{name}: packed embedding file has {flat.size} values, "
            f"expected {2 + count * stride}"
        )
    records = []
    for k in range(count):
        base = 2 + k * stride
        frame = int(flat[base])
        ordinal = int(flat[base + 1])
        vec = flat[base + 2 : base + stride].copy()
        records.append((frame, ordinal, vec, k + 1))
    return records


def write_embeddings(sink, embs_by_frame, fmt: str = "text") -> None:
    """Write embeddings in either encoding.

    Values are quantized to float32 in both encodings, so the text and
    packed files of the same data parse to identical vectors.
    """
    frames = sorted(embs_by_frame)
    rows = []
    dim = None
    for frame in frames:
        for ordinal, vec in enumerate(embs_by_frame[frame]):
            v32 = np.asarray(vec, dtype=np.float32)
            if dim is None:
                dim = v32.shape[0]
            elif v32.shape[0] != dim:
                raise ValueError("inconsistent embedding dimension")
            rows.append((frame, ordinal, v32))
    dim = dim or 0

    if fmt == "text":
        fh, owned = _sink(sink)
        try:
            fh.write(f"{dim},{len(rows)}\n")
            for frame, ordinal, v32 in rows:
                vals = ",".join(repr(float(x)) for x in v32)
                fh.write(f"{frame},{ordinal},{vals}\n")
        finally:
            if owned:
                fh.close()
    elif fmt == "binary":
        flat = np.empty(2 + len(rows) * (2 + dim), dtype="<f4")
        flat[0] = dim
        flat[1] = len(rows)
        pos = 2
        for frame, ordinal, v32 in rows:
            flat[pos] = frame
            flat[pos + 1] = ordinal
            flat[pos + 2 : pos + 2 + dim] = v32
            pos += 2 + dim
        payload = flat.tobytes()
        if hasattr(sink, "write"):
            sink.write(payload)
        else:
            Path(sink).write_bytes(payload)
    else:
        raise ValueError(f"unknown embedding format {fmt!r}")


# -- camera transforms -------------------------------------------------------


def parse_cmc(source) -> dict:
    """Camera file -> {frame: CameraTransform}; unlisted frames mean identity."""
    out: dict[int, CameraTransform] = {}
    for name, lineno, parts in _rows(source):
        if len(parts) != 7:
            _fail(name, lineno, f"expected 7 fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            a11, a12, tx, a21, a22, ty = (float(p) for p in parts[1:])
        except ValueError:
            _fail(name, lineno, "non-numeric field")
        if frame < 0:
            _fail(name, lineno, f"negative frame index {frame}")
        try:
            out[frame] = CameraTransform([[a11, a12], [a21, a22]], [tx, ty])
        except ValueError as exc:
            _fail(name, lineno, str(exc))
    return out


def write_cmc(sink, cmc_by_frame) -> None:
    fh, owned = _sink(sink)
    try:
        for frame in sorted(cmc_by_frame):
            t = cmc_by_frame[frame]
            m, tr = t.matrix, t.translation
            a11, a12, a21, a22 = (float(x) for x in m.ravel())
            tx, ty = float(tr[0]), float(tr[1])
            fh.write(f"{frame},{a11!r},{a12!r},{tx!r},{a21!r},{a22!r},{ty!r}\n")
    finally:
        if owned:
            fh.close()


# -- tracks ------------------------------------------------------------------


def write_tracks(outputs, sink) -> None:
    """Write frame outputs as track rows sorted by (frame, id), 2-dp coords."""
    rows = []
    for fo in outputs:
        for track_id, box, score in fo.entries:
            rows.append((fo.frame, track_id, box, score))
    rows.sort(key=lambda r: (r[0], r[1]))
    fh, owned = _sink(sink)
    try:
        for frame, track_id, box, score in rows:
            l, t, w, h = box.as_ltwh()
            fh.write(
                f"{frame},{track_id},{l:.2f},{t:.2f},{w:.2f},{h:.2f},{score:.2f},-1,-1,-1\n"
            )
    finally:
        if owned:
            fh.close()


def parse_tracks(source) -> dict:
    """Track file -> {frame: [(id, Box, score), ...]}; duplicate (frame, id) rows fail."""
    out: dict[int, list] = {}
    seen = set()
    for name, lineno, parts in _rows(source):
        if len(parts) < 6:
            _fail(name, lineno, f"expected at least 6 fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            track_id = int(parts[1])
            left, top, width, height = (float(p) for p in parts[2:6])
            score = float(parts[6]) if len(parts) > 6 else 1.0
        except ValueError:
            _fail(name, lineno, "non-numeric field")
        if (frame, track_id) in seen:
            _fail(name, lineno, f"duplicate (frame, id) pair ({frame}, {track_id})")
        seen.add((frame, track_id))
        if width <= 0 or height <= 0:
            _fail(name, lineno, f"non-positive box extent {width}x{height}")
        out.setdefault(frame, []).append((track_id, Box(left, top, width, height), score))
    return out


def frame_outputs_from_tracks(tracks_by_frame) -> list:
    """Adapt parsed track rows back into FrameOutput records (round-trips)."""
    outputs = []
    for frame in sorted(tracks_by_frame):
        entries = sorted(tracks_by_frame[frame], key=lambda e: e[0])
        outputs.append(FrameOutput(frame=frame, entries=entries))
    return outputs


def _sink(sink):
    if hasattr(sink, "write"):
        return sink, False
    return open(sink, "w", encoding="utf-8", newline="\n"), True
