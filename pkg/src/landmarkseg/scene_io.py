"""File ingestion and emission: PLY-ascii and CSV clouds, FSIM features, labels.

Formats:
  - CSV cloud: header ``x,y,z[,r,g,b][,gt_instance,gt_category]``.
  - PLY: ascii 1.0, vertex element only; optional uchar red/green/blue and
    uint gt_instance / gt_category properties.
  - FSIM features: magic ``FSIM``, u32-le N, u32-le N_f, then N*N_f
    little-endian float32 values, row-major.
  - Labels CSV: header ``point_index,instance_id``, one row per point.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .core import FeatureMatrix, InstanceLabeling, LabeledCloud, validate_cloud

CLOUD_FORMATS = ("ply", "csv")

_CSV_COLUMNS = ("x", "y", "z", "r", "g", "b", "gt_instance", "gt_category")


def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in CLOUD_FORMATS:
            raise ValueError(f"unknown cloud format {fmt!r}")
        return fmt
    suffix = path.suffix.lower().lstrip(".")
    if suffix in CLOUD_FORMATS:
        return suffix
    raise ValueError(f"cannot infer cloud format from {path.name!r}; pass format explicitly")


def read_cloud(path, fmt: str | None = None) -> LabeledCloud:
    """Parse a cloud file and return it validated."""
    path = Path(path)
    fmt = _detect_format(path, fmt)
    cloud = _read_ply(path) if fmt == "ply" else _read_csv(path)
    problems = validate_cloud(cloud)
    if problems:
        raise ValueError(f"{path.name}: invalid cloud: " + "; ".join(problems))
    return cloud


def write_cloud(cloud: LabeledCloud, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = _detect_format(path, fmt)
    if fmt == "ply":
        _write_ply(cloud, path)
    else:
        _write_csv(cloud, path)


def _read_ply(path: Path) -> LabeledCloud:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def fail(ln: int, msg: str):
        raise ValueError(f"{path.name} line {ln}: {msg}")

    if not lines or lines[0].strip() != "ply":
        fail(1, "missing 'ply' magic line")
    n_vertex = None
    props: list[str] = []
    in_vertex = False
    body_start = None
    for ln, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if tokens[1:] != ["ascii", "1.0"]:
                fail(ln, f"unsupported format {' '.join(tokens[1:])!r} (only ascii 1.0)")
        elif tokens[0] == "element":
            if tokens[1] == "vertex":
                n_vertex = int(tokens[2])
                in_vertex = True
            else:
                if int(tokens[2]) > 0:
                    fail(ln, f"unsupported element {tokens[1]!r}")
                in_vertex = False
        elif tokens[0] == "property":
            if in_vertex:
                if len(tokens) != 3:
                    fail(ln, "list properties are not supported")
                props.append(tokens[2])
        elif tokens[0] == "end_header":
            body_start = ln + 1
            break
        else:
            fail(ln, f"unexpected header line {raw!r}")
    if body_start is None:
        fail(len(lines), "missing end_header")
    if n_vertex is None:
        fail(body_start - 1, "missing vertex element")
    for req in ("x", "y", "z"):
        if req not in props:
            fail(body_start - 1, f"missing required property {req!r}")

    cols = {name: i for i, name in enumerate(props)}
    rows = lines[body_start - 1 : body_start - 1 + n_vertex]
    if len(rows) < n_vertex:
        fail(len(lines), f"expected {n_vertex} vertex rows, found {len(rows)}")

    pts = np.empty((n_vertex, 3), dtype=np.float64)
    has_color = all(c in cols for c in ("red", "green", "blue"))
    colors = np.empty((n_vertex, 3), dtype=np.uint8) if has_color else None
    gt_i = np.empty(n_vertex, dtype=np.int64) if "gt_instance" in cols else None
    gt_c = np.empty(n_vertex, dtype=np.int64) if "gt_category" in cols else None
    for r, raw in enumerate(rows):
        ln = body_start + r
        fields = raw.split()
        if len(fields) != len(props):
            fail(ln, f"expected {len(props)} values, found {len(fields)}")
        try:
            pts[r, 0] = float(fields[cols["x"]])
            pts[r, 1] = float(fields[cols["y"]])
            pts[r, 2] = float(fields[cols["z"]])
            if colors is not None:
                for a, c in enumerate(("red", "green", "blue")):
                    colors[r, a] = int(fields[cols[c]])
            if gt_i is not None:
                gt_i[r] = int(fields[cols["gt_instance"]])
            if gt_c is not None:
                gt_c[r] = int(fields[cols["gt_category"]])
        except ValueError as exc:
            fail(ln, f"bad value: {exc}")
    return LabeledCloud(points=pts, colors=colors, gt_instance=gt_i, gt_category=gt_c)


def _write_ply(cloud: LabeledCloud, path: Path) -> None:
    header = ["ply", "format ascii 1.0", f"element vertex {cloud.n}"]
    header += [f"property float {a}" for a in ("x", "y", "z")]
    if cloud.colors is not None:
        header += [f"property uchar {c}" for c in ("red", "green", "blue")]
    if cloud.gt_instance is not None:
        header.append("property uint gt_instance")
    if cloud.gt_category is not None:
        header.append("property uint gt_category")
    header.append("end_header")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(header) + "\n")
        for i in range(cloud.n):
            parts = [f"{v:.9g}" for v in cloud.points[i]]
            if cloud.colors is not None:
                parts += [str(int(v)) for v in cloud.colors[i]]
            if cloud.gt_instance is not None:
                parts.append(str(int(cloud.gt_instance[i])))
            if cloud.gt_category is not None:
                parts.append(str(int(cloud.gt_category[i])))
            fh.write(" ".join(parts) + "\n")


def _read_csv(path: Path) -> LabeledCloud:
    def fail(ln: int, msg: str):
        raise ValueError(f"{path.name} line {ln}: {msg}")

    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            fail(1, "empty file")
        header = [h.strip() for h in header]
        for col in header:
            if col not in _CSV_COLUMNS:
                fail(1, f"unrecognized column {col!r}")
        for req in ("x", "y", "z"):
            if req not in header:
                fail(1, f"missing required column {req!r}")
        cols = {name: i for i, name in enumerate(header)}
        has_color = all(c in cols for c in ("r", "g", "b"))

        pts_rows: list[tuple[float, float, float]] = []
        color_rows: list[tuple[int, int, int]] = []
        gt_i_rows: list[int] = []
        gt_c_rows: list[int] = []
        for ln, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(header):
                fail(ln, f"expected {len(header)} fields, found {len(fields)}")
            try:
                pts_rows.append(
                    (float(fields[cols["x"]]), float(fields[cols["y"]]), float(fields[cols["z"]]))
                )
                if has_color:
                    color_rows.append(
                        (int(fields[cols["r"]]), int(fields[cols["g"]]), int(fields[cols["b"]]))
                    )
                if "gt_instance" in cols:
                    gt_i_rows.append(int(fields[cols["gt_instance"]]))
                if "gt_category" in cols:
                    gt_c_rows.append(int(fields[cols["gt_category"]]))
            except ValueError as exc:
                fail(ln, f"bad value: {exc}")
    return LabeledCloud(
        points=np.array(pts_rows, dtype=np.float64).reshape(-1, 3),
        colors=np.array(color_rows, dtype=np.uint8) if has_color and color_rows else None,
        gt_instance=np.array(gt_i_rows, dtype=np.int64) if "gt_instance" in cols else None,
        gt_category=np.array(gt_c_rows, dtype=np.int64) if "gt_category" in cols else None,
    )


def _write_csv(cloud: LabeledCloud, path: Path) -> None:
    header = ["x", "y", "z"]
    if cloud.colors is not None:
        header += ["r", "g", "b"]
    if cloud.gt_instance is not None:
        header.append("gt_instance")
    if cloud.gt_category is not None:
        header.append("gt_category")
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(cloud.n):
            row = [f"{v:.9g}" for v in cloud.points[i]]
            if cloud.colors is not None:
                row += [str(int(v)) for v in cloud.colors[i]]
            if cloud.gt_instance is not None:
                row.append(str(int(cloud.gt_instance[i])))
            if cloud.gt_category is not None:
                row.append(str(int(cloud.gt_category[i])))
            writer.writerow(row)


_FSIM_MAGIC = b"FSIM"


def read_features(path) -> FeatureMatrix:
    """Read an FSIM feature file; rejects bad magic, truncation, non-finite values."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _FSIM_MAGIC:
        raise ValueError(f"{path.name}: bad magic, not an FSIM file")
    if len(blob) < 12:
        raise ValueError(f"{path.name}: truncated header")
    n, n_f = struct.unpack_from("<II", blob, 4)
    if n == 0 or n_f == 0:
        raise ValueError(f"{path.name}: empty feature matrix ({n} x {n_f})")
    expected = 12 + 4 * n * n_f
    if len(blob) < expected:
        raise ValueError(
            f"{path.name}: truncated payload, expected {expected} bytes, found {len(blob)}"
        )
    if len(blob) > expected:
        raise ValueError(f"{path.name}: {len(blob) - expected} trailing bytes after payload")
    values = np.frombuffer(blob, dtype="<f4", offset=12).reshape(n, n_f)
    if not np.isfinite(values).all():
        raise ValueError(f"{path.name}: feature matrix contains non-finite values")
    return FeatureMatrix(data=values.astype(np.float64))


def read_features_header(path) -> tuple[int, int]:
    """(N, N_f) from an FSIM file without loading the payload."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(12)
    if head[:4] != _FSIM_MAGIC:
        raise ValueError(f"{path.name}: bad magic, not an FSIM file")
    if len(head) < 12:
        raise ValueError(f"{path.name}: truncated header")
    n, n_f = struct.unpack_from("<II", head, 4)
    return int(n), int(n_f)


def write_features(features: FeatureMatrix, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_FSIM_MAGIC)
        fh.write(struct.pack("<II", features.rows, features.cols))
        fh.write(np.ascontiguousarray(features.data, dtype="<f4").tobytes())


def write_labels_csv(labeling: InstanceLabeling, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_index", "instance_id"])
        for i, lab in enumerate(labeling.labels):
            writer.writerow([i, int(lab)])


def read_labels_csv(path) -> InstanceLabeling:
    path = Path(path)
    by_index: dict[int, int] = {}
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["point_index", "instance_id"]:
            raise ValueError(f"{path.name} line 1: expected header 'point_index,instance_id'")
        for ln, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 2:
                raise ValueError(f"{path.name} line {ln}: expected 2 fields, found {len(fields)}")
            try:
                idx, lab = int(fields[0]), int(fields[1])
            except ValueError as exc:
                raise ValueError(f"{path.name} line {ln}: bad value: {exc}") from None
            if idx in by_index:
                raise ValueError(f"{path.name} line {ln}: duplicate point_index {idx}")
            by_index[idx] = lab
    n = len(by_index)
    if n == 0:
        raise ValueError(f"{path.name}: no label rows")
    if sorted(by_index) != list(range(n)):
        raise ValueError(f"{path.name}: point_index values must cover 0..{n - 1}")
    labels = np.array([by_index[i] for i in range(n)], dtype=np.int64)
    return InstanceLabeling(labels=labels)
