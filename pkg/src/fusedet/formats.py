"""JSON interchange formats for detections and ground truth.

One detection file holds one sensor's output over a set of scenes; boxes are
normalized center format ([cx, cy, w, h]) with the pixel dimensions retained
per scene so pixel/normalized round-trips stay possible. Ingestion can
alternatively accept corner-format pixel boxes ([x1, y1, x2, y2]) and
convert using the stored dimensions.

Writes are atomic (temp file in the target directory, then rename), so a
failed command never leaves a partial output behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import Any, Mapping

from .geometry import BoundingBox
from .matching import Detection
from .metrics import GroundTruthBox
from .pipeline import FusedDetection

__all__ = [
    "FORMAT_VERSION",
    "FileFormatError",
    "Scene",
    "load_detections",
    "load_ground_truth",
    "save_detections",
    "save_fused_detections",
    "save_ground_truth",
    "write_json_atomic",
    "write_text_atomic",
]

FORMAT_VERSION = "1"

DEFAULT_IMAGE_SIZE = (1000, 1000)


class FileFormatError(ValueError):
    """A file failed to parse or validate; carries a path and location hint."""

    def __init__(self, path: str, detail: str, location: str = ""):
        self.path = path
        self.detail = detail
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"{path}{where}: {detail}")


@dataclass(frozen=True)
class Scene:
    image_id: str
    image_width_px: int
    image_height_px: int


def _require(condition: bool, path: str, detail: str, location: str) -> None:
    if not condition:
        raise FileFormatError(path, detail, location)


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(path, exc.msg, f"line {exc.lineno} column {exc.colno}") from exc


def _parse_scene_header(raw: Mapping[str, Any], path: str, where: str) -> Scene:
    _require(isinstance(raw, Mapping), path, "scene must be an object", where)
    for key in ("image_id", "image_width_px", "image_height_px"):
        _require(key in raw, path, f"scene missing {key!r}", where)
    width, height = raw["image_width_px"], raw["image_height_px"]
    _require(
        isinstance(width, int) and isinstance(height, int) and width > 0 and height > 0,
        path,
        "image dimensions must be positive integers",
        where,
    )
    return Scene(str(raw["image_id"]), width, height)


def _parse_box(
    bbox: Any, scene: Scene, pixel_coords: bool, path: str, where: str
) -> BoundingBox:
    _require(
        isinstance(bbox, (list, tuple)) and len(bbox) == 4
        and all(isinstance(v, (int, float)) for v in bbox),
        path,
        "bbox must be a list of four numbers",
        where,
    )
    try:
        if pixel_coords:
            return BoundingBox.from_corner_pixels(
                bbox[0], bbox[1], bbox[2], bbox[3], scene.image_width_px, scene.image_height_px
            )
        return BoundingBox(*(float(v) for v in bbox))
    except ValueError as exc:
        raise FileFormatError(path, str(exc), where) from exc


def load_detections(
    path: str, pixel_coords: bool = False
) -> tuple[str, dict[str, Scene], dict[str, list[Detection]]]:
    """Parse a detection file into (source name, scene headers, per-scene detections)."""
    data = _load_json(path)
    _require(isinstance(data, Mapping), path, "top level must be an object", "$")
    _require(data.get("format_version") == FORMAT_VERSION, path,
             f"format_version must be {FORMAT_VERSION!r}", "$.format_version")
    source = str(data.get("source", ""))
    _require(isinstance(data.get("scenes"), list), path, "scenes must be a list", "$.scenes")

    headers: dict[str, Scene] = {}
    scenes: dict[str, list[Detection]] = {}
    for si, raw in enumerate(data["scenes"]):
        where = f"$.scenes[{si}]"
        scene = _parse_scene_header(raw, path, where)
        _require(scene.image_id not in scenes, path,
                 f"duplicate image_id {scene.image_id!r}", where)
        _require(isinstance(raw.get("detections"), list), path,
                 "scene missing detections list", where)
        dets = []
        for di, det in enumerate(raw["detections"]):
            dwhere = f"{where}.detections[{di}]"
            _require(isinstance(det, Mapping), path, "detection must be an object", dwhere)
            for key in ("bbox", "score", "class_id"):
                _require(key in det, path, f"detection missing {key!r}", dwhere)
            score = det["score"]
            _require(isinstance(score, (int, float)) and 0.0 <= score <= 1.0, path,
                     "score must be a number in [0, 1]", dwhere)
            box = _parse_box(det["bbox"], scene, pixel_coords, path, dwhere)
            dets.append(
                Detection(
                    box=box,
                    score=float(score),
                    source=source,
                    class_id=int(det["class_id"]),
                    image_id=scene.image_id,
                )
            )
        headers[scene.image_id] = scene
        scenes[scene.image_id] = dets
    return source, headers, scenes


def load_ground_truth(
    path: str, pixel_coords: bool = False
) -> tuple[dict[str, Scene], list[GroundTruthBox]]:
    """Parse a ground-truth file into (scene headers, flat truth list)."""
    data = _load_json(path)
    _require(isinstance(data, Mapping), path, "top level must be an object", "$")
    _require(data.get("format_version") == FORMAT_VERSION, path,
             f"format_version must be {FORMAT_VERSION!r}", "$.format_version")
    _require(isinstance(data.get("scenes"), list), path, "scenes must be a list", "$.scenes")

    headers: dict[str, Scene] = {}
    truths: list[GroundTruthBox] = []
    for si, raw in enumerate(data["scenes"]):
        where = f"$.scenes[{si}]"
        scene = _parse_scene_header(raw, path, where)
        _require(scene.image_id not in headers, path,
                 f"duplicate image_id {scene.image_id!r}", where)
        _require(isinstance(raw.get("boxes"), list), path, "scene missing boxes list", where)
        headers[scene.image_id] = scene
        for bi, entry in enumerate(raw["boxes"]):
            bwhere = f"{where}.boxes[{bi}]"
            _require(isinstance(entry, Mapping), path, "box entry must be an object", bwhere)
            for key in ("bbox", "class_id"):
                _require(key in entry, path, f"box entry missing {key!r}", bwhere)
            truths.append(
                GroundTruthBox(
                    box=_parse_box(entry["bbox"], scene, pixel_coords, path, bwhere),
                    class_id=int(entry["class_id"]),
                    image_id=scene.image_id,
                )
            )
    return headers, truths


def _bbox_list(box: BoundingBox) -> list[float]:
    return [box.cx, box.cy, box.w, box.h]


def _scene_sizes(
    headers: Mapping[str, Scene] | None, image_id: str
) -> tuple[int, int]:
    if headers and image_id in headers:
        scene = headers[image_id]
        return scene.image_width_px, scene.image_height_px
    return DEFAULT_IMAGE_SIZE


def save_detections(
    path: str,
    source: str,
    scenes: Mapping[str, list[Detection]],
    headers: Mapping[str, Scene] | None = None,
) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "source": source,
        "scenes": [
            {
                "image_id": image_id,
                "image_width_px": _scene_sizes(headers, image_id)[0],
                "image_height_px": _scene_sizes(headers, image_id)[1],
                "detections": [
                    {"bbox": _bbox_list(d.box), "score": d.score, "class_id": d.class_id}
                    for d in scenes[image_id]
                ],
            }
            for image_id in sorted(scenes)
        ],
    }
    write_json_atomic(path, payload)


def save_fused_detections(
    path: str,
    scenes: Mapping[str, list[FusedDetection]],
    headers: Mapping[str, Scene] | None = None,
) -> None:
    """Write fused outputs; per-source boxes and masses ride along as extras."""
    payload = {
        "format_version": FORMAT_VERSION,
        "source": "fused",
        "scenes": [
            {
                "image_id": image_id,
                "image_width_px": _scene_sizes(headers, image_id)[0],
                "image_height_px": _scene_sizes(headers, image_id)[1],
                "detections": [
                    {
                        "bbox": _bbox_list(d.box),
                        "score": d.score,
                        "class_id": d.class_id,
                        "uncertainty": d.uncertainty,
                        "provenance": d.provenance,
                        "bbox_a": _bbox_list(d.box_a) if d.box_a else None,
                        "bbox_b": _bbox_list(d.box_b) if d.box_b else None,
                    }
                    for d in scenes[image_id]
                ],
            }
            for image_id in sorted(scenes)
        ],
    }
    write_json_atomic(path, payload)


def save_ground_truth(
    path: str,
    truths: list[GroundTruthBox],
    headers: Mapping[str, Scene] | None = None,
) -> None:
    by_scene: dict[str, list[GroundTruthBox]] = {}
    for gt in truths:
        by_scene.setdefault(gt.image_id, []).append(gt)
    if headers:
        for image_id in headers:
            by_scene.setdefault(image_id, [])
    payload = {
        "format_version": FORMAT_VERSION,
        "scenes": [
            {
                "image_id": image_id,
                "image_width_px": _scene_sizes(headers, image_id)[0],
                "image_height_px": _scene_sizes(headers, image_id)[1],
                "boxes": [
                    {"bbox": _bbox_list(gt.box), "class_id": gt.class_id}
                    for gt in by_scene[image_id]
                ],
            }
            for image_id in sorted(by_scene)
        ],
    }
    write_json_atomic(path, payload)


def _atomic_write(path: str, write) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json_atomic(path: str, payload: Any) -> None:
    _atomic_write(path, lambda fh: json.dump(payload, fh, indent=2))


def write_text_atomic(path: str, text: str) -> None:
    _atomic_write(path, lambda fh: fh.write(text))
