"""Pipeline configuration: thresholds, rendering style, file round-trip.

Defaults are the tuned operating point of the method (the starred values
of its hyperparameter sweep). Linear-distance thresholds
(``tau_dir_margin``, ``tau_touch_gap``) and the squared one (``tau_near``)
are expressed in reference-frame units so they mean the same thing at any
image resolution; ``tau_v_close``/``tau_close`` are fractions of the image
diagonal.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from .errors import ConfigError

ID_STYLES = ("numeric", "textual")
PROMPT_MODES = ("visual", "visual_textual")
DISTANCE_MODES = ("reference", "pixel")
NEAR_METRICS = ("squared", "linear")
SCORE_MODES = ("mean", "weighted_mean")
DEDUP_SCOPES = ("pair", "pair_and_group")


@dataclass(frozen=True)
class RenderStyle:
    """Appearance and mark-allocation knobs for the overlay renderer."""

    mask_alpha: float = 0.35
    border_width_px: int = 3
    font_min_px: int = 12
    font_scale: float = 0.018
    arrow_width_px: int = 2
    label_padding_px: int = 3
    resolver_step_px: int = 4
    resolver_max_iters: int = 200
    palette_seed: int = 7
    curve_base_offset_px: float = 10.0
    curve_step_px: float = 12.0
    curve_angle_threshold_deg: float = 30.0

    def __post_init__(self):
        if not 0.0 < self.mask_alpha < 1.0:
            raise ConfigError("mask_alpha must lie in (0, 1)")
        for name in ("border_width_px", "arrow_width_px", "resolver_step_px",
                     "resolver_max_iters", "font_min_px"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    def font_size_for(self, image_dims: tuple[int, int]) -> int:
        w, h = image_dims
        return max(self.font_min_px, int(round(self.font_scale * min(w, h))))


@dataclass(frozen=True)
class PipelineConfig:
    """All thresholds plus mode switches, flat-file loadable."""

    tau_od_min_conf: float = 0.5
    tau_overlap_iou: float = 0.9
    tau_dir_margin: float = 20.0
    tau_z_diff: float = 0.1
    tau_near: float = 5000.0
    tau_touch_iou: float = 0.1
    tau_touch_gap: float = 3.0
    tau_v_close: float = 0.05
    tau_close: float = 0.12
    tau_query_obj: float = 0.5
    k: int = 3
    id_style: str = "numeric"
    render_relation_labels: bool = True
    prompt_mode: str = "visual"
    distance_mode: str = "reference"
    reference_frame_size: float = 1000.0
    near_metric: str = "squared"
    score_mode: str = "mean"
    dedup_scope: str = "pair"
    style: RenderStyle = field(default_factory=RenderStyle)

    def __post_init__(self):
        for name in ("tau_od_min_conf", "tau_overlap_iou", "tau_query_obj"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        for name in ("tau_dir_margin", "tau_z_diff", "tau_near", "tau_touch_iou",
                     "tau_touch_gap", "tau_v_close", "tau_close",
                     "reference_frame_size"):
            v = getattr(self, name)
            if v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        for name, allowed in (("id_style", ID_STYLES), ("prompt_mode", PROMPT_MODES),
                              ("distance_mode", DISTANCE_MODES),
                              ("near_metric", NEAR_METRICS),
                              ("score_mode", SCORE_MODES),
                              ("dedup_scope", DEDUP_SCOPES)):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}")

    @property
    def frame_size(self) -> float:
        """Side length of the distance reference frame; 0 disables rescaling."""
        return self.reference_frame_size if self.distance_mode == "reference" else 0.0


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return str(int(v)) if v == int(v) else repr(v)
    return str(v)


def _parse_value(raw: str, target_type: type):
    raw = raw.strip()
    if target_type is bool:
        if raw.lower() in ("true", "1", "on", "yes"):
            return True
        if raw.lower() in ("false", "0", "off", "no"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if target_type is int:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"expected an integer, got {raw!r}") from exc
    if target_type is float:
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"expected a number, got {raw!r}") from exc
    return raw


_CONFIG_FIELD_TYPES = {
    "tau_od_min_conf": float, "tau_overlap_iou": float, "tau_dir_margin": float,
    "tau_z_diff": float, "tau_near": float, "tau_touch_iou": float,
    "tau_touch_gap": float, "tau_v_close": float, "tau_close": float,
    "tau_query_obj": float, "k": int, "id_style": str,
    "render_relation_labels": bool, "prompt_mode": str, "distance_mode": str,
    "reference_frame_size": float, "near_metric": str, "score_mode": str,
    "dedup_scope": str,
}

_STYLE_FIELD_TYPES = {
    "mask_alpha": float, "border_width_px": int, "font_min_px": int,
    "font_scale": float, "arrow_width_px": int, "label_padding_px": int,
    "resolver_step_px": int, "resolver_max_iters": int, "palette_seed": int,
    "curve_base_offset_px": float, "curve_step_px": float,
    "curve_angle_threshold_deg": float,
}


def parse_overrides(pairs: dict[str, str]) -> PipelineConfig:
    """Build a config from raw key/value strings (file lines or CLI flags)."""
    cfg_kwargs = {}
    style_kwargs = {}
    for key, raw in pairs.items():
        if key in _CONFIG_FIELD_TYPES:
            cfg_kwargs[key] = _parse_value(raw, _CONFIG_FIELD_TYPES[key])
        elif key in _STYLE_FIELD_TYPES:
            style_kwargs[key] = _parse_value(raw, _STYLE_FIELD_TYPES[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return PipelineConfig(style=RenderStyle(**style_kwargs), **cfg_kwargs)


def apply_overrides(cfg: PipelineConfig, pairs: dict[str, str]) -> PipelineConfig:
    """Override individual keys on an existing config."""
    cfg_kwargs = {}
    style_kwargs = {}
    for key, raw in pairs.items():
        if key in _CONFIG_FIELD_TYPES:
            cfg_kwargs[key] = _parse_value(raw, _CONFIG_FIELD_TYPES[key])
        elif key in _STYLE_FIELD_TYPES:
            style_kwargs[key] = _parse_value(raw, _STYLE_FIELD_TYPES[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    style = dataclasses.replace(cfg.style, **style_kwargs) if style_kwargs else cfg.style
    return dataclasses.replace(cfg, style=style, **cfg_kwargs)


def loads_config(text: str) -> PipelineConfig:
    """Parse a flat ``key = value`` config file; an empty file means defaults."""
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = raw.strip()
    return parse_overrides(pairs)


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config(fh.read())


def dumps_config(cfg: PipelineConfig) -> str:
    """Canonical flat dump; ``loads_config(dumps_config(c)) == c``."""
    lines = []
    for f in fields(PipelineConfig):
        if f.name == "style":
            continue
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    for f in fields(RenderStyle):
        lines.append(f"{f.name} = {_format_value(getattr(cfg.style, f.name))}")
    return "\n".join(lines) + "\n"
