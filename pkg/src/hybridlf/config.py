"""Flat ``key = value`` configuration with typed accessors.

One entry per line, ``#`` starts a comment, keys are case-sensitive and
must be known.  Command-line flags override file values, which override
the built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

__all__ = ["ConfigError", "Key", "KEYS", "Config", "parse_flag"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # int | float | str | flag
    default: Any
    help: str = ""


def _keys(*items) -> dict[str, Key]:
    return {k.name: k for k in (Key(*it) for it in items)}


KEYS: dict[str, Key] = _keys(
    ("threads", "int", 0, "worker threads for per-view work (0 = all cores)"),
    ("seed", "int", 0, "texture seed for synthetic scenes"),
    # flow solver
    ("flow_alpha", "float", 0.02, "smoothness weight"),
    ("flow_scale", "float", 0.5, "pyramid scale factor"),
    ("flow_min_size", "int", 16, "smallest pyramid level side"),
    ("flow_outer", "int", 3, "outer fixed-point iterations"),
    ("flow_inner", "int", 3, "IRLS iterations"),
    ("flow_sor", "int", 30, "SOR sweeps"),
    ("flow_omega", "float", 1.8, "SOR relaxation factor"),
    ("flow_eps", "float", 1e-3, "Charbonnier epsilon"),
    # fusion
    ("fusion_method", "str", "alpha_blend", "alpha_blend or wavelet"),
    ("w_hr", "float", 0.55, "HR weight for alpha blending"),
    ("w_lr", "float", 0.45, "LR weight for alpha blending"),
    ("wavelet_levels", "int", 2, "Haar levels"),
    ("apply_imf", "flag", True, "photometrically match HR to the centre view"),
    ("apply_vignette", "flag", False, "apply vignetting gains before flow"),
    ("reg_sigma", "float", -1.0, "registration prefilter sigma (negative = automatic)"),
    ("write_views", "flag", False, "also write per-view PNGs"),
    # occlusion
    ("tau", "float", 0.175, "occlusion residual threshold"),
    ("dilate", "int", 0, "occlusion mask dilation radius"),
    # lenslet decoding
    ("lenslet_u", "int", 9, "pixels per lenslet vertically (U)"),
    ("lenslet_v", "int", 9, "pixels per lenslet horizontally (V)"),
    ("offset_y", "int", 0, "raw mosaic row offset"),
    ("offset_x", "int", 0, "raw mosaic column offset"),
    # synthetic rig
    ("scene", "str", "default", "default, planar or staircase"),
    ("U", "int", 9, "angular rows"),
    ("V", "int", 9, "angular columns"),
    ("delta_b", "float", 0.0005, "per-step intra-field baseline, m"),
    ("hr_offset", "float", 0.04, "HR camera offset from the grid centre, m"),
    ("k", "int", 4, "LR downsample factor"),
    ("hr_height", "int", 384, "HR rows"),
    ("hr_width", "int", 384, "HR columns"),
    ("plane_depth", "float", 2.0, "depth of the planar scene, m"),
    ("hr_gamma", "float", 1.0, "photometric gamma applied to the HR camera"),
    ("vignette", "float", 0.0, "corner darkening of the synthetic LR views"),
    # refocus / EPI
    ("slope", "float", 0.0, "refocus slope, px per angular step"),
    ("sweep", "flag", False, "sweep slopes instead of a single refocus"),
    ("slope_min", "float", -2.0, "sweep start"),
    ("slope_max", "float", 2.0, "sweep end (inclusive)"),
    ("slope_step", "float", 0.25, "sweep increment"),
    ("exclude_corners", "flag", False, "leave the four corner views out of refocusing"),
    ("normalize", "flag", True, "boundary-normalized refocus"),
    ("epi_row", "int", -1, "spatial row of the horizontal EPI (-1 = middle)"),
    ("epi_col", "int", -1, "spatial column of the vertical EPI (-1 = middle)"),
    ("epi_u", "int", -1, "angular row of the horizontal EPI (-1 = centre)"),
    ("epi_v", "int", -1, "angular column of the vertical EPI (-1 = centre)"),
    # depth
    ("focal_px", "float", 1000.0, "focal length, px"),
    ("baseline_m", "float", 0.04, "stereo baseline, m"),
    ("depth_method", "str", "flow", "flow or block"),
    ("max_disparity", "int", 64, "block-matching search range"),
    ("bm_window", "int", 5, "block-matching window (odd)"),
    ("max_vertical", "float", 1.0, "flow disparity validity bound on vertical motion"),
    ("eps_d", "float", 1.0, "disparity error, px"),
    ("error_bound", "float", 0.1, "depth error bound for the range report, m"),
)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_flag(text: str) -> bool:
    t = str(text).strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(key: Key, raw: str):
    if key.kind == "int":
        return int(raw)
    if key.kind == "float":
        return float(raw)
    if key.kind == "flag":
        return parse_flag(raw)
    return raw


class Config:
    """Layered values: defaults < file < overrides."""

    def __init__(self, values: Mapping[str, str] | None = None, overrides: Mapping[str, str] | None = None):
        self._file: dict[str, Any] = {}
        self._over: dict[str, Any] = {}
        for src, dst in ((values or {}, self._file), (overrides or {}, self._over)):
            for name, raw in src.items():
                dst[name] = self._typed(name, raw)

    @staticmethod
    def _typed(name: str, raw, where: str = ""):
        if name not in KEYS:
            raise ConfigError(f"unknown config key {name!r}{where}")
        key = KEYS[name]
        if not isinstance(raw, str):
            return raw
        try:
            return _convert(key, raw)
        except ValueError:
            raise ConfigError(f"bad {key.kind} value {raw!r} for {name!r}{where}") from None

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "Config":
        cfg = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{source}:{lineno}: expected key = value")
            name, raw = (s.strip() for s in body.split("=", 1))
            cfg._file[name] = cls._typed(name, raw, f" at {source}:{lineno}")
        return cfg

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(path)
        return cls.parse(path.read_text(), str(path))

    def override(self, **values) -> "Config":
        """Copy with command-line values applied; ``None`` means the flag was not given."""
        new = Config()
        new._file = dict(self._file)
        new._over = dict(self._over)
        for name, raw in values.items():
            if raw is not None:
                new._over[name] = self._typed(name, raw)
        return new

    def get(self, name: str):
        if name not in KEYS:
            raise ConfigError(f"unknown config key {name!r}")
        if name in self._over:
            return self._over[name]
        if name in self._file:
            return self._file[name]
        return KEYS[name].default

    def _typed_get(self, name, kind):
        if KEYS.get(name) is None or KEYS[name].kind != kind:
            raise ConfigError(f"{name!r} is not a {kind} key")
        return self.get(name)

    def int(self, name: str) -> int:
        return self._typed_get(name, "int")

    def float(self, name: str) -> float:
        return self._typed_get(name, "float")

    def str(self, name: str) -> str:
        return self._typed_get(name, "str")

    def flag(self, name: str) -> bool:
        return self._typed_get(name, "flag")

    def threads(self) -> int:
        n = self.int("threads")
        return n if n > 0 else (os.cpu_count() or 1)
