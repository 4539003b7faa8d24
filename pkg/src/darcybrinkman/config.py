"""Run configuration: parsing, validation, canonical rendering.

Format: one ``section.key = value`` per line, ``#`` starts a comment,
blank lines ignored.  Matrices are row-major comma-separated lists; the
epsilon sweep is a comma-separated strictly decreasing list in (0, 1).

Every diagnostic names the offending key and line number.  ``render_config``
emits a canonical file that parses back to an identical RunConfig, which the
CLI round-trip tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .coefficients import PRESETS, CoefficientSet, ForcingSet, forcing_preset
from .grids import DomainSpec, GridPair, DofLayout, build_grids

DEFAULT_EPSILONS = (0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625)


class ConfigError(ValueError):
    def __init__(self, key: str, line: int, message: str):
        super().__init__(f"{self.__class__.__name__}: {key} (line {line}): {message}")
        self.key = key
        self.line = line


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass


@dataclass(frozen=True)
class RunConfig:
    porous_width: float = 1.0
    porous_depth: float = 1.0
    nx: int = 64
    ny: int = 64
    nz: int = 64
    Q: tuple = (1.0, 0.0, 0.0, 1.0)
    mu: float = 1.0
    alpha: float = 0.0
    beta: float = 1.0
    preset: str = "constant"
    f2_T: float = 1.0
    f2_N: float = 0.0
    h1: float = 1.0
    pert_f2_T: float = 0.0
    pert_f2_N: float = 0.0
    pert_h1: float = 0.0
    epsilons: tuple = DEFAULT_EPSILONS
    inner: str = "direct"
    inner_tol: float = 1e-13
    outer_tol: float = 1e-12
    output_dir: str = "out"
    dump_fields: bool = False

    # --- factories ------------------------------------------------------------
    def domain_spec(self) -> DomainSpec:
        return DomainSpec(porous_width=self.porous_width,
                          porous_depth=self.porous_depth)

    def coefficient_set(self) -> CoefficientSet:
        return CoefficientSet(Q=np.array(self.Q).reshape(2, 2), mu=self.mu,
                              alpha=self.alpha, beta=self.beta)

    def forcing_set(self) -> ForcingSet:
        if self.preset == "zero":
            return forcing_preset("zero")
        if self.preset == "constant":
            return forcing_preset("constant", f2_T=self.f2_T, f2_N=self.f2_N,
                                  h1=self.h1)
        return forcing_preset("eps-perturbed", f2_T=self.f2_T, f2_N=self.f2_N,
                              h1=self.h1, pert_f2_T=self.pert_f2_T,
                              pert_f2_N=self.pert_f2_N, pert_h1=self.pert_h1)

    def grids(self) -> tuple[GridPair, DofLayout]:
        return build_grids(self.domain_spec(), self.nx, self.ny, self.nz)

    def solver_options(self) -> dict:
        return {"inner": self.inner, "inner_tol": self.inner_tol,
                "outer_tol": self.outer_tol}


def _parse_float(raw, key, line) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise TypeMismatch(key, line, f"expected a number, got '{raw}'") from None
    if not np.isfinite(v):
        raise ConstraintViolation(key, line, f"value must be finite, got {raw}")
    return v


def _parse_int(raw, key, line) -> int:
    try:
        return int(raw)
    except ValueError:
        raise TypeMismatch(key, line, f"expected an integer, got '{raw}'") from None


def _parse_bool(raw, key, line) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise TypeMismatch(key, line, f"expected a boolean, got '{raw}'")


def _parse_floats(raw, key, line) -> tuple:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise TypeMismatch(key, line, "expected a comma-separated list")
    return tuple(_parse_float(s, key, line) for s in items)


# key -> (config attribute, parser)
_KEYS = {
    "geometry.porous_width": ("porous_width", _parse_float),
    "geometry.porous_depth": ("porous_depth", _parse_float),
    "resolution.nx": ("nx", _parse_int),
    "resolution.ny": ("ny", _parse_int),
    "resolution.nz": ("nz", _parse_int),
    "coefficients.Q": ("Q", _parse_floats),
    "coefficients.mu": ("mu", _parse_float),
    "coefficients.alpha": ("alpha", _parse_float),
    "coefficients.beta": ("beta", _parse_float),
    "forcing.preset": ("preset", lambda raw, k, l: raw.strip()),
    "forcing.f2_T": ("f2_T", _parse_float),
    "forcing.f2_N": ("f2_N", _parse_float),
    "forcing.h1": ("h1", _parse_float),
    "forcing.pert_f2_T": ("pert_f2_T", _parse_float),
    "forcing.pert_f2_N": ("pert_f2_N", _parse_float),
    "forcing.pert_h1": ("pert_h1", _parse_float),
    "sweep.epsilons": ("epsilons", _parse_floats),
    "solver.inner": ("inner", lambda raw, k, l: raw.strip()),
    "solver.inner_tol": ("inner_tol", _parse_float),
    "solver.outer_tol": ("outer_tol", _parse_float),
    "output.dir": ("output_dir", lambda raw, k, l: raw.strip()),
    "output.dump_fields": ("dump_fields", _parse_bool),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def _validate(cfg: RunConfig, lines: dict[str, int]) -> RunConfig:
    def where(key):
        return lines.get(key, 0)

    def reject(key, msg):
        raise ConstraintViolation(key, where(key), msg)

    if cfg.porous_width <= 0:
        reject("geometry.porous_width", "must be positive")
    if cfg.porous_depth <= 0:
        reject("geometry.porous_depth", "must be positive")
    for name in ("nx", "ny", "nz"):
        if getattr(cfg, name) < 2:
            reject(f"resolution.{name}", "resolution must be >= 2")
    if len(cfg.Q) != 4:
        reject("coefficients.Q", "expected 4 row-major entries")
    if abs(cfg.Q[1] - cfg.Q[2]) > 1e-12 * max(1.0, max(abs(q) for q in cfg.Q)):
        reject("coefficients.Q", "tensor must be symmetric")
    ev = np.linalg.eigvalsh(np.array(cfg.Q).reshape(2, 2))
    if ev[0] <= 0:
        reject("coefficients.Q", f"tensor must be elliptic (min eigenvalue {ev[0]:.3e})")
    if cfg.mu <= 0:
        reject("coefficients.mu", "must be positive")
    if cfg.alpha < 0:
        reject("coefficients.alpha", "must be nonnegative")
    if cfg.beta < 0:
        reject("coefficients.beta", "must be nonnegative")
    if cfg.preset not in PRESETS:
        reject("forcing.preset", f"unknown preset (known: {', '.join(PRESETS)})")
    if not cfg.epsilons:
        reject("sweep.epsilons", "list must not be empty")
    if any(e <= 0 or e >= 1 for e in cfg.epsilons):
        reject("sweep.epsilons", "every epsilon must lie in (0, 1)")
    if any(b >= a for a, b in zip(cfg.epsilons, cfg.epsilons[1:])):
        reject("sweep.epsilons", "list must be strictly decreasing")
    if cfg.inner not in ("direct", "cg"):
        reject("solver.inner", "must be 'direct' or 'cg'")
    if cfg.inner_tol <= 0 or cfg.outer_tol <= 0:
        reject("solver.inner_tol" if cfg.inner_tol <= 0 else "solver.outer_tol",
               "tolerance must be positive")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a validated RunConfig."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise TypeMismatch(stripped.split()[0], lineno,
                               "expected 'section.key = value'")
        key, raw_value = (s.strip() for s in stripped.split("=", 1))
        if key not in _KEYS:
            raise UnknownKey(key, lineno, "unknown configuration key")
        attr, parser = _KEYS[key]
        values[attr] = parser(raw_value, key, lineno)
        lines[key] = lineno
    return _validate(RunConfig(**values), lines)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(render(cfg)) reproduces cfg exactly."""
    out = []
    for f in dc_fields(RunConfig):
        out.append(f"{_ATTR_TO_KEY[f.name]} = {_fmt(getattr(cfg, f.name))}")
    return "\n".join(out) + "\n"
