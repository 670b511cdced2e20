"""Scenario files: sectioned key/value text parsed with :mod:`configparser`.

Every value is validated when the scenario is loaded so that a bad file is
rejected before any stage runs or any artifact is written.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .coupling import DEFAULT_BOX
from .errors import ConfigError, DomainError
from .grid import GridSpec, layered_velocity
from .model import ReactionParams
from .synthesis import VARIANTS

VARIANT_CHOICES = VARIANTS + ("both",)


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: GridSpec
    tau_na: float
    reaction: ReactionParams
    operating_point: tuple
    search_box: tuple = DEFAULT_BOX
    resolution: int = 21
    variant: str = "both"
    reduced: bool = False
    lambdas: Optional[tuple] = None
    initial_product: Optional[float] = None
    disturbance_gamma: Optional[float] = None
    t_end: float = 1500.0
    dt: float = 0.01
    stride: int = 100
    x0: float = 1e-4
    xhat0: float = 3e-4
    xd0: float = 1.0
    xhat_d0: float = 0.0
    u_levels: tuple = (1e-2, 0.0, 0.0)
    eps_cross: float = 1e-4
    output_dir: str = "out"
    full_state: bool = False

    def variants(self) -> tuple:
        return VARIANTS if self.variant == "both" else (self.variant,)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "variant" in kw and kw["variant"] not in VARIANT_CHOICES:
            raise ConfigError(f"variant must be one of {VARIANT_CHOICES}")
        out = replace(self, **kw)
        _check_sim(out)
        if out.reduced:
            _check_reduction(out)
        return out


def _floats(text, count=None, what="value"):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what}: {text!r}") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"{what} needs {count} comma-separated numbers, got {len(vals)}")
    return vals


def _sensors(text):
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        j, k = _floats(item, 2, "sensor")
        if j != int(j) or k != int(k):
            raise ConfigError(f"sensor coordinates must be integers: {item!r}")
        out.append((int(j), int(k)))
    return tuple(out)


def _check_sim(sc):
    if not (sc.dt > 0 and np.isfinite(sc.dt)):
        raise ConfigError(f"simulation dt must be positive, got {sc.dt}")
    if not (np.isfinite(sc.t_end) and sc.t_end >= sc.dt):
        raise ConfigError(f"simulation t_end must be >= dt, got {sc.t_end}")
    if sc.stride < 1:
        raise ConfigError("simulation stride must be >= 1")
    if not sc.eps_cross > 0:
        raise ConfigError("crossing threshold must be positive")


def _check_reduction(sc):
    if sc.lambdas is None or len(sc.lambdas) != 3 or any(not v > 0 for v in sc.lambdas):
        raise ConfigError("reduced scenario needs three positive decay rates")
    if sc.initial_product is None or sc.initial_product < 0:
        raise ConfigError("reduced scenario needs a nonnegative initial_product")
    if sc.disturbance_gamma is None or sc.disturbance_gamma < 0:
        raise ConfigError("reduced scenario needs a nonnegative disturbance bound gamma")


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario: {exc}") from exc
    try:
        return _build(cp, name)
    except (DomainError, KeyError, ValueError, configparser.Error) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scenario {name}: {exc}") from exc


def _build(cp, name):
    for sec in ("grid", "reaction", "coupling", "simulation"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing section [{sec}]")
    g = cp["grid"]
    N = g.getint("N")
    if "vy" in g:
        vy = g.getfloat("vy")
    else:
        vy = layered_velocity(N, g.getfloat("vy_upper"), g.getfloat("vy_lower"))
    grid = GridSpec(
        N=N,
        spacing=g.getfloat("spacing"),
        vx=g.getfloat("vx"),
        vy=vy,
        diffusivity=g.getfloat("diffusivity"),
        sensors=_sensors(g.get("sensors")),
        y_axis=g.get("y_axis", "down").strip(),
    )
    tau = g.getfloat("tau_na")
    if not tau > 0:
        raise ConfigError("tau_na must be positive")

    r = cp["reaction"]
    reaction = ReactionParams(r.getfloat("r_max"), r.getfloat("K_na"), r.getfloat("K_oc"))
    op = _floats(cp["coupling"].get("operating_point"), 3, "operating_point")
    if any(not c > 0 for c in op):
        raise ConfigError(f"operating point must be strictly positive, got {op}")

    box, resolution = DEFAULT_BOX, 21
    if cp.has_section("lipschitz"):
        lp = cp["lipschitz"]
        box = tuple(
            _floats(lp.get(f"box_{s}"), 2, f"box_{s}") if f"box_{s}" in lp else DEFAULT_BOX[i]
            for i, s in enumerate(("na", "oc", "mi"))
        )
        for lo, hi in box:
            if lo < 0 or hi < lo:
                raise ConfigError(f"invalid Lipschitz search interval [{lo}, {hi}]")
        resolution = lp.getint("resolution", 21)
        if resolution < 2:
            raise ConfigError("Lipschitz resolution must be >= 2")

    variant = "both"
    if cp.has_section("observer"):
        variant = cp["observer"].get("variant", "both").strip()
    if variant not in VARIANT_CHOICES:
        raise ConfigError(f"variant must be one of {VARIANT_CHOICES}, got {variant!r}")

    red = {"reduced": False}
    if cp.has_section("reduction"):
        rd = cp["reduction"]
        red["reduced"] = rd.getboolean("enabled", False)
        if "lambda" in rd:
            red["lambdas"] = _floats(rd.get("lambda"), 3, "lambda")
        if "initial_product" in rd:
            red["initial_product"] = rd.getfloat("initial_product")
        if "gamma" in rd:
            red["disturbance_gamma"] = rd.getfloat("gamma")

    s = cp["simulation"]
    sim = dict(
        t_end=s.getfloat("t_end", 1500.0),
        dt=s.getfloat("dt", 0.01),
        stride=s.getint("stride", 100),
        x0=s.getfloat("x0", 1e-4),
        xhat0=s.getfloat("xhat0", 3e-4),
        xd0=s.getfloat("xd0", 1.0),
        xhat_d0=s.getfloat("xhat_d0", 0.0),
        u_levels=_floats(s.get("u", "1e-2, 0, 0"), 3, "u"),
        eps_cross=s.getfloat("eps_cross", 1e-4),
    )
    out = {}
    if cp.has_section("output"):
        o = cp["output"]
        out = dict(output_dir=o.get("directory", "out"), full_state=o.getboolean("full_state", False))

    sc = Scenario(
        name=name, grid=grid, tau_na=tau, reaction=reaction, operating_point=op,
        search_box=box, resolution=resolution, variant=variant, **red, **sim, **out,
    )
    _check_sim(sc)
    if sc.reduced:
        _check_reduction(sc)
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, path.stem)


def bundled_scenario(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package (``table1``, ``table2_reduced``)."""
    res = resources.files("soilobs") / "scenarios" / f"{name}.scenario"
    if not res.is_file():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return parse_scenario(res.read_text(), name)
