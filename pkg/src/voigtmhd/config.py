"""TOML run configuration with strict key checking."""
from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dynamics import InitialCondition, VoigtParams
from .errors import ConfigurationError
from .growth import GrowthConfig
from .relax import RelaxationConfig

_NUM = (int, float)

SCHEMA = {
    "grid": {"n": int},
    "physics": {"alpha": _NUM, "nu": _NUM},
    "time": {"dt": _NUM, "cfl": _NUM, "t_max": _NUM, "sample_interval": _NUM},
    "init": {
        "kind": str, "seed": int, "k0": _NUM, "amplitude": _NUM, "u_amplitude": _NUM,
        "abc": {"a": _NUM, "b": _NUM, "c": _NUM},
    },
    "relax": {"defect_tolerance": _NUM, "convergence_factor": _NUM},
    "output": {"dir": str, "checkpoint_interval": _NUM, "figures": bool},
    "growth": {
        "model": str, "n": int, "t_max": _NUM, "dt": _NUM,
        "fit_window": list, "sample_interval": _NUM,
    },
}

REQUIRED = ("grid.n", "physics.alpha", "physics.nu", "init.kind")
INIT_KINDS = ("abc", "random_solenoidal", "random")


def _check(table, schema, prefix):
    for key, value in table.items():
        name = f"{prefix}{key}"
        if key not in schema:
            what = "section" if not prefix else "key"
            raise ConfigurationError(f"unknown {what} {name!r}")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{name!r} must be a table")
            _check(value, expected, f"{name}.")
            continue
        ok = isinstance(value, expected) and not (isinstance(value, bool) and expected is not bool)
        if not ok:
            raise ConfigurationError(f"{name!r} has wrong type {type(value).__name__}")


def _get(doc, dotted, default=None):
    node = doc
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _growth_config(doc):
    g = doc["growth"]
    window = g.get("fit_window")
    if window is not None:
        if len(window) != 2 or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in window):
            raise ConfigurationError("'growth.fit_window' must be a pair of numbers")
        window = tuple(float(v) for v in window)
    kwargs = {k: g[k] for k in ("model", "n", "t_max", "dt", "sample_interval") if k in g}
    for k in ("t_max", "dt", "sample_interval"):
        if k in kwargs:
            kwargs[k] = float(kwargs[k])
    return GrowthConfig(fit_window=window, **kwargs)


def build_config(doc):
    """Validate a parsed document and build the run configuration it describes."""
    _check(doc, SCHEMA, "")
    if "growth" in doc:
        others = set(doc) - {"growth", "output"}
        if others:
            raise ConfigurationError(f"growth configs cannot contain sections {sorted(others)}")
        return _growth_config(doc)

    for key in REQUIRED:
        if _get(doc, key) is None:
            raise ConfigurationError(f"missing required key {key!r}")

    kind = _get(doc, "init.kind")
    if kind not in INIT_KINDS:
        raise ConfigurationError(f"'init.kind' must be one of {INIT_KINDS} (got {kind!r})")

    alpha = float(_get(doc, "physics.alpha"))
    if alpha < 1.0:
        raise ConfigurationError(
            f"'physics.alpha' = {alpha} violates alpha >= 1 (needed for global well-posedness)")
    dt = _get(doc, "time.dt")
    params = VoigtParams(
        alpha=alpha,
        nu=float(_get(doc, "physics.nu")),
        cfl=float(_get(doc, "time.cfl", 0.4)),
        dt_override=None if dt is None else float(dt),
    )

    abc = _get(doc, "init.abc", {})
    init_kwargs = {"kind": kind, "abc": tuple(float(abc.get(c, 1.0)) for c in "abc")}
    for key, cast in (("seed", int), ("k0", float), ("amplitude", float), ("u_amplitude", float)):
        value = _get(doc, f"init.{key}")
        if value is not None:
            init_kwargs[key] = cast(value)
    init = InitialCondition(**init_kwargs)

    ci = _get(doc, "output.checkpoint_interval")
    return RelaxationConfig(
        n=_get(doc, "grid.n"),
        params=params,
        init=init,
        t_max=float(_get(doc, "time.t_max", RelaxationConfig.t_max)),
        sample_interval=float(_get(doc, "time.sample_interval", 0.05)),
        defect_tolerance=float(_get(doc, "relax.defect_tolerance", 1e-6)),
        convergence_factor=float(_get(doc, "relax.convergence_factor", 100.0)),
        output_dir=_get(doc, "output.dir"),
        checkpoint_interval=None if ci is None else float(ci),
        figures=bool(_get(doc, "output.figures", True)),
    )


def parse_config(path):
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return build_config(doc)
