"""Experiment configuration: defaults, config files and flag overrides."""

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from dotenv import dotenv_values

from halfpack.core.engine import InitKind
from halfpack.core.model import ModelParams
from halfpack.core.observables import DEFAULT_I_LIST, INF, WindowSpec
from halfpack.utils.errors import ConfigurationError

DEFAULT_R_VALUES: Tuple[float, ...] = (125, 250, 500, 1000, 2000)
DEFAULT_SNAPSHOT_TIMES: Tuple[float, ...] = tuple(float(t) for t in range(11))


@dataclass
class ExperimentConfig:
    """
    One sweep or run.

    ``y`` and ``delta`` left as None resolve to y = p1 + p2 and
    delta = 0.1 (y - p1).
    """

    master_seed: Optional[int] = None
    r_values: List[float] = field(default_factory=lambda: list(DEFAULT_R_VALUES))
    p1: float = 0.5
    y: Optional[float] = None
    delta: Optional[float] = None
    i_list: List[float] = field(default_factory=lambda: list(DEFAULT_I_LIST))
    warmup: float = 10.0
    horizon: float = 110.0
    replications: int = 8
    batches: int = 20
    init: InitKind = InitKind.EMPTY
    snapshot: Optional[Path] = None
    output_dir: Path = Path("results")
    snapshot_times: List[float] = field(default_factory=lambda: list(DEFAULT_SNAPSHOT_TIMES))
    cells_per_row: int = 100
    workers: int = 1

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def window_y(self) -> float:
        return self.p1 + self.p2 if self.y is None else self.y

    @property
    def window_delta(self) -> float:
        return 0.1 * (self.window_y - self.p1) if self.delta is None else self.delta

    def params(self, r: float) -> ModelParams:
        return ModelParams.from_p1(r, self.p1)

    def window(self) -> WindowSpec:
        return WindowSpec(y=self.window_y, delta=self.window_delta, i_list=tuple(self.i_list))

    def z_limit(self) -> Optional[float]:
        """Limit of F2(y r)/r, defined when p1 < y < p1 + 2 p2."""
        y = self.window_y
        if self.p1 < y < self.p1 + 2 * self.p2:
            return (y - self.p1) / 2
        return None

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready echo of the resolved configuration."""
        data = asdict(self)
        data["y"] = self.window_y
        data["delta"] = self.window_delta
        data["i_list"] = [_format_cap(i) for i in self.i_list]
        data["init"] = self.init.value
        data["snapshot"] = str(self.snapshot) if self.snapshot else None
        data["output_dir"] = str(self.output_dir)
        return data


def _format_cap(i: float) -> Union[int, str]:
    return "inf" if math.isinf(i) else int(i)


def _split(raw: str) -> List[str]:
    return [part for part in raw.replace(",", " ").split() if part]


def _float_list(raw: str) -> List[float]:
    return [float(part) for part in _split(raw)]


def _cap_list(raw: str) -> List[float]:
    caps = []
    for part in _split(raw):
        if part.lower() in ("inf", "infinity", "∞"):
            caps.append(INF)
        else:
            caps.append(int(part))
    return caps


# Config-file key -> (field name, parser)
_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "MASTER_SEED": ("master_seed", int),
    "R_VALUES": ("r_values", _float_list),
    "P1": ("p1", float),
    "Y": ("y", float),
    "DELTA": ("delta", float),
    "I_LIST": ("i_list", _cap_list),
    "WARMUP": ("warmup", float),
    "HORIZON": ("horizon", float),
    "REPLICATIONS": ("replications", int),
    "BATCHES": ("batches", int),
    "INIT": ("init", lambda raw: InitKind(raw.strip().lower())),
    "SNAPSHOT": ("snapshot", Path),
    "OUTPUT_DIR": ("output_dir", Path),
    "SNAPSHOT_TIMES": ("snapshot_times", _float_list),
    "CELLS_PER_ROW": ("cells_per_row", int),
    "WORKERS": ("workers", int),
}


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a commented KEY=VALUE file into field overrides.

    Relative SNAPSHOT and OUTPUT_DIR paths are resolved against the file's
    directory.

    Raises:
        ConfigurationError: On a missing file, an unknown key or a bad value
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")

    overrides: Dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        name = key.strip().upper()
        if name not in _KEYS:
            raise ConfigurationError(
                f"Unknown config key {key!r} in {path}",
                suggestion=f"Known keys: {', '.join(_KEYS)}",
            )
        if raw is None or not raw.strip():
            raise ConfigurationError(f"Config key {key} in {path} has no value")
        field_name, parse = _KEYS[name]
        try:
            value = parse(raw)
        except ValueError as e:
            raise ConfigurationError(
                f"Bad value for {key} in {path}: {raw!r}", details=str(e)
            ) from e
        if isinstance(value, Path) and not value.is_absolute():
            value = path.parent / value
        overrides[field_name] = value
    return overrides


def build_config(
    path: Optional[Union[str, Path]] = None, **overrides: Any
) -> ExperimentConfig:
    """
    Defaults, then the config file, then explicit overrides.

    Overrides whose value is None are ignored, so unset CLI flags can be
    passed straight through.
    """
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigurationError(f"Unknown setting(s): {', '.join(sorted(unknown))}")

    config = ExperimentConfig()
    if path is not None:
        config = replace(config, **load_config_file(path))
    given = {k: v for k, v in overrides.items() if v is not None}
    if "init" in given:
        try:
            given["init"] = InitKind(given["init"])
        except ValueError as e:
            raise ConfigurationError(f"Unknown initial state {given['init']!r}") from e
    return replace(config, **given)


def parse_list_flag(raw: Optional[str], caps: bool = False) -> Optional[List[float]]:
    """Parse a comma-separated CLI flag; None passes through."""
    if raw is None:
        return None
    try:
        return _cap_list(raw) if caps else _float_list(raw)
    except ValueError as e:
        raise ConfigurationError(f"Cannot parse list {raw!r}", details=str(e)) from e
