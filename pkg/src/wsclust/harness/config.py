"""Sweep configuration: a flat ``key = value`` text file."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..errors import ConfigurationError
from ..oracles import CORRUPTION_MODES

ALGORITHMS = ("kmeans-ws", "kcenter-ws", "kmeans-strong", "kmeans-weak",
              "gonzalez-strong", "gonzalez-weak")
WORKERS_ENV = "WSCLUST_WORKERS"
WEAK_MODES = CORRUPTION_MODES + ("perturbed-matrix",)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a dataset, an algorithm and a grid of (delta, constant) cells.

    ``dataset`` is ``sbm``, ``hard`` or a file path (points CSV, or a
    distance matrix with optional ``labels``). Constants scale the strong
    query budget; ``None`` in ``constants`` runs the algorithm's defaults.
    """

    algo: str = "kmeans-ws"
    dataset: str = "sbm"
    n: int = 2000
    k_true: int = 7
    k: Optional[int] = None
    scale: float = 1e5
    l: Optional[float] = None
    labels: Optional[str] = None
    dataset_seed: int = 0
    deltas: tuple = (0.1,)
    constants: tuple = (None,)
    repeats: int = 5
    eps: float = 0.5
    seed: int = 0
    c_ball: float = 0.05
    c_iter: Optional[float] = None
    c_sample: float = 0.05
    corruption: Optional[str] = None
    budget_cap: Optional[int] = None
    search_mode: str = "binary"
    log_base: float = 2.0
    workers: Optional[int] = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algo!r}; expected one of {ALGORITHMS}")
        if self.repeats < 1:
            raise ConfigurationError("repeats must be at least 1")
        if not self.deltas:
            raise ConfigurationError("need at least one delta")
        for d in self.deltas:
            if not 0 <= d < 0.5:
                raise ConfigurationError(f"delta {d} is outside [0, 1/2)")
        if not self.constants:
            raise ConfigurationError("need at least one constant (use 'default')")
        for c in self.constants:
            if c is not None and c <= 0:
                raise ConfigurationError(f"constant {c} must be positive")
        if self.corruption is not None and self.corruption not in WEAK_MODES:
            raise ConfigurationError(f"unknown corruption {self.corruption!r}")
        if self.search_mode not in ("binary", "linear"):
            raise ConfigurationError(f"unknown search mode {self.search_mode!r}")
        if self.dataset in ("sbm", "hard") and not 1 <= self.k_true <= self.n:
            raise ConfigurationError("need 1 <= k_true <= n")
        if self.workers is not None and self.workers < 1:
            raise ConfigurationError("workers must be positive")

    @property
    def target_k(self) -> int:
        return self.k if self.k is not None else self.k_true

    def worker_cap(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
            if value < 1:
                raise ConfigurationError(f"{WORKERS_ENV} must be positive")
            return value
        return 1

    def with_(self, **kw) -> "SweepSpec":
        return replace(self, **kw)


def _opt_float(v: str) -> Optional[float]:
    return None if v.lower() in ("", "none", "default") else float(v)


def _opt_int(v: str) -> Optional[int]:
    return None if v.lower() in ("", "none", "default") else int(v)


def _float_list(v: str) -> tuple:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _const_list(v: str) -> tuple:
    return tuple(_opt_float(x) for x in v.replace(",", " ").split())


_PARSERS = {
    "algo": str, "dataset": str, "n": int, "k_true": int, "k": _opt_int, "scale": float,
    "l": _opt_float, "labels": str, "dataset_seed": int, "deltas": _float_list,
    "constants": _const_list, "repeats": int, "eps": float, "seed": int, "c_ball": float,
    "c_iter": _opt_float, "c_sample": float, "corruption": str, "budget_cap": _opt_int,
    "search_mode": str, "log_base": float, "workers": _opt_int,
}
CONFIG_KEYS = tuple(_PARSERS)


def parse_config(text: str, base_dir=None) -> SweepSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in kw:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            kw[key] = _PARSERS[key](value)
        except ValueError:
            raise ConfigurationError(f"line {lineno}: bad value {value!r} for {key}") from None
    if base_dir is not None:
        for key in ("dataset", "labels"):
            v = kw.get(key)
            if v and v not in ("sbm", "hard") and not Path(v).is_absolute():
                kw[key] = str(Path(base_dir) / v)
    return SweepSpec(**kw)


def load_config(path) -> SweepSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=p.parent)
