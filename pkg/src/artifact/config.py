"""Run configuration: a single INI-style document with nested sections.

Grammar (all keys optional unless noted)::

    [run]
    suite = all                 ; comma-separated suite names, in order
    window = 2                  ; grading bound for windowed computations
    tol = 1e-8
    seed = 0
    samples = 20                ; random samples per sampled check

    [model]
    kind = group                ; group | cuntz | semicircular   (required)
    group = Z4                  ; named group (group models)
    group_table = path.txt      ; or a whitespace multiplication table, identity first
    action = permutation        ; permutation | inner
    block_dim = 1
    cocycle = trivial           ; trivial | coboundary | klein
    n = 2                       ; cuntz generators
    depth = 3                   ; cuntz level
    semicircular = scalar       ; scalar | block
    degree_cap = 6

    [object]
    kind = group-algebra        ; group-algebra | cuntz | trivial
    fibers = all                ; "all" or comma-separated element names; must contain the unit

The canonical serialization sorts sections and keys, so hashing it identifies
a configuration independently of formatting.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

SUITES = ("axioms", "crossed", "peter-weyl", "frobenius", "galois", "freeness", "cuntz", "semicircular")

DEFAULTS = {
    "run": {"suite": "all", "window": "2", "tol": "1e-8", "seed": "0", "samples": "20"},
    "model": {"action": "permutation", "block_dim": "1", "cocycle": "trivial", "n": "2", "depth": "3",
              "semicircular": "scalar", "degree_cap": "6"},
    "object": {"kind": "", "fibers": "all"},
}


class ConfigError(ValueError):
    """A configuration that does not parse or does not validate."""

    def __init__(self, field_name: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}[{field_name}] {message}")
        self.field = field_name
        self.line = line


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)

    # typed accessors ---------------------------------------------------------------
    def get(self, section: str, key: str) -> str:
        return self.sections.get(section, {}).get(key, DEFAULTS.get(section, {}).get(key, ""))

    def _num(self, section: str, key: str, kind):
        raw = self.get(section, key)
        try:
            return kind(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"expected {kind.__name__}, got {raw!r}") from None

    @property
    def suites(self) -> list[str]:
        raw = [s.strip() for s in self.get("run", "suite").split(",") if s.strip()]
        out = []
        for s in raw:
            if s == "all":
                out.extend(x for x in SUITES if x not in out)
            elif s == "none":
                continue
            elif s not in SUITES:
                raise ConfigError("run.suite", f"unknown suite {s!r}")
            elif s not in out:
                out.append(s)
        return out

    @property
    def window(self) -> int:
        return self._num("run", "window", int)

    @property
    def tol(self) -> float:
        return self._num("run", "tol", float)

    @property
    def seed(self) -> int:
        return self._num("run", "seed", int)

    @property
    def samples(self) -> int:
        return self._num("run", "samples", int)

    @property
    def kind(self) -> str:
        return self.get("model", "kind")

    def override(self, section: str, key: str, value) -> None:
        if value is not None:
            self.sections.setdefault(section, {})[key] = str(value)

    # serialization -----------------------------------------------------------------
    def dumps(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for sec in sorted(self.sections):
            cp[sec] = {k: self.sections[sec][k] for k in sorted(self.sections[sec])}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def validate(self) -> "RunConfig":
        kind = self.kind
        if kind not in ("group", "cuntz", "semicircular"):
            raise ConfigError("model.kind", f"expected group, cuntz or semicircular, got {kind!r}")
        for key in ("window", "seed", "samples"):
            if self._num("run", key, int) < 0:
                raise ConfigError(f"run.{key}", "must be non-negative")
        if self.tol <= 0:
            raise ConfigError("run.tol", "must be positive")
        self.suites
        if kind == "group":
            if not (self.get("model", "group") or self.get("model", "group_table")):
                raise ConfigError("model.group", "group models need a group name or a table file")
            if self.get("model", "action") not in ("permutation", "inner"):
                raise ConfigError("model.action", "expected permutation or inner")
            if self.get("model", "cocycle") not in ("trivial", "coboundary", "klein"):
                raise ConfigError("model.cocycle", "expected trivial, coboundary or klein")
            obj = self.get("object", "kind") or "group-algebra"
            if obj not in ("group-algebra", "trivial"):
                raise ConfigError("object.kind", f"{obj!r} is not available for group models")
        if kind == "cuntz":
            if self._num("model", "n", int) < 2 or self._num("model", "depth", int) < 2:
                raise ConfigError("model.n", "cuntz models need n >= 2 and depth >= 2")
        if kind == "semicircular":
            if self.get("model", "semicircular") not in ("scalar", "block"):
                raise ConfigError("model.semicircular", "expected scalar or block")
            if self._num("model", "degree_cap", int) < 2:
                raise ConfigError("model.degree_cap", "must be at least 2")
        return self


def loads(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("document", "text before the first [section]", e.lineno) from None
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"{e.section}.{e.option}", "duplicate key", e.lineno) from None
    except configparser.DuplicateSectionError as e:
        raise ConfigError(e.section, "duplicate section", e.lineno) from None
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("document", "unparsable line", line) from None
    known = {"run", "model", "object"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(sec, f"unknown section (expected one of {sorted(known)})")
    return RunConfig({sec: dict(cp[sec]) for sec in cp.sections()})


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("document", f"cannot read {path}: {e.strerror}") from None
    return loads(text)
