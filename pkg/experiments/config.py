"""
Experiment configuration and the metrics row every run produces.

Config files are flat key=value text with '#' comments. Keys are the
command flags without the leading dashes; flags given on the command line
override the file.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from congest.config import SimConfig

from .exceptions import ConfigFileError

SCHEMES = ('routing', 'tight', 'sketch', 'diameter', 'gsf')

# Schemes parameterized by alpha; the rest take k.
ALPHA_SCHEMES = ('routing', 'tight')

FAMILY_KEYS = ('n', 'p', 'rows', 'cols', 'm', 'omega', 'A', 'B', 'weights')

# Config-file spellings of flags whose dest differs from the flag name.
KEY_ALIASES = {'set_a': 'A', 'set_b': 'B'}


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip().lstrip('-').replace('-', '_')
        if not sep or not key:
            raise ConfigFileError(f"expected key=value, got {raw.strip()!r}", line_no)
        values[KEY_ALIASES.get(key, key)] = value.strip()
    return values


def load_config_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config file {path}: {exc.strerror}")
    return parse_config_text(text)


def merge_options(file_values: Mapping[str, Any], flags: Mapping[str, Any]) -> dict[str, Any]:
    """File values overridden by every flag that was actually given (not None)."""
    merged = dict(file_values)
    merged.update({key: value for key, value in flags.items() if value is not None})
    return merged


def parse_list(text: str | None) -> list[str]:
    """'32,64' -> ['32', '64']; 'a..b' expands to the integers a..b."""
    if text is None:
        return []
    items = []
    for part in str(text).split(','):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition('..')
        if sep:
            items.extend(str(i) for i in range(int(lo), int(hi) + 1))
        else:
            items.append(part)
    return items


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated run: a graph source, a scheme and its parameter."""
    scheme: str
    n: int
    graph: str | None = None
    family: str | None = None
    params: dict[str, Any] = field(default_factory=dict)
    alpha: Fraction | None = None
    k: int | None = None
    seed: int = 0
    bits: int | None = None
    retries: int | None = None
    oracle: bool | None = None
    terminals: int = 6
    components: int = 2
    out: str | None = None

    @property
    def source(self) -> str:
        if self.graph:
            return self.graph
        options = ' '.join(f"{key}={value}" for key, value in sorted(self.params.items()))
        return f"{self.family}({options})"

    @property
    def parameter(self) -> str:
        return f"alpha={self.alpha}" if self.scheme in ALPHA_SCHEMES else f"k={self.k}"

    def sim_config(self, n: int) -> SimConfig:
        return SimConfig.for_graph(n, bits=self.bits, retry_budget=self.retries, oracle=self.oracle)

    def to_dict(self) -> dict:
        values = asdict(self)
        values['alpha'] = None if self.alpha is None else str(self.alpha)
        return values


@dataclass
class MetricsRecord:
    """
    One CSV row. Stretch fields stay empty when the oracle is off; status is
    'ok', 'violated' (an oracle bound failed) or 'failed' (the run raised).
    """
    n: int | None = None
    HD: int | None = None
    WD: int | None = None
    scheme: str = ''
    alpha: str | None = None
    k: int | None = None
    L: int | None = None
    seed: int | None = None
    rounds: int | None = None
    messages: int | None = None
    retries: int | None = None
    max_stretch: float | None = None
    mean_stretch: float | None = None
    max_table_bits: int | None = None
    label_bits: int | None = None
    status: str = 'ok'
    detail: str = ''

    @property
    def ok(self) -> bool:
        return self.status == 'ok'

    def to_row(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in RECORD_FIELDS}


RECORD_FIELDS = tuple(f.name for f in fields(MetricsRecord))

INTEGER_FIELDS = ('n', 'HD', 'WD', 'k', 'L', 'seed', 'rounds', 'messages', 'retries',
                  'max_table_bits', 'label_bits')
