"""Grid case parsing, load profiles, and run configuration.

Cases are MATPOWER-style ``.m`` text files restricted to the bus/gen/branch/
gencost tables (plus an optional ``mpc.fzones`` table for generator forbidden
zones).  Only the columns needed for DC unit commitment are interpreted; AC
electrical fields are parsed and ignored.  Non-standard conventions, kept so a
case file is self-contained in hourly units:

* gen column 17 is the ramp rate in MW/h (0 means unconstrained),
* gen columns 22/23, when present, are min-up/min-down times in hours,
* branch column 7 (rateB) is the emergency rating; when absent or zero it
  defaults to 1.1x the normal rating.

A case without a sidecar profile gets a 24-hour load profile built from the
per-bus peak loads and the bundled IEEE RTS winter-weekday hourly multipliers.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Bus",
    "Branch",
    "Generator",
    "GridCase",
    "Method",
    "RunConfig",
    "CaseError",
    "CaseParseError",
    "CaseValidationError",
    "ConfigError",
    "HOURLY_MULTIPLIERS",
    "parse_matpower",
    "serialize_matpower",
    "load_case",
    "load_profile_csv",
    "apply_load_scaling",
    "load_config",
    "bundled_case_path",
]

# IEEE RTS winter weekday load shape, fraction of daily peak, hours 1-24.
HOURLY_MULTIPLIERS = np.array(
    [
        0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86,
        0.95, 0.96, 0.96, 0.95, 0.95, 0.95, 0.93, 0.94,
        0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63,
    ]
)

# Default emergency allowance when a case file has no rateB.
EMERGENCY_RATING_FACTOR = 1.1


class CaseError(ValueError):
    """Base class for case file problems."""


class CaseParseError(CaseError):
    """Malformed case text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CaseValidationError(CaseError):
    """Structurally parseable but semantically invalid case data."""


class ConfigError(ValueError):
    """Invalid run configuration; names the offending key."""


@dataclass(frozen=True)
class Bus:
    id: int
    base_load: float  # MW at system peak


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    reactance: float  # per unit, > 0
    rating_normal: float  # MW
    rating_emergency: float  # MW


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    p_min: float
    p_max: float
    cost_linear: float  # $/MWh
    cost_noload: float  # $/h
    cost_startup: float  # $
    ramp_rate: float  # MW/h
    min_up: int  # hours
    min_down: int  # hours
    forbidden_zones: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True, eq=False)
class GridCase:
    """Immutable problem instance: network, fleet, and hourly demand."""

    name: str
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    base_mva: float
    load_profile: np.ndarray  # shape (n_buses, horizon), MW
    bus_index: dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.load_profile.shape[1]

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def bus_pos(self, bus_id: int) -> int:
        return self.bus_index[bus_id]

    def branch_by_id(self, branch_id: int) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise KeyError(f"no branch with id {branch_id}")

    def total_load(self, hour: int) -> float:
        return float(self.load_profile[:, hour].sum())


class Method(enum.Enum):
    """The six solve pipelines."""

    I = 1  # extensive SCUC  # noqa: E741
    II = 2  # decomposed SCUC
    III = 3  # decomposed SCUC with critical-sub-problem screening
    IV = 4  # extensive SCUC-CNR
    V = 5  # decomposed SCUC-CNR
    VI = 6  # decomposed SCUC-CNR with screening

    @property
    def uses_cnr(self) -> bool:
        return self in (Method.IV, Method.V, Method.VI)

    @property
    def uses_screening(self) -> bool:
        return self in (Method.III, Method.VI)

    @property
    def is_extensive(self) -> bool:
        return self in (Method.I, Method.IV)

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        if isinstance(value, str) and value.upper() in cls.__members__:
            return cls[value.upper()]
        if isinstance(value, int) and not isinstance(value, bool):
            for m in cls:
                if m.value == value:
                    return m
        raise ConfigError(f"method: expected one of I..VI, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    mipgap: float = 0.01
    method: Method = Method.VI
    cbce_k: int = 20
    csps_margin: float = 0.0
    slack_tolerance: float = 1e-4  # MW
    load_scale: float = 1.0
    contingency_watchlist: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if not 0.0 <= self.mipgap <= 1.0:
            raise ConfigError(f"mipgap: must be in [0, 1], got {self.mipgap}")
        if self.cbce_k < 1:
            raise ConfigError(f"cbce_k: must be >= 1, got {self.cbce_k}")
        if not 0.0 <= self.csps_margin < 1.0:
            raise ConfigError(f"csps_margin: must be in [0, 1), got {self.csps_margin}")
        if self.slack_tolerance <= 0.0:
            raise ConfigError(f"slack_tolerance: must be > 0, got {self.slack_tolerance}")
        if self.load_scale <= 0.0:
            raise ConfigError(f"load_scale: must be > 0, got {self.load_scale}")


_CONFIG_KEYS = {
    "mipgap",
    "method",
    "cbce_k",
    "csps_margin",
    "slack_tolerance",
    "load_scale",
    "contingency_watchlist",
}


def load_config(text: str) -> RunConfig:
    """Parse a JSON run configuration, rejecting unknown keys."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = dict(raw)
    if "method" in kwargs:
        kwargs["method"] = Method.parse(kwargs["method"])
    if "contingency_watchlist" in kwargs and kwargs["contingency_watchlist"] is not None:
        wl = kwargs["contingency_watchlist"]
        if not isinstance(wl, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in wl):
            raise ConfigError("contingency_watchlist: must be a list of branch ids")
        kwargs["contingency_watchlist"] = tuple(wl)
    for key in ("mipgap", "csps_margin", "slack_tolerance", "load_scale"):
        if key in kwargs and not isinstance(kwargs[key], (int, float)):
            raise ConfigError(f"{key}: must be a number")
    if "cbce_k" in kwargs and (isinstance(kwargs["cbce_k"], bool) or not isinstance(kwargs["cbce_k"], int)):
        raise ConfigError("cbce_k: must be an integer")
    return RunConfig(**kwargs)


# ---------------------------------------------------------------------------
# MATPOWER-style parsing


_TABLE_RE = re.compile(r"^\s*mpc\.(\w+)\s*=\s*\[")
_BASEMVA_RE = re.compile(r"^\s*mpc\.baseMVA\s*=\s*([0-9eE.+-]+)\s*;")


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _parse_tables(text: str) -> tuple[dict[str, list[tuple[int, list[float]]]], float]:
    """Collect numeric tables and baseMVA; rows carry their source line number."""
    tables: dict[str, list[tuple[int, list[float]]]] = {}
    base_mva = 100.0
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if current is None:
            m = _BASEMVA_RE.match(line)
            if m:
                base_mva = float(m.group(1))
                continue
            m = _TABLE_RE.match(line)
            if m:
                current = m.group(1)
                tables.setdefault(current, [])
                line = line[m.end():].strip()
                if not line:
                    continue
        if current is not None:
            done = False
            if "]" in line:
                line = line.split("]")[0].strip()
                done = True
            line = line.rstrip(";").strip()
            if line:
                try:
                    row = [float(tok) for tok in line.replace(",", " ").split()]
                except ValueError:
                    raise CaseParseError(f"non-numeric entry in mpc.{current} row", lineno)
                tables[current].append((lineno, row))
            if done:
                current = None
    if current is not None:
        raise CaseParseError(f"unterminated table mpc.{current}")
    return tables, base_mva


def parse_matpower(text: str, name: str = "case", horizon: int = 24) -> GridCase:
    """Parse case text into a validated :class:`GridCase`.

    ``horizon`` selects the built-in profile length: 24 gives the full daily
    shape, 1 keeps only the hour of system peak.
    """
    if horizon not in (1, 24):
        raise CaseValidationError(f"horizon must be 1 or 24, got {horizon}")
    tables, base_mva = _parse_tables(text)
    for required in ("bus", "gen", "branch", "gencost"):
        if required not in tables:
            raise CaseParseError(f"missing mpc.{required} table")
    if base_mva <= 0:
        raise CaseValidationError(f"base_mva must be > 0, got {base_mva}")

    buses: list[Bus] = []
    seen_ids: set[int] = set()
    for lineno, row in tables["bus"]:
        if len(row) < 3:
            raise CaseParseError("bus row needs at least 3 columns (id, type, Pd)", lineno)
        bus_id = int(row[0])
        if bus_id in seen_ids:
            raise CaseValidationError(f"duplicate bus id {bus_id}")
        seen_ids.add(bus_id)
        pd = float(row[2])
        if pd < 0:
            raise CaseValidationError(f"bus {bus_id}: negative load {pd}")
        buses.append(Bus(id=bus_id, base_load=pd))
    bus_index = {b.id: i for i, b in enumerate(buses)}

    branches: list[Branch] = []
    for rownum, (lineno, row) in enumerate(tables["branch"], start=1):
        if len(row) < 6:
            raise CaseParseError("branch row needs at least 6 columns", lineno)
        status = row[10] if len(row) > 10 else 1.0
        if status == 0.0:
            continue  # out-of-service branch, id position still consumed
        f, t = int(row[0]), int(row[1])
        x = float(row[3])
        rate_a = float(row[5])
        rate_b = float(row[6]) if len(row) > 6 and row[6] > 0 else rate_a * EMERGENCY_RATING_FACTOR
        if f not in bus_index or t not in bus_index:
            raise CaseValidationError(f"branch {rownum}: endpoint {f if f not in bus_index else t} is not a bus")
        if f == t:
            raise CaseValidationError(f"branch {rownum}: self-loop at bus {f}")
        if x <= 0:
            raise CaseValidationError(f"branch {rownum}: reactance must be > 0, got {x}")
        if rate_a <= 0:
            raise CaseValidationError(f"branch {rownum}: normal rating must be > 0, got {rate_a}")
        if rate_b < rate_a:
            raise CaseValidationError(
                f"branch {rownum}: emergency rating {rate_b} below normal rating {rate_a}"
            )
        branches.append(Branch(rownum, f, t, x, rate_a, rate_b))

    gencost = tables["gencost"]
    if len(gencost) != len(tables["gen"]):
        raise CaseValidationError(
            f"gencost has {len(gencost)} rows for {len(tables['gen'])} generators"
        )
    fzones_by_gen: dict[int, list[tuple[float, float]]] = {}
    for lineno, row in tables.get("fzones", []):
        if len(row) != 3:
            raise CaseParseError("fzones row must be [gen_row fmin fmax]", lineno)
        fzones_by_gen.setdefault(int(row[0]), []).append((float(row[1]), float(row[2])))

    generators: list[Generator] = []
    for rownum, ((lineno, row), (cost_lineno, cost_row)) in enumerate(
        zip(tables["gen"], gencost), start=1
    ):
        if len(row) < 10:
            raise CaseParseError("gen row needs at least 10 columns", lineno)
        status = row[7]
        if status == 0.0:
            continue
        bus = int(row[0])
        if bus not in bus_index:
            raise CaseValidationError(f"generator {rownum}: bus {bus} is not a bus")
        p_max, p_min = float(row[8]), float(row[9])
        if not 0.0 <= p_min <= p_max:
            raise CaseValidationError(
                f"generator {rownum}: need 0 <= p_min <= p_max, got [{p_min}, {p_max}]"
            )
        ramp = float(row[16]) if len(row) > 16 and row[16] > 0 else p_max
        min_up = int(row[21]) if len(row) > 21 else 1
        min_down = int(row[22]) if len(row) > 22 else 1
        if min_up < 1 or min_down < 1:
            raise CaseValidationError(f"generator {rownum}: min up/down times must be >= 1 hour")

        if len(cost_row) < 5:
            raise CaseParseError("gencost row needs at least 5 columns", cost_lineno)
        if int(cost_row[0]) != 2:
            raise CaseValidationError(
                f"generator {rownum}: only polynomial gencost (model 2) is supported"
            )
        startup = float(cost_row[1])
        ncoef = int(cost_row[3])
        coefs = cost_row[4:4 + ncoef]
        if len(coefs) != ncoef:
            raise CaseParseError("gencost row shorter than its declared coefficient count", cost_lineno)
        for c in coefs[:-2]:
            if c != 0.0:
                raise CaseValidationError(
                    f"generator {rownum}: nonlinear cost terms are not supported"
                )
        c1 = float(coefs[-2]) if ncoef >= 2 else 0.0
        c0 = float(coefs[-1]) if ncoef >= 1 else 0.0
        if startup < 0 or c1 < 0 or c0 < 0:
            raise CaseValidationError(f"generator {rownum}: costs must be >= 0")

        zones = tuple(sorted(fzones_by_gen.get(rownum, [])))
        prev_hi = p_min
        for fmin, fmax in zones:
            if not (p_min < fmin < fmax < p_max):
                raise CaseValidationError(
                    f"generator {rownum}: forbidden zone [{fmin}, {fmax}] must sit strictly inside ({p_min}, {p_max})"
                )
            if fmin < prev_hi:
                raise CaseValidationError(f"generator {rownum}: forbidden zones overlap")
            prev_hi = fmax
        generators.append(
            Generator(rownum, bus, p_min, p_max, c1, c0, startup, ramp, min_up, min_down, zones)
        )

    peaks = np.array([b.base_load for b in buses])
    mults = HOURLY_MULTIPLIERS if horizon == 24 else HOURLY_MULTIPLIERS[[int(np.argmax(HOURLY_MULTIPLIERS))]]
    profile = np.outer(peaks, mults)
    profile.setflags(write=False)
    return GridCase(
        name=name,
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(generators),
        base_mva=base_mva,
        load_profile=profile,
        bus_index=bus_index,
    )


def serialize_matpower(case: GridCase) -> str:
    """Emit case text for the supported field subset; inverse of :func:`parse_matpower`."""
    out = [f"function mpc = {case.name}", "mpc.version = '2';", f"mpc.baseMVA = {case.base_mva:g};"]
    out.append("mpc.bus = [")
    for b in case.buses:
        out.append(f"\t{b.id}\t1\t{b.base_load:.6f}\t0\t0\t0\t1\t1\t0\t100\t1\t1.05\t0.95;")
    out.append("];")
    out.append("mpc.gen = [")
    for g in case.generators:
        out.append(
            f"\t{g.bus}\t0\t0\t0\t0\t1\t100\t1\t{g.p_max:.6f}\t{g.p_min:.6f}"
            f"\t0\t0\t0\t0\t0\t0\t{g.ramp_rate:.6f}\t0\t0\t0\t0\t{g.min_up}\t{g.min_down};"
        )
    out.append("];")
    out.append("mpc.branch = [")
    for br in case.branches:
        out.append(
            f"\t{br.from_bus}\t{br.to_bus}\t0\t{br.reactance:.8f}\t0"
            f"\t{br.rating_normal:.6f}\t{br.rating_emergency:.6f}\t0\t0\t0\t1\t-360\t360;"
        )
    out.append("];")
    out.append("mpc.gencost = [")
    for g in case.generators:
        out.append(f"\t2\t{g.cost_startup:.6f}\t0\t2\t{g.cost_linear:.6f}\t{g.cost_noload:.6f};")
    out.append("];")
    zone_rows = [
        f"\t{g.id}\t{fmin:.6f}\t{fmax:.6f};"
        for g in case.generators
        for fmin, fmax in g.forbidden_zones
    ]
    if zone_rows:
        out.append("mpc.fzones = [")
        out.extend(zone_rows)
        out.append("];")
    return "\n".join(out) + "\n"


def load_profile_csv(text: str, case: GridCase) -> np.ndarray:
    """Parse a sidecar profile CSV (rows = hours, columns = bus ids, MW)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise CaseParseError("profile CSV needs a header row and at least one hour row")
    header = [tok.strip() for tok in lines[0].split(",")]
    try:
        col_ids = [int(tok) for tok in header]
    except ValueError:
        raise CaseParseError("profile CSV header must list integer bus ids", 1)
    if sorted(col_ids) != sorted(b.id for b in case.buses):
        raise CaseValidationError("profile CSV bus ids do not match the case")
    profile = np.zeros((case.n_buses, len(lines) - 1))
    for h, line in enumerate(lines[1:], start=0):
        vals = [float(tok) for tok in line.split(",")]
        if len(vals) != len(col_ids):
            raise CaseParseError("profile CSV row width mismatch", h + 2)
        for bus_id, v in zip(col_ids, vals):
            if v < 0:
                raise CaseValidationError(f"profile hour {h}: negative demand at bus {bus_id}")
            profile[case.bus_pos(bus_id), h] = v
    profile.setflags(write=False)
    return profile


def with_profile(case: GridCase, profile: np.ndarray) -> GridCase:
    if profile.shape[0] != case.n_buses:
        raise CaseValidationError(
            f"profile has {profile.shape[0]} bus rows for {case.n_buses} buses"
        )
    profile = np.array(profile, dtype=float)
    profile.setflags(write=False)
    return replace(case, load_profile=profile)


def load_case(path: str, profile_path: Optional[str] = None, horizon: int = 24) -> GridCase:
    """Load a case file (bare bundled names like ``case24_sys`` also resolve)."""
    import os

    if not os.path.exists(path) and not os.path.sep in path and not path.endswith(".m"):
        path = bundled_case_path(path)
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    case = parse_matpower(text, name=name, horizon=horizon)
    if profile_path is not None:
        with open(profile_path, "r", encoding="utf-8") as fh:
            case = with_profile(case, load_profile_csv(fh.read(), case))
    return case


def apply_load_scaling(case: GridCase, factor: float) -> GridCase:
    """Scale every load profile entry by ``factor`` (> 0); all else unchanged."""
    if not factor > 0:
        raise CaseValidationError(f"load scaling factor must be > 0, got {factor}")
    profile = case.load_profile * factor
    profile.setflags(write=False)
    return replace(case, load_profile=profile)


def bundled_case_path(name: str) -> str:
    """Absolute path of a bundled case, e.g. ``case24_sys``."""
    fname = name if name.endswith(".m") else name + ".m"
    ref = resources.files("scuc_cnr") / "cases" / fname
    path = str(ref)
    import os

    if not os.path.exists(path):
        raise FileNotFoundError(f"no bundled case named {name!r}")
    return path
