"""Domain types and ingestion of raw ticket, station, tariff and CPI files.

Raw ticket rows are aggregated to one observation per
(route, year, month, fare category). Fares are deflated to a base period and
both the ticket count and the real fare enter the estimators in natural logs.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class Direction(str, Enum):
    WESTERN = "Western"
    KUNGUR = "Kungur"
    GORNOZAVODSK_CHUSOVOY = "GornozavodskChusovoy"
    GORNOZAVODSK_KIZEL = "GornozavodskKizel"
    GORNOZAVODSK_BRANCH = "GornozavodskBranch"
    AGGLOMERATION = "Agglomeration"


DIRECTIONS = [d.value for d in Direction]


class FareCategory(str, Enum):
    FULL_SINGLE = "FullSingle"
    FULL_RETURN = "FullReturn"
    CHILDREN = "Children"
    PPK_RR_EMPLOYEE = "PpkRrEmployee"
    FEDERAL_DISCOUNT = "FederalDiscount"
    REGIONAL_DISCOUNT = "RegionalDiscount"
    SEASON = "Season"
    STUDENT = "Student"
    MILITARY = "Military"

    @property
    def multiplier(self) -> float:
        return DEFAULT_MULTIPLIERS[self]


FARE_CATEGORIES = [c.value for c in FareCategory]

# Fraction of the full single fare paid per trip. Children pay 20%, employees
# get up to a 90% discount, a return ticket is 10% off two singles. The social
# discount levels are operator-specific and are only defaults.
DEFAULT_MULTIPLIERS: dict[FareCategory, float] = {
    FareCategory.FULL_SINGLE: 1.0,
    FareCategory.FULL_RETURN: 0.9,
    FareCategory.CHILDREN: 0.2,
    FareCategory.PPK_RR_EMPLOYEE: 0.1,
    FareCategory.FEDERAL_DISCOUNT: 0.5,
    FareCategory.REGIONAL_DISCOUNT: 0.5,
    FareCategory.SEASON: 0.7,
    FareCategory.STUDENT: 0.5,
    FareCategory.MILITARY: 0.5,
}


class SizeClass(IntEnum):
    NONE = 0
    SMALL = 1
    MIDDLE = 2
    LARGE = 3
    HUGE = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()


def classify_settlement(population_within_5km: float, settlement_exists: bool = True) -> SizeClass:
    """Settlement size class of a station.

    Intervals are lower-exclusive and upper-inclusive: 100 is Small, 1000 is
    Middle, 10000 is Large.
    """
    if population_within_5km < 0:
        raise ValueError("population must be non-negative")
    if not settlement_exists:
        return SizeClass.NONE
    if population_within_5km <= 100:
        return SizeClass.SMALL
    if population_within_5km <= 1000:
        return SizeClass.MIDDLE
    if population_within_5km <= 10000:
        return SizeClass.LARGE
    return SizeClass.HUGE


def zone_of_distance(distance_km: float, zone_table: Sequence[float]) -> int:
    """Tariff zone (1-based) of a trip: the first breakpoint >= distance."""
    if not distance_km > 0:
        raise ValueError(f"distance must be positive, got {distance_km}")
    _check_zone_table(zone_table)
    i = bisect.bisect_left(zone_table, distance_km)
    if i == len(zone_table):
        raise ValueError(f"distance {distance_km} km exceeds the last zone breakpoint {zone_table[-1]} km")
    return i + 1


def _check_zone_table(zone_table: Sequence[float]) -> None:
    if len(zone_table) == 0:
        raise ValueError("zone table is empty")
    if any(b <= a for a, b in zip(zone_table, zone_table[1:])):
        raise ValueError("zone table breakpoints must be strictly increasing")


def deflate(nominal_fare: float, year: int, month: int, cpi_series: Mapping[tuple[int, int], float],
            base_period: tuple[int, int]) -> float:
    """Real fare at base-period prices: nominal * cpi(base) / cpi(period)."""
    try:
        current = cpi_series[(year, month)]
    except KeyError:
        raise DataError(f"no CPI entry for period {year}-{month:02d}") from None
    try:
        base = cpi_series[tuple(base_period)]
    except KeyError:
        raise DataError(f"no CPI entry for base period {base_period[0]}-{base_period[1]:02d}") from None
    if current <= 0 or base <= 0:
        raise DataError("CPI values must be positive")
    return nominal_fare * base / current


@dataclass(frozen=True)
class Station:
    id: str
    name: str
    direction: Direction
    latitude: float
    longitude: float
    population_within_5km: float
    dist_nearest_settlement_km: float
    dist_second_settlement_km: float
    dist_bus_stop_km: float
    dist_highway_km: float
    has_summer_gardens: bool = False
    is_perm: bool = False
    is_agglomeration: bool = False
    line_km: float | None = None
    missing: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.population_within_5km < 0:
            raise ValueError(f"station {self.id}: population must be non-negative")
        for name in ("dist_nearest_settlement_km", "dist_second_settlement_km", "dist_bus_stop_km", "dist_highway_km"):
            if getattr(self, name) < 0:
                raise ValueError(f"station {self.id}: {name} must be non-negative")

    @property
    def size_class(self) -> SizeClass:
        return classify_settlement(self.population_within_5km, self.population_within_5km > 0)


@dataclass(frozen=True)
class Route:
    origin: str
    destination: str
    distance_km: float
    zone: int
    direction: Direction

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError(f"route {self.origin}->{self.destination}: origin equals destination")
        if not self.distance_km > 0:
            raise ValueError(f"route {self.origin}->{self.destination}: distance must be positive")


@dataclass(frozen=True)
class MonthlyDemandRecord:
    route: Route
    year: int
    month: int
    fare_category: FareCategory
    tickets: int
    log_tickets: float
    nominal_fare: float
    real_fare: float
    log_real_fare: float
    features: Mapping[str, float] = field(default_factory=dict)


RECORD_COLUMNS = [
    "origin", "destination", "year", "month", "fare_category", "tickets", "log_tickets",
    "nominal_fare", "real_fare", "log_real_fare", "distance_km", "zone", "direction",
]
SORT_KEY = ["origin", "destination", "year", "month", "fare_category"]
RECORD_DTYPES = {
    "origin": object, "destination": object, "year": "int64", "month": "int64", "fare_category": object,
    "tickets": "int64", "log_tickets": float, "nominal_fare": float, "real_fare": float, "log_real_fare": float,
    "distance_km": float, "zone": "int64", "direction": object,
}


@dataclass(frozen=True)
class Dataset:
    """Monthly route-level observations plus the reference tables they came from.

    ``records`` is a DataFrame with ``RECORD_COLUMNS``, sorted by
    (origin, destination, year, month, fare_category).
    """

    records: pd.DataFrame
    stations: dict[str, Station]
    zone_table: tuple[float, ...]
    cpi: dict[tuple[int, int], float]
    base_period: tuple[int, int]
    tariffs: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=["year", "zone", "full_fare"]))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def routes(self) -> list[Route]:
        pairs = self.records[["origin", "destination", "distance_km", "zone", "direction"]].drop_duplicates(
            ["origin", "destination"])
        return [Route(o, d, float(km), int(z), Direction(dr)) for o, d, km, z, dr in pairs.itertuples(index=False)]

    def record(self, i: int) -> MonthlyDemandRecord:
        r = self.records.iloc[i]
        route = Route(r.origin, r.destination, float(r.distance_km), int(r.zone), Direction(r.direction))
        return MonthlyDemandRecord(route, int(r.year), int(r.month), FareCategory(r.fare_category), int(r.tickets),
                                   float(r.log_tickets), float(r.nominal_fare), float(r.real_fare),
                                   float(r.log_real_fare))

    def subset(self, mask) -> "Dataset":
        recs = self.records[np.asarray(mask, dtype=bool)].reset_index(drop=True)
        return Dataset(recs, self.stations, self.zone_table, self.cpi, self.base_period, self.tariffs)

    def record_keys(self) -> list[tuple]:
        return list(self.records[SORT_KEY].itertuples(index=False, name=None))

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(self.records.to_csv(index=False).encode())
        h.update(repr(self.zone_table).encode())
        return h.hexdigest()


# -- CSV reading -------------------------------------------------------------

TICKET_FIELDS = ["origin_id", "destination_id", "date", "fare_category", "quantity", "nominal_fare"]
STATION_FIELDS = ["id", "name", "direction", "lat", "lon", "population_5km", "dist_settlement1_km",
                  "dist_settlement2_km", "dist_bus_km", "dist_highway_km", "summer_gardens", "is_perm",
                  "is_agglomeration"]
TARIFF_FIELDS = ["year", "zone", "full_fare"]
CPI_FIELDS = ["year", "month", "index"]
ZONE_FIELDS = ["zone", "upper_km"]

# Imputation for missing station characteristics: distances get a far-away
# sentinel plus a missingness flag, booleans default to false.
MISSING_DISTANCE_KM = 99.0


def _read_rows(path, required: Sequence[str]) -> list[tuple[int, dict[str, str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError("file not found", str(path))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise DataError(f"missing columns {missing}", str(path), 1)
        rows = []
        for row in reader:
            if None in row or any(v is None for v in row.values()):
                raise DataError("wrong number of fields", str(path), reader.line_num)
            rows.append((reader.line_num, row))
    return rows


def _num(value: str, kind, path, line, column):
    try:
        v = kind(value)
    except (TypeError, ValueError):
        raise DataError(f"column {column!r}: cannot parse {value!r}", str(path), line) from None
    if kind is float and not math.isfinite(v):
        raise DataError(f"column {column!r}: non-finite value {value!r}", str(path), line)
    return v


def _flag(value: str, path, line, column) -> bool:
    value = value.strip()
    if value in ("", "0", "false", "False"):
        return False
    if value in ("1", "true", "True"):
        return True
    raise DataError(f"column {column!r}: expected 0/1, got {value!r}", str(path), line)


def read_zone_table(path) -> tuple[float, ...]:
    rows = _read_rows(path, ZONE_FIELDS)
    parsed = sorted((_num(r["zone"], int, path, ln, "zone"), _num(r["upper_km"], float, path, ln, "upper_km"))
                    for ln, r in rows)
    zones = [z for z, _ in parsed]
    if zones != list(range(1, len(zones) + 1)):
        raise DataError("zones must be numbered 1..K without gaps", str(path))
    table = tuple(km for _, km in parsed)
    try:
        _check_zone_table(table)
    except ValueError as exc:
        raise DataError(str(exc), str(path)) from None
    return table


def read_cpi(path) -> dict[tuple[int, int], float]:
    cpi: dict[tuple[int, int], float] = {}
    for ln, r in _read_rows(path, CPI_FIELDS):
        key = (_num(r["year"], int, path, ln, "year"), _num(r["month"], int, path, ln, "month"))
        if not 1 <= key[1] <= 12:
            raise DataError(f"month out of range: {key[1]}", str(path), ln)
        value = _num(r["index"], float, path, ln, "index")
        if value <= 0:
            raise DataError("CPI index must be positive", str(path), ln)
        if key in cpi:
            raise DataError(f"duplicate CPI period {key}", str(path), ln)
        cpi[key] = value
    return cpi


def read_tariffs(path) -> pd.DataFrame:
    out = []
    for ln, r in _read_rows(path, TARIFF_FIELDS):
        year = _num(r["year"], int, path, ln, "year")
        zone = _num(r["zone"], int, path, ln, "zone")
        fare = _num(r["full_fare"], float, path, ln, "full_fare")
        if fare <= 0:
            raise DataError("full_fare must be positive", str(path), ln)
        out.append((year, zone, fare))
    df = pd.DataFrame(out, columns=TARIFF_FIELDS)
    if df.duplicated(["year", "zone"]).any():
        raise DataError("duplicate (year, zone) tariff rows", str(path))
    return df.sort_values(["year", "zone"]).reset_index(drop=True)


def read_stations(path) -> dict[str, Station]:
    stations: dict[str, Station] = {}
    for ln, r in _read_rows(path, STATION_FIELDS):
        sid = r["id"].strip()
        if not sid:
            raise DataError("empty station id", str(path), ln)
        if sid in stations:
            raise DataError(f"duplicate station id {sid!r}", str(path), ln)
        try:
            direction = Direction(r["direction"].strip())
        except ValueError:
            raise DataError(f"unknown direction {r['direction']!r}", str(path), ln) from None
        missing = set()

        def dist(col):
            if r[col].strip() == "":
                missing.add(col)
                return MISSING_DISTANCE_KM
            v = _num(r[col], float, path, ln, col)
            if v < 0:
                raise DataError(f"column {col!r} must be non-negative", str(path), ln)
            return v

        pop_raw = r["population_5km"].strip()
        if pop_raw == "":
            missing.add("population_5km")
            pop = 0.0
        else:
            pop = _num(pop_raw, float, path, ln, "population_5km")
            if pop < 0:
                raise DataError("population must be non-negative", str(path), ln)
        line_km = None
        if r.get("line_km") not in (None, ""):
            line_km = _num(r["line_km"], float, path, ln, "line_km")
        stations[sid] = Station(
            id=sid, name=r["name"], direction=direction,
            latitude=_num(r["lat"], float, path, ln, "lat"),
            longitude=_num(r["lon"], float, path, ln, "lon"),
            population_within_5km=pop,
            dist_nearest_settlement_km=dist("dist_settlement1_km"),
            dist_second_settlement_km=dist("dist_settlement2_km"),
            dist_bus_stop_km=dist("dist_bus_km"),
            dist_highway_km=dist("dist_highway_km"),
            has_summer_gardens=_flag(r["summer_gardens"], path, ln, "summer_gardens"),
            is_perm=_flag(r["is_perm"], path, ln, "is_perm"),
            is_agglomeration=_flag(r["is_agglomeration"], path, ln, "is_agglomeration"),
            line_km=line_km,
            missing=frozenset(missing),
        )
    return stations


def _haversine_km(a: Station, b: Station) -> float:
    lat1, lon1, lat2, lon2 = map(math.radians, (a.latitude, a.longitude, b.latitude, b.longitude))
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * 6371.0 * math.asin(math.sqrt(h))


def route_distance(a: Station, b: Station) -> float:
    """Rail distance between two stations.

    With ``line_km`` (position along the line, measured from the Perm hub),
    same-direction trips use the difference and cross-direction trips run
    through the hub. Without it the great-circle distance is used.
    """
    if a.line_km is not None and b.line_km is not None:
        if a.direction == b.direction:
            return abs(a.line_km - b.line_km)
        return a.line_km + b.line_km
    return _haversine_km(a, b)


def route_direction(a: Station, b: Station) -> Direction:
    if a.is_perm and not b.is_perm:
        return b.direction
    if b.is_perm and not a.is_perm:
        return a.direction
    if a.direction == b.direction:
        return a.direction
    if a.is_perm and b.is_perm:
        return Direction.AGGLOMERATION
    return a.direction


def make_route(a: Station, b: Station, zone_table: Sequence[float]) -> Route:
    km = route_distance(a, b)
    return Route(a.id, b.id, km, zone_of_distance(km, zone_table), route_direction(a, b))


def aggregate_tickets(rows: Iterable[tuple], stations: Mapping[str, Station], zone_table: Sequence[float],
                      cpi: Mapping[tuple[int, int], float], base_period: tuple[int, int],
                      tariffs: pd.DataFrame | None = None, path: str | None = None) -> pd.DataFrame:
    """Aggregate raw ticket rows to monthly route-level records.

    ``rows`` yields (line, origin, destination, year, month, category,
    quantity, nominal_fare-or-None). The record fare is the
    quantity-weighted mean nominal fare of its rows.
    """
    tariff_lookup = {}
    if tariffs is not None:
        tariff_lookup = {(int(y), int(z)): float(f) for y, z, f in tariffs.itertuples(index=False)}
    routes: dict[tuple[str, str], Route] = {}
    acc: dict[tuple, list[float]] = {}
    for line, o, d, year, month, cat, qty, fare in rows:
        for sid in (o, d):
            if sid not in stations:
                raise DataError(f"unknown station id {sid!r}", path, line)
        key_r = (o, d)
        if key_r not in routes:
            try:
                routes[key_r] = make_route(stations[o], stations[d], zone_table)
            except ValueError as exc:
                raise DataError(str(exc), path, line) from None
        if fare is None:
            zone = routes[key_r].zone
            if (year, zone) not in tariff_lookup:
                raise DataError(f"no fare given and no tariff for year {year}, zone {zone}", path, line)
            fare = tariff_lookup[(year, zone)] * FareCategory(cat).multiplier
        key = (o, d, year, month, cat)
        slot = acc.setdefault(key, [0.0, 0.0])
        slot[0] += qty
        slot[1] += qty * fare
    out = []
    for (o, d, year, month, cat), (qty, fare_sum) in acc.items():
        if qty < 1:
            continue
        route = routes[(o, d)]
        nominal = fare_sum / qty
        try:
            real = deflate(nominal, year, month, cpi, base_period)
        except DataError as exc:
            raise DataError(str(exc), path) from None
        if real <= 0:
            raise DataError(f"non-positive fare for {o}->{d} {year}-{month:02d} {cat}", path)
        tickets = int(round(qty))
        out.append((o, d, year, month, cat, tickets, math.log(tickets), nominal, real, math.log(real),
                    route.distance_km, route.zone, route.direction.value))
    df = pd.DataFrame(out, columns=RECORD_COLUMNS).astype(RECORD_DTYPES)
    return df.sort_values(SORT_KEY, kind="mergesort").reset_index(drop=True)


def _ticket_rows(path):
    for ln, r in _read_rows(path, TICKET_FIELDS):
        o, d = r["origin_id"].strip(), r["destination_id"].strip()
        date = r["date"].strip()
        try:
            y, m, _ = (int(x) for x in date.split("-"))
            if not 1 <= m <= 12:
                raise ValueError
        except ValueError:
            raise DataError(f"bad date {date!r}, expected YYYY-MM-DD", str(path), ln) from None
        cat = r["fare_category"].strip()
        if cat not in FARE_CATEGORIES:
            raise DataError(f"unknown fare category {cat!r}", str(path), ln)
        qty = _num(r["quantity"], float, path, ln, "quantity")
        if qty < 0 or qty != int(qty):
            raise DataError(f"quantity must be a non-negative integer, got {r['quantity']!r}", str(path), ln)
        fare = None
        if r["nominal_fare"].strip() != "":
            fare = _num(r["nominal_fare"], float, path, ln, "nominal_fare")
            if fare <= 0:
                raise DataError("nominal_fare must be positive", str(path), ln)
        yield ln, o, d, y, m, cat, int(qty), fare


def ingest(tickets_file, stations_file, tariffs_file, cpi_file, zone_table, base_period=None) -> Dataset:
    """Read the five input files and aggregate tickets to monthly records.

    ``zone_table`` is either a path to zones.csv or a sequence of upper
    breakpoints in km. ``base_period`` defaults to the first CPI period.
    """
    if isinstance(zone_table, (str, Path)):
        zone_table = read_zone_table(zone_table)
    zone_table = tuple(float(z) for z in zone_table)
    _check_zone_table(zone_table)
    stations = read_stations(stations_file)
    tariffs = read_tariffs(tariffs_file)
    cpi = read_cpi(cpi_file)
    if base_period is None:
        if not cpi:
            raise DataError("CPI file is empty", str(cpi_file))
        base_period = min(cpi)
    base_period = (int(base_period[0]), int(base_period[1]))
    records = aggregate_tickets(_ticket_rows(tickets_file), stations, zone_table, cpi, base_period, tariffs,
                                path=str(tickets_file))
    return Dataset(records, stations, zone_table, cpi, base_period, tariffs)


# -- CSV writing -------------------------------------------------------------

def write_stations(stations: Mapping[str, Station], path) -> None:
    rows = []
    for s in stations.values():
        def d(col, v):
            return "" if col in s.missing else v
        rows.append({
            "id": s.id, "name": s.name, "direction": s.direction.value, "lat": s.latitude, "lon": s.longitude,
            "population_5km": d("population_5km", s.population_within_5km),
            "dist_settlement1_km": d("dist_settlement1_km", s.dist_nearest_settlement_km),
            "dist_settlement2_km": d("dist_settlement2_km", s.dist_second_settlement_km),
            "dist_bus_km": d("dist_bus_km", s.dist_bus_stop_km),
            "dist_highway_km": d("dist_highway_km", s.dist_highway_km),
            "summer_gardens": int(s.has_summer_gardens), "is_perm": int(s.is_perm),
            "is_agglomeration": int(s.is_agglomeration),
            "line_km": "" if s.line_km is None else s.line_km,
        })
    pd.DataFrame(rows, columns=STATION_FIELDS + ["line_km"]).to_csv(path, index=False, lineterminator="\n")


def write_tickets(dataset: Dataset, path) -> None:
    """One raw row per record (quantity = tickets, dated the 15th); re-ingesting reproduces the records."""
    rec = dataset.records
    out = pd.DataFrame({
        "origin_id": rec["origin"], "destination_id": rec["destination"],
        "date": [f"{y:04d}-{m:02d}-15" for y, m in zip(rec["year"], rec["month"])],
        "fare_category": rec["fare_category"], "quantity": rec["tickets"], "nominal_fare": rec["nominal_fare"],
    }, columns=TICKET_FIELDS)
    out.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")


def write_zone_table(zone_table: Sequence[float], path) -> None:
    pd.DataFrame({"zone": range(1, len(zone_table) + 1), "upper_km": list(zone_table)}).to_csv(
        path, index=False, lineterminator="\n")


def write_cpi(cpi: Mapping[tuple[int, int], float], path) -> None:
    rows = [(y, m, v) for (y, m), v in sorted(cpi.items())]
    pd.DataFrame(rows, columns=CPI_FIELDS).to_csv(path, index=False, lineterminator="\n")


def write_tariffs(tariffs: pd.DataFrame, path) -> None:
    tariffs[TARIFF_FIELDS].to_csv(path, index=False, lineterminator="\n")


# -- dataset archive ---------------------------------------------------------

def save_archive(dataset: Dataset, directory) -> Path:
    """Write a dataset as a directory of CSV files plus ``meta.json``."""
    import json
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dataset.records.to_csv(directory / "records.csv", index=False, lineterminator="\n", float_format="%.17g")
    write_stations(dataset.stations, directory / "stations.csv")
    write_zone_table(dataset.zone_table, directory / "zones.csv")
    write_cpi(dataset.cpi, directory / "cpi.csv")
    write_tariffs(dataset.tariffs, directory / "tariffs.csv")
    meta = {"base_period": list(dataset.base_period), "n_records": len(dataset),
            "fingerprint": dataset.fingerprint()}
    (directory / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return directory


def load_archive(directory) -> Dataset:
    import json
    directory = Path(directory)
    if not (directory / "meta.json").exists():
        raise DataError("not a dataset archive (meta.json missing)", str(directory))
    meta = json.loads((directory / "meta.json").read_text())
    records = pd.read_csv(directory / "records.csv", dtype={"origin": str, "destination": str,
                                                             "fare_category": str, "direction": str},
                          float_precision="round_trip")
    records = records[RECORD_COLUMNS].astype(RECORD_DTYPES)
    stations = read_stations(directory / "stations.csv")
    return Dataset(records, stations, read_zone_table(directory / "zones.csv"), read_cpi(directory / "cpi.csv"),
                   tuple(meta["base_period"]), read_tariffs(directory / "tariffs.csv"))
