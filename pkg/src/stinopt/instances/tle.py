"""Two-line element sets: parsing, formatting and two-body propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

MU_EARTH = 398600.4418      # km^3 / s^2
R_EARTH = 6371.0            # km, spherical Earth
SIDEREAL_DEG_PER_DAY = 360.98564736629
J2000 = datetime(2000, 1, 1, 12, tzinfo=timezone.utc)


class TLEError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class OrbitError(ValueError):
    pass


def checksum(line: str) -> int:
    """Modulo-10 sum of the digits in columns 1-68, minus signs counting 1."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


@dataclass(frozen=True)
class TLERecord:
    name: str
    inclination: float    # deg
    raan: float           # deg
    eccentricity: float
    arg_perigee: float    # deg
    mean_anomaly: float   # deg
    mean_motion: float    # rev/day
    epoch: datetime
    satnum: int = 0

    def __post_init__(self):
        if not 0.0 <= self.inclination <= 180.0:
            raise TLEError(f"inclination {self.inclination} outside [0, 180]")
        if not self.mean_motion > 0:
            raise TLEError(f"mean motion {self.mean_motion} must be positive")
        if not self.eccentricity >= 0.0:
            raise TLEError(f"eccentricity {self.eccentricity} is negative")

    @property
    def period_s(self) -> float:
        return 86400.0 / self.mean_motion

    @property
    def semi_major_axis_km(self) -> float:
        n = self.mean_motion * 2 * math.pi / 86400.0
        return (MU_EARTH / n ** 2) ** (1.0 / 3.0)


def _epoch(field: str, lineno: int) -> datetime:
    try:
        yy = int(field[:2])
        day = float(field[2:])
    except ValueError:
        raise TLEError(f"bad epoch field {field!r}", lineno) from None
    year = 2000 + yy if yy < 57 else 1900 + yy
    return datetime(year, 1, 1, tzinfo=timezone.utc) + timedelta(days=day - 1.0)


def _float(line: str, a: int, b: int, what: str, lineno: int) -> float:
    try:
        return float(line[a:b])
    except ValueError:
        raise TLEError(f"bad {what} field {line[a:b]!r}", lineno) from None


def _parse_pair(name: str, l1: str, l2: str, n1: int) -> TLERecord:
    n2 = n1 + 1
    for text, num, lineno in ((l1, "1", n1), (l2, "2", n2)):
        if len(text) < 69:
            raise TLEError(f"line {num} is {len(text)} columns, expected 69", lineno)
        if not text.startswith(num + " "):
            raise TLEError(f"expected line {num} of a TLE", lineno)
        if not text[68].isdigit() or int(text[68]) != checksum(text):
            raise TLEError(f"checksum mismatch (found {text[68]!r}, computed {checksum(text)})",
                           lineno)
    satnum = int(_float(l2, 2, 7, "catalogue number", n2))
    ecc = _float("0." + l2[26:33].strip(), 0, 32, "eccentricity", n2)
    return TLERecord(
        name=name.strip() or str(satnum),
        inclination=_float(l2, 8, 16, "inclination", n2),
        raan=_float(l2, 17, 25, "RAAN", n2),
        eccentricity=ecc,
        arg_perigee=_float(l2, 34, 42, "argument of perigee", n2),
        mean_anomaly=_float(l2, 43, 51, "mean anomaly", n2),
        mean_motion=_float(l2, 52, 63, "mean motion", n2),
        epoch=_epoch(l1[18:32].strip(), n1),
        satnum=satnum,
    )


def parse_tle(text: str) -> list[TLERecord]:
    """Parse name + two-line records (the name line may be omitted)."""
    lines = [(k + 1, ln.rstrip("\r\n").rstrip()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, ln) for k, ln in lines if ln.strip()]
    out = []
    i = 0
    while i < len(lines):
        k, ln = lines[i]
        if ln.startswith("1 ") and len(ln) >= 69:
            name = ""
        else:
            name = ln[2:] if ln.startswith("0 ") else ln
            i += 1
        if i + 1 >= len(lines):
            raise TLEError("truncated record", lines[-1][0])
        (n1, l1), (_, l2) = lines[i], lines[i + 1]
        try:
            rec = _parse_pair(name, l1, l2, n1)
        except TLEError:
            raise
        except ValueError as exc:
            raise TLEError(str(exc), n1) from None
        out.append(rec)
        i += 2
    return out


def _with_checksum(body: str) -> str:
    body = body.ljust(68)[:68]
    return body + str(checksum(body))


def format_tle(rec: TLERecord) -> str:
    """Render a record as three text lines with valid checksums."""
    start = datetime(rec.epoch.year, 1, 1, tzinfo=timezone.utc)
    day = (rec.epoch - start).total_seconds() / 86400.0 + 1.0
    l1 = (f"1 {rec.satnum:05d}U 00000A   {rec.epoch.year % 100:02d}{day:012.8f} "
          f" .00000000  00000-0  00000-0 0  999")
    ecc = f"{rec.eccentricity:.7f}"[2:]
    l2 = (f"2 {rec.satnum:05d} {rec.inclination:8.4f} {rec.raan:8.4f} {ecc} "
          f"{rec.arg_perigee:8.4f} {rec.mean_anomaly:8.4f} {rec.mean_motion:11.8f}    0")
    return f"{rec.name}\n{_with_checksum(l1)}\n{_with_checksum(l2)}\n"


# -- propagation --------------------------------------------------------------

@dataclass(frozen=True)
class TrackPoint:
    time: datetime
    lat: float              # deg
    lon: float              # deg, (-180, 180]
    alt_km: float
    true_anomaly: float     # rad
    r_eci: tuple            # km
    v_eci: tuple            # km/s

    @property
    def specific_energy(self) -> float:
        r = math.sqrt(sum(x * x for x in self.r_eci))
        v2 = sum(x * x for x in self.v_eci)
        return v2 / 2.0 - MU_EARTH / r


def gmst_deg(t: datetime) -> float:
    days = (t - J2000).total_seconds() / 86400.0
    return (280.46061837 + SIDEREAL_DEG_PER_DAY * days) % 360.0


def solve_kepler(m: float, e: float) -> float:
    """Eccentric anomaly for mean anomaly ``m`` (rad) by Newton iteration."""
    E = m if e < 0.8 else math.pi
    for _ in range(50):
        dE = (E - e * math.sin(E) - m) / (1.0 - e * math.cos(E))
        E -= dE
        if abs(dE) < 1e-14:
            break
    return E


def _rotation(raan: float, inc: float, argp: float) -> np.ndarray:
    cO, sO = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    return np.array([
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
        [sw * si, cw * si, ci],
    ])


def _as_time(rec: TLERecord, t) -> datetime:
    if isinstance(t, datetime):
        return t if t.tzinfo else t.replace(tzinfo=timezone.utc)
    return rec.epoch + timedelta(seconds=float(t))


def state_at(rec: TLERecord, t) -> TrackPoint:
    """Keplerian state at ``t`` (datetime, or seconds after the epoch)."""
    if rec.eccentricity >= 1.0:
        raise OrbitError("only elliptic orbits are supported")
    t = _as_time(rec, t)
    e = rec.eccentricity
    a = rec.semi_major_axis_km
    n = math.sqrt(MU_EARTH / a ** 3)
    dt = (t - rec.epoch).total_seconds()
    m = math.radians(rec.mean_anomaly) + n * dt
    E = solve_kepler(math.remainder(m, 2 * math.pi), e)
    nu = 2.0 * math.atan2(math.sqrt(1 + e) * math.sin(E / 2), math.sqrt(1 - e) * math.cos(E / 2))
    r = a * (1.0 - e * math.cos(E))
    p = a * (1.0 - e * e)
    r_pf = np.array([r * math.cos(nu), r * math.sin(nu), 0.0])
    v_pf = math.sqrt(MU_EARTH / p) * np.array([-math.sin(nu), e + math.cos(nu), 0.0])
    rot = _rotation(math.radians(rec.raan), math.radians(rec.inclination),
                    math.radians(rec.arg_perigee))
    r_eci = rot @ r_pf
    v_eci = rot @ v_pf
    theta = math.radians(gmst_deg(t))
    x = math.cos(theta) * r_eci[0] + math.sin(theta) * r_eci[1]
    y = -math.sin(theta) * r_eci[0] + math.cos(theta) * r_eci[1]
    lat = math.degrees(math.asin(max(-1.0, min(1.0, r_eci[2] / r))))
    lon = math.degrees(math.atan2(y, x))
    return TrackPoint(t, lat, lon, r - R_EARTH, nu, tuple(map(float, r_eci)),
                      tuple(map(float, v_eci)))


def propagate(rec: TLERecord, t0, t1, step: float = 10.0) -> list[TrackPoint]:
    """Samples at t0, t0 + step, ... up to and including t1 (within 1 us)."""
    if not step > 0:
        raise ValueError("step must be positive")
    start, end = _as_time(rec, t0), _as_time(rec, t1)
    span = (end - start).total_seconds()
    if not span > 0:
        raise ValueError("window end must come after its start")
    count = int(math.floor((span + 1e-6) / step)) + 1
    return [state_at(rec, start + timedelta(seconds=k * step)) for k in range(count)]
