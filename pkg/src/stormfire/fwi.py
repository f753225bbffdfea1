"""Canadian Fire Weather Index System: the three moisture codes (FFMC, DMC,
DC) carried day to day plus the derived ISI, BUI, and FWI indices.

Scalar implementation of the standard daily equations (noon weather
convention). Pipelines that already ingest precomputed index columns bypass
this module entirely; it exists for inputs that ship raw weather only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

log = logging.getLogger(__name__)

LATITUDE_BANDS = ("north", "south", "equatorial")

# Effective day-length hours (DMC drying) and day-length factors (DC
# evapotranspiration), January..December, northern mid-latitudes.
DAY_LENGTH_NORTH = (6.5, 7.5, 9.0, 12.8, 13.9, 13.9, 12.4, 10.9, 9.4, 8.0, 7.0, 6.0)
DRYING_FACTOR_NORTH = (-1.6, -1.6, -1.6, 0.9, 3.8, 5.8, 6.4, 5.0, 2.4, 0.4, -1.6, -1.6)
DAY_LENGTH_EQUATORIAL = 9.0
DRYING_FACTOR_EQUATORIAL = 1.39

DEFAULT_START = None  # set below once FwiState exists


@dataclass(frozen=True)
class DailyWeather:
    """One day of noon weather driving the index system."""

    temp_c: float
    rh_pct: float
    wind_kmh: float
    rain_mm: float
    month: int
    latitude_band: str = "north"

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month {self.month} outside 1..12")
        if self.latitude_band not in LATITUDE_BANDS:
            raise ValueError(f"unknown latitude_band {self.latitude_band!r}")


@dataclass(frozen=True)
class FwiState:
    """Carried moisture codes: fine fuel, duff, and deep drought."""

    ffmc: float
    dmc: float
    dc: float

    def __post_init__(self) -> None:
        for name, value in (("ffmc", self.ffmc), ("dmc", self.dmc), ("dc", self.dc)):
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0.0 <= self.ffmc <= 101.0:
            raise ValueError(f"ffmc {self.ffmc} outside [0, 101]")
        if self.dmc < 0.0 or self.dc < 0.0:
            raise ValueError("dmc and dc must be non-negative")


@dataclass(frozen=True)
class FwiOutputs:
    isi: float
    bui: float
    fwi: float


#: Conventional system start-up values.
DEFAULT_START = FwiState(ffmc=85.0, dmc=6.0, dc=15.0)


def band_for_latitude(lat: float) -> str:
    """Three-band rule: within 15 degrees of the equator the seasonal tables
    flatten out; beyond that the hemisphere picks the table phase."""
    if abs(lat) < 15.0:
        return "equatorial"
    return "north" if lat > 0 else "south"


def day_length(month: int, band: str) -> float:
    """DMC effective day length; the southern hemisphere mirrors the northern
    table by six months, the equatorial band is season-free."""
    if band == "equatorial":
        return DAY_LENGTH_EQUATORIAL
    if band == "south":
        return DAY_LENGTH_NORTH[(month - 1 + 6) % 12]
    return DAY_LENGTH_NORTH[month - 1]


def drying_factor(month: int, band: str) -> float:
    if band == "equatorial":
        return DRYING_FACTOR_EQUATORIAL
    if band == "south":
        return DRYING_FACTOR_NORTH[(month - 1 + 6) % 12]
    return DRYING_FACTOR_NORTH[month - 1]


def _clamped_weather(wx: DailyWeather) -> tuple[float, float, float, float]:
    """Clamp out-of-range inputs to physical limits, logging what changed."""
    rh, wind, rain = wx.rh_pct, wx.wind_kmh, wx.rain_mm
    if not 0.0 <= rh <= 100.0:
        log.warning("clamping rh_pct %.3f into [0, 100]", rh)
        rh = min(max(rh, 0.0), 100.0)
    if wind < 0.0:
        log.warning("clamping negative wind_kmh %.3f to 0", wind)
        wind = 0.0
    if rain < 0.0:
        log.warning("clamping negative rain_mm %.3f to 0", rain)
        rain = 0.0
    return wx.temp_c, rh, wind, rain


def _rain_soaked_moisture(mo: float, rain_mm: float) -> float:
    """Fine fuel moisture after absorbing the day's rain; rain above the
    0.5 mm canopy interception only ever adds moisture, capped at 250."""
    if rain_mm <= 0.5:
        return mo
    rf = rain_mm - 0.5
    mr = mo + 42.5 * rf * math.exp(-100.0 / (251.0 - mo)) * (1.0 - math.exp(-6.93 / rf))
    if mo > 150.0:
        mr += 0.0015 * (mo - 150.0) ** 2 * math.sqrt(rf)
    return min(mr, 250.0)


def ffmc_after_rain(ffmc_prev: float, rain_mm: float) -> float:
    """Fine fuel code after the rain-absorption phase alone, before the
    drying/wetting exchange with the day's air. Exposed so the no-drying-
    during-rain property can be checked in isolation."""
    mo = 147.2 * (101.0 - ffmc_prev) / (59.5 + ffmc_prev)
    m = _rain_soaked_moisture(mo, rain_mm)
    return 59.5 * (250.0 - m) / (147.2 + m)


def _ffmc_step(ffmc_prev: float, temp: float, rh: float, wind: float, rain: float) -> float:
    mo = _rain_soaked_moisture(147.2 * (101.0 - ffmc_prev) / (59.5 + ffmc_prev), rain)
    ed = (
        0.942 * rh**0.679
        + 11.0 * math.exp((rh - 100.0) / 10.0)
        + 0.18 * (21.1 - temp) * (1.0 - math.exp(-0.115 * rh))
    )
    if mo > ed:
        ko = 0.424 * (1.0 - (rh / 100.0) ** 1.7) + 0.0694 * math.sqrt(wind) * (
            1.0 - (rh / 100.0) ** 8
        )
        kd = ko * 0.581 * math.exp(0.0365 * temp)
        m = ed + (mo - ed) * 10.0**-kd
    else:
        ew = (
            0.618 * rh**0.753
            + 10.0 * math.exp((rh - 100.0) / 10.0)
            + 0.18 * (21.1 - temp) * (1.0 - math.exp(-0.115 * rh))
        )
        if mo < ew:
            kl = 0.424 * (1.0 - ((100.0 - rh) / 100.0) ** 1.7) + 0.0694 * math.sqrt(
                wind
            ) * (1.0 - ((100.0 - rh) / 100.0) ** 8)
            kw = kl * 0.581 * math.exp(0.0365 * temp)
            m = ew - (ew - mo) * 10.0**-kw
        else:
            m = mo
    ffmc = 59.5 * (250.0 - m) / (147.2 + m)
    return min(max(ffmc, 0.0), 101.0)


def _dmc_step(dmc_prev: float, temp: float, rh: float, rain: float, month: int, band: str) -> float:
    if rain > 1.5:
        re = 0.92 * rain - 1.27
        m0 = 20.0 + math.exp(5.6348 - dmc_prev / 43.43)
        if dmc_prev <= 33.0:
            b = 100.0 / (0.5 + 0.3 * dmc_prev)
        elif dmc_prev <= 65.0:
            b = 14.0 - 1.3 * math.log(dmc_prev)
        else:
            b = 6.2 * math.log(dmc_prev) - 17.2
        mr = m0 + 1000.0 * re / (48.77 + b * re)
        pr = max(244.72 - 43.43 * math.log(mr - 20.0), 0.0)
    else:
        pr = dmc_prev
    t_eff = max(temp, -1.1)
    k = 1.894 * (t_eff + 1.1) * (100.0 - rh) * day_length(month, band) * 1e-6
    return max(pr + 100.0 * k, 0.0)


def _dc_step(dc_prev: float, temp: float, rain: float, month: int, band: str) -> float:
    if rain > 2.8:
        rd = 0.83 * rain - 1.27
        q0 = 800.0 * math.exp(-dc_prev / 400.0)
        dr = max(400.0 * math.log(800.0 / (q0 + 3.937 * rd)), 0.0)
    else:
        dr = dc_prev
    v = max(0.36 * (max(temp, -2.8) + 2.8) + drying_factor(month, band), 0.0)
    return dr + v / 2.0


def initial_spread_index(ffmc: float, wind_kmh: float) -> float:
    """ISI from the day's fine fuel code and wind; wind 0 keeps the wind
    factor at exactly 1."""
    m = 147.2 * (101.0 - ffmc) / (59.5 + ffmc)
    f_wind = math.exp(0.05039 * wind_kmh)
    f_fuel = 91.9 * math.exp(-0.1386 * m) * (1.0 + m**5.31 / 4.93e7)
    return 0.208 * f_wind * f_fuel


def buildup_index(dmc: float, dc: float) -> float:
    if dmc <= 0.4 * dc:
        denom = dmc + 0.4 * dc
        if denom == 0.0:
            return 0.0
        bui = 0.8 * dmc * dc / denom
    else:
        bui = dmc - (1.0 - 0.8 * dc / (dmc + 0.4 * dc)) * (0.92 + (0.0114 * dmc) ** 1.7)
    return max(bui, 0.0)


def fire_weather_index(isi: float, bui: float) -> float:
    if bui <= 80.0:
        f_d = 0.626 * bui**0.809 + 2.0
    else:
        f_d = 1000.0 / (25.0 + 108.64 * math.exp(-0.023 * bui))
    b = 0.1 * isi * f_d
    if b > 1.0:
        return math.exp(2.72 * (0.434 * math.log(b)) ** 0.647)
    return b


def step(state: FwiState, wx: DailyWeather) -> tuple[FwiState, FwiOutputs]:
    """Advance the moisture codes by one day and derive the day's indices."""
    temp, rh, wind, rain = _clamped_weather(wx)
    ffmc = _ffmc_step(state.ffmc, temp, rh, wind, rain)
    dmc = _dmc_step(state.dmc, temp, rh, rain, wx.month, wx.latitude_band)
    dc = _dc_step(state.dc, temp, rain, wx.month, wx.latitude_band)
    isi = initial_spread_index(ffmc, wind)
    bui = buildup_index(dmc, dc)
    fwi = fire_weather_index(isi, bui)
    return FwiState(ffmc, dmc, dc), FwiOutputs(isi, bui, fwi)


def roll_series(init: FwiState, days: Iterable[DailyWeather]) -> list[FwiOutputs]:
    """Thread state through a chronological day list; one output per day."""
    state = init
    outputs: list[FwiOutputs] = []
    for wx in days:
        state, out = step(state, wx)
        outputs.append(out)
    if not outputs:
        raise ValueError("empty series")
    return outputs


def roll_series_with_state(
    init: FwiState, days: Iterable[DailyWeather]
) -> tuple[FwiState, list[FwiOutputs]]:
    """Like :func:`roll_series` but also returns the final carried state, so a
    series can be split and resumed without re-rolling."""
    state = init
    outputs: list[FwiOutputs] = []
    for wx in days:
        state, out = step(state, wx)
        outputs.append(out)
    if not outputs:
        raise ValueError("empty series")
    return state, outputs
