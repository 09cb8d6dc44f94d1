"""Turn assessed observations into triples in the ``aq:`` vocabulary."""

from __future__ import annotations

import re
from typing import Mapping
from urllib.parse import quote

from ..it2core import POLLUTANTS, TERMS
from .terms import RDF_TYPE, XSD, Literal, Triple, aq, float_literal

OBSERVATION = aq("Observation")
HAS_STATION = aq("hasStationId")
HAS_AQI_VALUE = aq("hasAQIValue")
HAS_AQI_CATEGORY = aq("hasAQICategory")

_SAFE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")


def pollutant_key(pollutant: str) -> str:
    """``PM2.5`` -> ``PM25``; used in property and individual names."""
    return pollutant.replace(".", "")


def category_property(pollutant: str):
    return aq(f"has{pollutant_key(pollutant)}Category")


def pollutant_term(pollutant: str, term: str):
    if term not in TERMS:
        raise ValueError(f"unknown category {term!r}")
    return aq(f"{pollutant_key(pollutant)}_{term}")


def aqi_term(term: str):
    if term not in TERMS:
        raise ValueError(f"unknown category {term!r}")
    return aq(f"AQI{term}")


def station_iri(station: str):
    local = station if _SAFE.fullmatch(station) else "Station_" + quote(station, safe="")
    return aq(local)


def observation_iri(index: int):
    return aq(f"Observation{index}")


def observation_to_triples(
    station: str,
    aqi: float,
    category: str | None,
    pollutant_categories: Mapping[str, str],
    index: int,
) -> list[Triple]:
    """Triples for one assessed observation named ``Observation<index>``.

    The AQI value is stored as a float literal rounded to one decimal. Pass
    ``category=None`` to leave the AQI category for the rules to infer.
    """
    obs = observation_iri(index)
    out = [
        Triple(obs, RDF_TYPE, OBSERVATION),
        Triple(obs, HAS_STATION, station_iri(station)),
        Triple(obs, HAS_AQI_VALUE, Literal(f"{round(float(aqi), 1):.1f}", XSD + "float")),
    ]
    if category is not None:
        out.append(Triple(obs, HAS_AQI_CATEGORY, aqi_term(category)))
    for p in POLLUTANTS:
        out.append(Triple(obs, category_property(p), pollutant_term(p, pollutant_categories[p])))
    return out


def assessment_triples(records, assessments, start: int = 1) -> list[Triple]:
    """Triples for paired clean records and assessments, numbered from ``start``."""
    out = []
    for i, (rec, a) in enumerate(zip(records, assessments), start=start):
        out.extend(observation_to_triples(rec.station, a.aqi, a.category, a.pollutant_categories, i))
    return out


def weather_triples(index: int, weather_type: str, wind_speed: float | None = None) -> list[Triple]:
    w = aq(f"WeatherObservation{index}")
    out = [Triple(w, RDF_TYPE, aq("WeatherObservation")), Triple(w, aq("hasWeatherType"), aq(weather_type))]
    if wind_speed is not None:
        out.append(Triple(w, aq("hasWindSpeed"), float_literal(wind_speed)))
    return out


__all__ = [
    "aqi_term",
    "assessment_triples",
    "category_property",
    "observation_iri",
    "observation_to_triples",
    "pollutant_key",
    "pollutant_term",
    "station_iri",
    "weather_triples",
]
