"""Instance construction: orbital data, coverage, graph builders, synthetic suites."""

from .build import (GroundNetwork, RoutedPath, build_gsp_instance, build_sap_instance,
                    build_ssp_instance, elevation_visibility, overlap_fraction, restrict_gsp,
                    route_paths)
from .coverage import (CoverageSample, CoverageTrack, Footprint, Region, RegionError, Site,
                       coverage_fraction, coverage_track, elevation_deg, footprint_of,
                       footprint_radius_deg, read_sites, stable_seed, write_sites)
from .synth import InstanceTriple, synth_suite, synth_triple, triple_from_sources
from .tle import (OrbitError, TLEError, TLERecord, TrackPoint, checksum, format_tle, parse_tle,
                  propagate, state_at)

__all__ = [
    "CoverageSample", "CoverageTrack", "Footprint", "GroundNetwork", "InstanceTriple",
    "OrbitError", "Region", "RegionError", "RoutedPath", "Site", "TLEError", "TLERecord",
    "TrackPoint", "build_gsp_instance", "build_sap_instance", "build_ssp_instance", "checksum",
    "coverage_fraction", "coverage_track", "elevation_deg", "elevation_visibility",
    "footprint_of", "footprint_radius_deg", "format_tle", "overlap_fraction", "parse_tle",
    "propagate", "read_sites", "restrict_gsp", "route_paths", "stable_seed", "state_at",
    "synth_suite", "synth_triple", "triple_from_sources", "write_sites",
]
