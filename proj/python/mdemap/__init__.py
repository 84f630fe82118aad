"""Multiscale moving-direction entropy maps from GPS trajectories."""

from ._core import (
    AreaOfInterest,
    GeoPoint,
    MdeError,
    MdeField,
    MovementVector,
    Station,
    TrajectoryPoint,
    __version__,
    bin_of,
    combine,
    compute_field,
    default_top_k,
    direction_of,
    entropy,
    extract_movements,
    find_local_peaks,
    generate,
    geo_distance,
    inverse_project,
    mesh_center,
    mesh_of,
    normalize,
    parent_of,
    precision_curve,
    project,
    read_field_csv,
    read_points,
    read_stations_csv,
    recall_curve,
    run,
    top_k,
    write_field_csv,
)

DEFAULT_SCALES = (100.0, 1000.0, 2000.0, 4000.0)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
