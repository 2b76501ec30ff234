"""Emanation graphs and their simplified grade-2 variant, with spanner metrics and a Delaunay baseline."""

__version__ = "0.1.0"

from .delaunay import TriangleMeshFiles, delaunay, import_triangle
from .emanation import BBox, RaySegment, StopCause, TiePolicy, build_emanation, simulate_rays
from .errors import (ConfigError, DegenerateInput, DuplicatePoint, EmanetError, EmptyGraph,
                     InternalInvariantViolation, ModeUnsupported, ParseError)
from .experiment import ExperimentConfig, compare_experiment
from .geom import ConeId, Frame, Order, Orientation, Point, RayTime, compare_times, cone_of, orientation, ray_intersection
from .graph import Kind, PlaneGraph, Vertex, check_plane_graph
from .io import generate_points, read_graph, read_points, render_svg, write_graph, write_points
from .metrics import MetricsReport, metrics_report, min_angle, shortest_paths_from, spanning_ratio
from .rangetree import ConeIndex, build_index, query_first_in_cone
from .seg import Candidate, Elbow, SegConfig, TopNeighbor, build_seg, connect, is_blocked, select_candidates, select_top_neighbor
