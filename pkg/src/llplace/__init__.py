"""Indoor scene layout designer.

Pipeline pieces: asset retrieval, instruction templating, a pluggable
completion backend (remote model, deterministic heuristic solver, or
scripted replay), delimiter-JSON output parsing, dialogue-based scene
editing, training-corpus construction, overlap metrics, and SVG rendering.
"""

from .catalog import AssetCatalog, AssetRecord, DesignRequest, RequestItem
from .errors import LLplaceError
from .geometry import BBoxDims, PlacedObject, Point3, RoomBounds, SceneLayout
from .metrics import MetricsReport, evaluate_layout
from .parsing import OutputBlockKind, PlacementRecord
from .prompts import EditKind, EditRequest, PromptTemplates, default_templates
from .session import (
    BackendConfig,
    BackendKind,
    Session,
    create_session,
    run_edit,
    run_generation,
)

__all__ = [
    "AssetCatalog",
    "AssetRecord",
    "BBoxDims",
    "BackendConfig",
    "BackendKind",
    "DesignRequest",
    "EditKind",
    "EditRequest",
    "LLplaceError",
    "MetricsReport",
    "OutputBlockKind",
    "PlacedObject",
    "PlacementRecord",
    "Point3",
    "PromptTemplates",
    "RequestItem",
    "RoomBounds",
    "SceneLayout",
    "Session",
    "create_session",
    "default_templates",
    "evaluate_layout",
    "run_edit",
    "run_generation",
]

__version__ = "0.1.0"
