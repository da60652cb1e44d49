"""tcbforge: design compiler, rule checker and fabrication backend for
thermoformed 3D-printed circuit boards."""

__version__ = "0.1.0"

from .errors import (
    EmptyGridError,
    GcodeError,
    GeometryError,
    LayoutError,
    PlanError,
    SolidsError,
    StlError,
    TcbError,
)
from .geometry import (
    BendLine,
    FlexZone,
    GridPoint,
    Mesh,
    PlanarOutline,
    PointGrid,
    Stackup,
    bend_surface_strain,
    deflection_angle,
    deflection_for_angle,
    flexural_strain,
    generate_point_grid,
)
from .folding import fold_preview, refine_for_bends
from .layout import (
    BoardDesign,
    Net,
    Socket,
    StructuralError,
    Trace,
    Via,
    derive_nets,
    trace_length,
    validate_design,
)
from .dsl import DslError, ParseError, SourceSpan, parse, serialize
from .drc import (
    CONDUCTIVE_PLA,
    BendPenaltyTable,
    DrcConfig,
    DrcFinding,
    DrcReport,
    MaterialProfile,
    check_current,
    check_flex,
    check_geometry,
    estimate_trace_resistance,
    run_drc,
)
from .solids import SolidSet, generate_solids
from .stl_io import export_stl, mesh_from_stl
from .gcode import (
    DEFAULT_TOOL_PROFILES,
    GcodeOptions,
    GcodeProgram,
    ToolProfile,
    parse_gcode,
    patch_gcode,
)
from .plan import PlanStep, ProcessPlan, plan_process

__all__ = [
    "BendLine",
    "BendPenaltyTable",
    "BoardDesign",
    "CONDUCTIVE_PLA",
    "DEFAULT_TOOL_PROFILES",
    "DrcConfig",
    "DrcFinding",
    "DrcReport",
    "DslError",
    "EmptyGridError",
    "FlexZone",
    "GcodeError",
    "GcodeOptions",
    "GcodeProgram",
    "GeometryError",
    "GridPoint",
    "LayoutError",
    "MaterialProfile",
    "Mesh",
    "Net",
    "ParseError",
    "PlanError",
    "PlanStep",
    "PlanarOutline",
    "PointGrid",
    "ProcessPlan",
    "Socket",
    "SolidSet",
    "SolidsError",
    "SourceSpan",
    "Stackup",
    "StlError",
    "StructuralError",
    "TcbError",
    "ToolProfile",
    "Trace",
    "Via",
    "bend_surface_strain",
    "check_current",
    "check_flex",
    "check_geometry",
    "deflection_angle",
    "deflection_for_angle",
    "derive_nets",
    "estimate_trace_resistance",
    "export_stl",
    "flexural_strain",
    "fold_preview",
    "generate_point_grid",
    "generate_solids",
    "mesh_from_stl",
    "parse",
    "parse_gcode",
    "patch_gcode",
    "plan_process",
    "refine_for_bends",
    "run_drc",
    "serialize",
    "trace_length",
    "validate_design",
    "__version__",
]
