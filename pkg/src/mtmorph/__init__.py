"""Trace-driven metamorphic testing for rule-based model transformations.

The toolkit executes declarative transformations while recording traces,
mines instance-count metamorphic relations from those traces, builds
follow-up test models by mutation, and checks the relations across
executions and across transformation versions.
"""

from .engine import Trace, TraceModel, execute_transformation, load_traces, save_traces
from .errors import (
    AnalysisError,
    ConformanceError,
    ExecutionError,
    InconsistentPatternError,
    InfeasibleMutationError,
    InvalidLocusError,
    MetamodelMismatchError,
    MtlSyntaxError,
    MtmorphError,
    ParseError,
    UnknownTypeError,
    UnsatisfiableSeedError,
    ValidationError,
)
from .checker import (
    ClauseVerdict,
    MRReport,
    check_mr,
    run_metamorphic_pipeline,
    run_regression,
)
from .model import (
    AttributeDef,
    Element,
    ElementType,
    Metamodel,
    Model,
    ReferenceDef,
    count_instances,
    load_metamodel,
    load_model,
    save_metamodel,
    save_model,
)
from .mrgen import (
    MetamorphicRelation,
    MRClause,
    Mutation,
    RulePattern,
    coverage_report,
    extract_patterns,
    generate_mrs,
    load_mrs,
    render_mr_ocl,
    save_mrs,
)
from .mtl import (
    Diagnostic,
    TransformationProgram,
    analyze,
    format_program,
    load_transformation,
    parse_transformation,
)
from .mutator import FaultSeed, apply_mutation, parse_fault_seed, seed_fault

__version__ = "0.1.0"

__all__ = [
    "AnalysisError", "AttributeDef", "ClauseVerdict", "ConformanceError",
    "Diagnostic", "Element", "ElementType", "ExecutionError", "FaultSeed",
    "InconsistentPatternError", "InfeasibleMutationError", "InvalidLocusError",
    "MRClause", "MRReport", "MetamodelMismatchError", "Metamodel",
    "MetamorphicRelation", "Model", "MtlSyntaxError", "MtmorphError",
    "Mutation", "ParseError", "ReferenceDef", "RulePattern", "Trace",
    "TraceModel", "TransformationProgram", "UnknownTypeError",
    "UnsatisfiableSeedError", "ValidationError", "analyze", "apply_mutation",
    "check_mr", "count_instances", "coverage_report", "execute_transformation",
    "extract_patterns", "format_program", "generate_mrs", "load_metamodel",
    "load_model", "load_mrs", "load_traces", "load_transformation",
    "parse_fault_seed", "parse_transformation", "render_mr_ocl",
    "run_metamorphic_pipeline", "run_regression", "save_metamodel",
    "save_model", "save_mrs", "save_traces", "seed_fault",
]
