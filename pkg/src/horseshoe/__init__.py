"""Validated numerics for complex horseshoes of generalized Henon maps."""

from .certificates import (
    Certificate,
    ComponentReport,
    ConeField,
    CriticalValueReport,
    DecayReport,
    bidisc_radius,
    certify_chain,
    certify_cone_sweep,
    certify_inequality,
    component_count,
    critical_values_escape,
    fiber_diameter_decay,
    inequality_threshold,
    optimize_aperture,
)
from .henon import (
    Bidisc,
    BoundaryReport,
    Diverged,
    HenonMap,
    Verdict,
    boundary_degree,
    check_quasi_henon_like,
    parse_complex,
    parse_map,
)
from .homoclinic import (
    EmbeddedBidiscChart,
    HomoclinicPoint,
    ManifoldParam,
    ResonanceError,
    SaddleData,
    build_horseshoe,
    chart_component_count,
    find_homoclinic,
    find_saddle,
    parametrize_manifold,
)
from .intervals import Box2, ComplexRect
from .periodic import CycleCount, PeriodicPoint, count_cycles, enumerate_periodic
from .symbolic import (
    ComponentLabeling,
    NotInK,
    SymbolWord,
    UnresolvedSymbol,
    build_labeling,
    itinerary,
    refine_point,
)
from .invariant_sets import (
    BOUNDED,
    OrbitClass,
    RasterResult,
    SliceSpec,
    boundary_mask,
    classify,
    classify_grid,
    render_slice,
    write_csv,
    write_ppm,
)

__all__ = [
    "BOUNDED",
    "Bidisc",
    "BoundaryReport",
    "Box2",
    "Certificate",
    "ComplexRect",
    "ComponentLabeling",
    "ComponentReport",
    "ConeField",
    "CriticalValueReport",
    "CycleCount",
    "DecayReport",
    "Diverged",
    "HenonMap",
    "NotInK",
    "OrbitClass",
    "PeriodicPoint",
    "RasterResult",
    "SliceSpec",
    "EmbeddedBidiscChart",
    "HomoclinicPoint",
    "ManifoldParam",
    "ResonanceError",
    "SaddleData",
    "SymbolWord",
    "UnresolvedSymbol",
    "Verdict",
    "bidisc_radius",
    "boundary_degree",
    "boundary_mask",
    "build_horseshoe",
    "build_labeling",
    "certify_chain",
    "certify_cone_sweep",
    "certify_inequality",
    "chart_component_count",
    "check_quasi_henon_like",
    "classify",
    "classify_grid",
    "component_count",
    "count_cycles",
    "critical_values_escape",
    "enumerate_periodic",
    "fiber_diameter_decay",
    "find_homoclinic",
    "find_saddle",
    "inequality_threshold",
    "itinerary",
    "optimize_aperture",
    "parametrize_manifold",
    "parse_complex",
    "parse_map",
    "refine_point",
    "render_slice",
    "write_csv",
    "write_ppm",
]

__version__ = "0.1.0"
