"""Finite approximative sequences, finite spaces and inverse persistence."""

from .config import FasConfig, HomologyConfig
from .errors import (
    CapViolationError,
    InputError,
    InternalConsistencyError,
    InvPersError,
    PreconditionError,
    ResourceLimitError,
    StructuralError,
    ValidationError,
)
from .fas import (
    FasSequence,
    build_fas,
    epsilon_approximation,
    nearby_set,
    trace_point,
    transition_image,
    triadic_fas,
    warsaw_fas,
)
from .finite_spaces import (
    FinitePoset,
    SimplicialComplex,
    barycentric_subdivision,
    face_poset,
    level_poset,
    order_complex,
    u_space,
    vr_complex,
)
from .homology import betti_numbers, chain_complex, homology_basis, induced_homology_map
from .metric import (
    FiniteMetricSpace,
    generate_space,
    hausdorff_distance,
    load_space,
    sample_triadic_interval,
    sample_ultrametric_cantor,
    sample_warsaw,
)
from .persistence import (
    Barcode,
    PersistenceModule,
    bottleneck_distance,
    interval_decomposition,
    inverse_barcode,
    inverse_module,
    rank_function,
    vr_filtration_persistence,
)

__version__ = "0.1.0"

__all__ = [
    "Barcode",
    "CapViolationError",
    "FasConfig",
    "FasSequence",
    "FiniteMetricSpace",
    "FinitePoset",
    "HomologyConfig",
    "InputError",
    "InternalConsistencyError",
    "InvPersError",
    "PersistenceModule",
    "PreconditionError",
    "ResourceLimitError",
    "SimplicialComplex",
    "StructuralError",
    "ValidationError",
    "barycentric_subdivision",
    "betti_numbers",
    "bottleneck_distance",
    "build_fas",
    "chain_complex",
    "epsilon_approximation",
    "face_poset",
    "generate_space",
    "hausdorff_distance",
    "homology_basis",
    "induced_homology_map",
    "interval_decomposition",
    "inverse_barcode",
    "inverse_module",
    "level_poset",
    "load_space",
    "nearby_set",
    "order_complex",
    "rank_function",
    "sample_triadic_interval",
    "sample_ultrametric_cantor",
    "sample_warsaw",
    "trace_point",
    "transition_image",
    "triadic_fas",
    "u_space",
    "vr_complex",
    "vr_filtration_persistence",
    "warsaw_fas",
]
