"""sievelogic: finite presheaf-topos machinery with exact quantum checks.

The package splits into a generic topos core (finite categories, sieves
and their Heyting algebras, presheaves with the sieve-valued subobject
classifier and global-section search) and an exact operator layer (Gaussian
rational spectral data, the thin category of operators and spectrum
functions, the dual and coarse-graining presheaves, sieve-valued
valuations) plus a CLI over scenario files.
"""

from .errors import SieveLogicError, SizeLimitExceeded
from .fincat import (
    Arrow,
    FinCategory,
    ObjectId,
    arrows_from,
    build_category,
    compose,
    poset_to_category,
)
from .heyting import (
    FiniteTopology,
    HeytingAlgebraTable,
    Sieve,
    all_sieves,
    codomain_view,
    empty_sieve,
    excluded_middle_violations,
    is_sieve,
    make_sieve,
    make_topology,
    open_set_heyting,
    principal_sieve,
    push_sieve,
    sieve_algebra,
    sieve_implies,
    sieve_join,
    sieve_leq,
    sieve_meet,
    sieve_not,
    validate_heyting_table,
)
from .presheaf import (
    GlobalSection,
    NaturalTransformation,
    Presheaf,
    Subobject,
    characteristic_arrow,
    check_global_section,
    enumerate_natural_transformations,
    enumerate_subobjects,
    global_section_search,
    global_sections,
    is_natural,
    make_presheaf,
    omega_presheaf,
    subobject_from_arrow,
    subobject_from_family,
    terminal_presheaf,
    validate_presheaf,
)
from .quantum import (
    OperatorCategory,
    SieveValuation,
    SpectralAlgebra,
    SpectralOperator,
    State,
    born_prob,
    build_operator_category,
    coarse_graining_presheaf,
    dual_presheaf,
    find_arrow,
    func_check,
    function_of,
    ks_global_section_search,
    make_operator,
    make_state,
    nu_state,
    nu_state_valuation,
    spectral_projector,
    spectrum_subsets,
    valuation_transformation,
    verify_spectral_operator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
