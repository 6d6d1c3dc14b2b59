"""regulab: a computational laboratory for regulus strips, their parameter
duality, shaded-union measure experiments, and the Heisenberg Nikodym
maximal function."""

from .errors import (
    BadScale,
    ConfigError,
    DegenerateCurve,
    DegenerateHeight,
    DegenerateLine,
    GenerationExhausted,
    GridTooLarge,
    InsufficientData,
    InsufficientSamples,
    InvariantFailure,
    RegulabError,
    ZeroFunction,
)
from .geom_core import (
    EPS_MIN,
    DualTube,
    Line,
    LLine,
    Regulus,
    RegulusStrip,
    dual_tube,
    line_point,
    ruling_defect,
    sl2_check,
    sl2_reparameterize,
    strip_membership,
)
from .duality import (
    CurveSystem,
    Frame,
    Plank,
    SliceTube,
    coplanarity_defect,
    dual_direction,
    dual_ray,
    frame_at,
    pi_t_basis,
    plank_for,
    printed_xi_prime,
    project_pi_t,
    projected_segment,
    slice_tube,
)
from .family import (
    StripFamily,
    gen_clustered_family,
    gen_random_family,
    gen_sl2_example,
    keep_probability,
    sample_refine,
)
from .conditions import (
    BallConditionReport,
    RadiusRecord,
    ball_condition_count,
    ball_condition_volume,
    disjointness_ratio,
    dyadic_radii,
)
from .measure import (
    HTube,
    OccupancyGrid,
    Shading,
    brute_force_strip_volume,
    decompose_htubes,
    kakeya_ratio,
    make_shading,
    mc_union_measure,
    plank_union_measure,
    rasterize,
    rasterize_shading,
    regularize,
    slice_correspondence,
    slice_measure,
    strip_volumes,
)
from .heisenberg import (
    GridFunction,
    HLine,
    ball_indicator,
    const_function,
    family_indicator,
    h_inv,
    h_mul,
    hline_of,
    htube_membership,
    koranyi_distance,
    koranyi_norm,
    line_embedding,
    lp_ratio,
    nikodym_maximal,
    strip_vs_htube,
    tube_indicator,
)
from .experiments import (
    ScalingResult,
    fit_exponent,
    load_config,
    run_regression,
    run_scaling,
)
from .rng import make_rng

__version__ = "0.1.0"
