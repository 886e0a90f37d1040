from .types import (
    CV,
    Sigma,
    SharedTerm,
    ModifierTerm,
    BasePrior,
    RatingSpec,
    ParamIndex,
    Params,
)
from .engine import (
    build_index,
    rating_of,
    win_probability,
    prior_vectors,
    prior_means,
    extend_params,
)
from .design import GameDesign, compile_design
from .spec_io import rating_spec_from_dict, rating_spec_to_dict, load_rating_spec, save_rating_spec
