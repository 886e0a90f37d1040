from .types import FitOptions, FitResult, Optimizer
from .objective import ObjectiveFunction, objective, gradient
from .engine import fit_map, fit_design
from .cv import (
    CvReport,
    held_out_loss,
    cross_validate_sigma,
    tune_prior_sigma,
    resolve_cv_sigmas,
    resolve_cv_sigmas_with_reports,
)
from .io import save_fit_result, load_fit_result, fit_result_to_dict, fit_result_from_dict
