"""Calibrated geometry in flat R^n: exterior algebra, comass, phi-Grassmannians,
cones, phi-Hessians, polyhedral currents and finite duality models."""

from ._calibr import (
    Calibration,
    DimensionError,
    Form,
    InputError,
    __version__,
    boundary_batch,
    catalogue,
    catalogue_list,
    comass,
    criterion_count,
    criterion_name,
    hodge_star,
    interior_product,
    jensen,
    mass_norm,
    normality_check,
    pairing,
    plucker,
    run_criterion,
    sample_grassmannian,
    user_calibration,
    wedge,
)

__all__ = [
    "Calibration",
    "DimensionError",
    "Form",
    "InputError",
    "boundary_batch",
    "catalogue",
    "catalogue_list",
    "comass",
    "criterion_count",
    "criterion_name",
    "hodge_star",
    "interior_product",
    "jensen",
    "mass_norm",
    "normality_check",
    "pairing",
    "plucker",
    "run_criterion",
    "sample_grassmannian",
    "user_calibration",
    "wedge",
]
