"""Numerical workbench for exterior algebra, the inhomogeneous isometry
group, and global energy-momentum flux integrals on affine charts."""

__version__ = "0.1.0"

from .exterior import PForm, Signature, alt, hodge, inner_norm, insert, musical, musical_inv, volume_form, wedge
from .poincare import (
    AffineChartMap,
    PoincareElement,
    PoinLieElement,
    ad,
    coad,
    compose,
    fundamental_field,
    invert,
    lie_bracket,
    pairing,
    poincare_exp,
    rotation,
    standard_boost,
    translation,
)
from .fields import (
    FormField,
    MetricField,
    ScalarField,
    SymTensorField,
    VectorField,
    active_transform,
    boost_emt_analytic,
    current_from_killing,
    divergence,
    emt_to_form,
    fd_partial,
    identity_residuals,
    killing_residual,
    lie_derivative,
)
from .quadrature import (
    HyperplanePatch,
    MomentumValue,
    flux_charge,
    four_momentum,
    induced_measure,
    integrate_form,
    laue_integrals,
    momentum_map,
    transform_patch,
)
from .scenarios import build, coulomb_pair_energy, kinetic_stress_sums, tolman_weak_ep, trouton_noble_demo, virial_check
from .checkers import (
    classical_laue_report,
    conservation_check,
    equivariance_report,
    exact_current_factory,
    fake_covariance_check,
    gauss_residual,
    geometric_laue_residuals,
)
