"""QUBO gadgets for the l1 norm and related non-smooth functions."""

from .encoding import AffineExpr, FixedPointEncoding, QuadraticExpr, VarAllocator, as_affine, decode, lower_quadratic, make_encoding
from .errors import (
    DimensionError,
    DomainError,
    InfeasibleGadgetError,
    ParseError,
    QuboError,
    SizeError,
    UnsupportedDegreeError,
)
from .gadgets import (
    GadgetExpansion,
    PenaltyConfig,
    QLossParams,
    RegularizedLS,
    abs_reference,
    build_l1_gadget,
    build_qloss_gadget,
    build_regularized_ls,
    build_relu_gadget,
    default_penalty,
    l1_naive_objective,
    l1_reduced_objective,
    legendre_conjugate_numeric,
    penalize_equality,
    qloss_objective,
    qloss_reference,
    relu_reference,
    relu_wolfe_objective,
    soft_threshold,
)
from .qubo import IsingModel, QuboBuilder, QuboModel, evaluate_ising, evaluate_qubo, ising_to_qubo, qubo_to_ising
from .solvers import (
    AnnealSchedule,
    ProposalConfig,
    SolveResult,
    anneal_continuous,
    anneal_continuous_many,
    anneal_discrete,
    anneal_discrete_many,
    brute_force,
    metropolis_accept,
)

__version__ = "0.1.0"
