"""Objective library: the analytic test problems, Lasso/SINDy least squares
and a small softmax classifier."""

from .analytic import (Example1, Example2, Example3, LeastSquares, Polynomial, Quadratic,
                       Split, Toy3, make_paper_problem, random_lasso_instance)
from .base import HESSIAN_MODES, ObjectiveModel
from .mlp import (LabeledData, MlpProblem, build_mlp, load_dataset_csv, load_iris, make_iris_mlp,
                  train_test_split)
from .sindy import (SindyProblem, TrajectoryData, build_sindy, central_differences, lorenz_rhs,
                    monomial_exponents, simulate_lorenz)

__all__ = [
    "ObjectiveModel", "HESSIAN_MODES", "Example1", "Example2", "Example3", "Toy3", "Split",
    "Polynomial", "Quadratic", "LeastSquares", "make_paper_problem", "random_lasso_instance",
    "SindyProblem", "TrajectoryData", "build_sindy", "simulate_lorenz", "lorenz_rhs",
    "central_differences", "monomial_exponents", "MlpProblem", "LabeledData", "build_mlp",
    "load_iris", "load_dataset_csv", "make_iris_mlp", "train_test_split",
]
