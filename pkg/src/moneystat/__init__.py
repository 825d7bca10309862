"""Kinetic exchange models of money, wealth and income distributions.

Simulators (pairwise exchange rules, firms, reserve-ratio lending, a
money-and-stock market, multiplicative growth models, income diffusion)
together with the closed-form stationary laws they are checked against and
the estimators used to compare the two.
"""
from .errors import *  # noqa: F401,F403
from .population import Population, effective_temperature, new_population, total_money
from .rules import (DirectedLinks, FirmParams, FirmRound, FixedAmount, Proportional,
                    RandomFractionOfAverage, RandomFractionOfPairSum, RandomSavingPropensity,
                    SavingPropensity)
from .kinetics import (SimConfig, TransferOutcome, apply_rule, measure_transition_symmetry,
                       pair_transfer, run_kinetics, run_reserve_ratio)
from .firm import firm_round, optimize_firm
from .laws import (ArctanInterpolating, Exponential, FamilyIncome, Gamma, InverseGammaBM)
from .empirics import (entropy, fit_exponential, fit_gamma_moments, fit_pareto_hill,
                       gini_empirical, histogram, ks_statistic, lorenz_empirical)
from .twoclass import TwoClassReport, two_class_decompose
from .income import income_kesten_simulate

__version__ = "0.1.0"
