"""Interaction-aware decompositions of the total variation between a binary
treatment and an outcome, with exact and Monte Carlo ground truth from
structural causal models."""
from .builtin import builtin_names, builtin_scm
from .data import DataError, Dataset
from .effects import EffectSpec, PoQuery, decomposition, effect, z_de_ie
from .estimators import EffectEstimate, effect_estimate, po_estimate
from .experiments import ExperimentGrid, desk_grid, full_grid, run_grid, summarize
from .inference import (DecompositionReport, TestResult, benjamini_hochberg, granular_tests,
                        interaction_test, run_alg1, run_alg2, z_specific_de_ie)
from .io import ingest_csv, read_roles
from .learners import LearnerConfig
from .nuisance import fit_nuisances, make_fold_plan
from .oracle import Contrast, oracle_contrast, oracle_expectation
from .scm import InterventionClause, ScmSpec, parse_scm, sample_frame, sample_observational
from .structural import MechanismShape, check_all

__version__ = "0.1.0"
