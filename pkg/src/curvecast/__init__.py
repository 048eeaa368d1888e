"""Early prediction of accuracy learning curves from power-law trends."""

from curvecast.corpus import Corpus, LearningScheme, build_individuals, read_corpus, sentence_ceiling
from curvecast.errors import (
    AlignmentError,
    CurvecastError,
    DomainError,
    FormatError,
    InsufficientDataError,
    OutOfRangeError,
)
from curvecast.fitter import FitConfig, FitResult, PowerLawTrend, fit_power_law, fit_trend, initial_guess
from curvecast.harness import EvaluationReport, ExperimentConfig, RunSpec, evaluate_collection, load_experiment
from curvecast.levels import LevelConfig, Run, StoppingMonitor, detect_levels, slope_bound
from curvecast.metrics import ControlSequence, CurvePair, dmr, mape, pe, re, rer, rr
from curvecast.model import PowerLawParams, asymptote, evaluate, jacobian_row
from curvecast.observations import Observation, kfold_average, read_observations, write_observations
from curvecast.report import emit_report
from curvecast.simulator import SyntheticLearner, generate, make_fleet
from curvecast.trace import LearningTrace, build_trace

__version__ = "0.1.0"
