"""Jump-robust integrated volatility from high-frequency samples.

The core estimators rank every scaled increment of a path and discard the
largest fraction before summing squares (global filtering).  Increments are
scaled by a local spot-volatility estimate, itself computed with the same
filter inside a moving window.

Modules
-------
numcore      normal distribution helpers, filter constants, ranking
pathdata     sampled paths, CSV input/output, truncation indicators
spotvol      windowed spot-volatility series
estimators   global filters and the classical baselines
simulate     jump-diffusion simulator with oracle integrated variance
harness      Monte Carlo experiments and sweeps
cli          command-line front end (``python -m globalrv``)
"""

from .estimators import (Estimate, FixedAlphaConfig, MovingThresholdConfig, bv, error_ratio,
                         grv_constant_vol, grv_fixed, grv_moving, minrv, rv, studentize, trv,
                         wgrv_fixed, wgrv_moving)
from .harness import (ConfigError, EstimatorParams, ExperimentConfig, config_from_dict,
                      estimate_by_label, parse_label, qq_data, run_experiment, run_sweep,
                      summarize)
from .numcore import filter_constants, norm_cdf, norm_quantile, rank_and_order
from .pathdata import (NO_TRUNCATION, FormatError, SampledPath, TruncationConfig, load_csv,
                       write_csv)
from .simulate import (JumpSpec, SimulationError, root_quadratic_model, simulate,
                       sine_squared_model)
from .spotvol import SpotVolSeries, WindowConfig, spot_series

__version__ = "0.1.0"
