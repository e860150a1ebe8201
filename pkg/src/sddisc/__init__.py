"""Discretization of analog filters: step-invariant, bilinear and sampled-data H-infinity."""

from .classic import bilinear, bilinear_prewarp, prewarp_constant, step_invariant
from .errors import (ConditioningError, PoleAtFrequencyError, RiccatiError, SdDiscError,
                     SynthesisError, UnstableSystemError, ValidationError)
from .lifting import (DesignSpec, LiftedSystem, build_error_system,
                      build_error_system_multirate, build_error_system_singlerate,
                      lift_system, recover_multirate_filter)
from .lti import (SampledSignal, StateSpaceModel, c2d_zoh, frequency_response, load_model,
                  save_model, series, subtract)
from .norms import hinf_norm, hinf_norm_continuous, hinf_norm_discrete
from .plant import GeneralizedPlant, lower_lft
from .synthesis import SynthesisResult, gamma_iterate, synthesize_suboptimal

__version__ = "0.1.0"
