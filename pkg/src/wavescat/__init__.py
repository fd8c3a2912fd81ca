"""Wavelet scattering front-ends and an anti-spoofing evaluation suite."""

from .errors import (BudgetError, ConfigurationError, ContractError, DataError,
                     DivergenceError, DomainError, MetricError, SizeError,
                     TrainingError, UnsupportedError, WavescatError)
from .filterbank import (FilterBank1D, FilterBank2D, MorletParams,
                         build_filterbank_1d, build_filterbank_2d,
                         build_gaussian_lowpass, build_morlet_1d,
                         littlewood_paley)
from .scattering1d import (ScatteringConfig1D, ScatteringOutput1D,
                           ScatteringPath, enumerate_paths_1d, scatter_1d,
                           scatter_1d_energy)
from .scattering2d import (ScatteringConfig2D, ScatteringOutput2D,
                           ScatteringPath2D, enumerate_paths_2d, path_count_2d,
                           scatter_2d)
from .frontends import (FeatureMap, FusedFeatures, cq_features, stft_features,
                        wst1d_standalone_features, wstx1_features,
                        wstx2_features)
from .dataset import (AudioSegment, Manifest, chunk, make_synthetic_corpus,
                      read_wav, resample, write_wav)
from .classifier import LinearHead, TrainConfig, score, train, train_fused
from .metrics import (DcfParams, EvalReport, ScoreSet, auc, bootstrap, eer,
                      f1, min_dcf)

__version__ = "0.1.0"
