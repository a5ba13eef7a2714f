"""State-space models built numerically from arbitrary discretized frames.

The package constructs the state-update operators of an online function
approximator from any frame on [0, 1] (redundant Daubechies wavelet
frames, orthonormal Legendre/Fourier rows), executes them by dense
stepping / diagonal stepping / convolution kernels, and provides the
synthetic-signal benchmarks and metrics used to compare the wavelet
construction against the Legendre/Fourier baselines.
"""

__version__ = "0.1.0"

from .filters import FilterBank, WaveletTables, cascade, daubechies_filter
from .frames import (DualFrame, Frame, FrameFamily, FrameSpec, build_basis_frame,
                     build_frame, build_wavelet_frame, dual_frame,
                     frame_derivative, grid_weights, project, span_signal,
                     synthesize)
from .safari import (HippoKind, Measure, MeasureKind, SSMOperator,
                     build_hippo_closed_form, build_scaled_ssm, build_ssm,
                     build_translated_ssm, scaled_measure, translated_measure)
from .spectral import (COND_STABLE_LIMIT, DiagonalSSM, Eigendecomposition,
                       diagonalize, mode_scores, reduce_to_effective)
from .runtime import (DenseStepCache, KernelMatrix, RunConfig, RunMode,
                      StateTrajectory, apply_kernel, build_kernel,
                      coefficient_kernel, gbt_step_dense, ideal_kernel,
                      reconstruct, resample_rows, run_kernel_translated,
                      run_sequential, unroll_kernel_dense)
from .signals import (Event, GeneratorSpec, SignalClass, SignalInstance, Stream,
                      add_noise, gen_blocks, gen_bumps, gen_piecepoly, gen_spikes,
                      generate, load_csv, load_wav, save_csv, save_wav, splitmix64)
from .analysis import (KernelDiagnostics, MseReport, PeakDetector, PeakEvent,
                       PeakReport, WinTally, dead_zone_excess, detect_peaks,
                       kernel_diagnostics, match_peaks, overall_mse,
                       quantile_bands, running_mse, tally_wins)
